from .adapter_error import AdapterError, AllMaskedError, NonFiniteInputError, ShapeMismatchError
from .base_error import MskDxError
from .data_error import (DataError, DuplicateIdError, InvalidRecordError, MalformedJsonError, MissingFieldError,
                         MissingLabelsError, MissingReportError)
from .metrics_error import EmptyInputError, MetricsError
from .network_error import AuthenticationError, BackendUnavailableError, NetworkError, ResponseTruncatedError
from .parsing_error import MalformedRowError, NoCsvFoundError, ParsingError
from .prompt_error import EmptyImpressionError, PromptError
from .split_error import EmptyCorpusError, InvalidSplitSpecError, SplitError
from .vocabulary_error import (BadCountError, DuplicateNameError, MalformedFileError, PathologyNotFoundError,
                               VocabularyError)
from .voting_error import MixedReportsError, NoRunsError, VotingError

__all__ = [
    'MskDxError',
    'VocabularyError', 'DuplicateNameError', 'BadCountError', 'MalformedFileError', 'PathologyNotFoundError',
    'PromptError', 'EmptyImpressionError',
    'NetworkError', 'BackendUnavailableError', 'AuthenticationError', 'ResponseTruncatedError',
    'ParsingError', 'NoCsvFoundError', 'MalformedRowError',
    'VotingError', 'MixedReportsError', 'NoRunsError',
    'SplitError', 'EmptyCorpusError', 'InvalidSplitSpecError',
    'MetricsError', 'EmptyInputError',
    'AdapterError', 'ShapeMismatchError', 'NonFiniteInputError', 'AllMaskedError',
    'DataError', 'DuplicateIdError', 'MissingFieldError', 'MalformedJsonError', 'InvalidRecordError',
    'MissingLabelsError', 'MissingReportError',
]
