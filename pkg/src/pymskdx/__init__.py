__version__ = "0.1.0"

from .config.settings import config, settings
from .core.enums import Modality, Provenance, SplitOrder, VoteMode
from .core.models import LabelSet, ReportRecord, SplitSpec
from .core.vocabulary import Vocabulary, default_vocabulary, load_vocabulary
from .exceptions import (BackendUnavailableError, DataError, MskDxError, NetworkError, ParsingError,
                         VocabularyError)
from .labeler import TeacherLabeler

__all__ = [
    "TeacherLabeler",
    "Vocabulary",
    "default_vocabulary",
    "load_vocabulary",
    "LabelSet",
    "ReportRecord",
    "SplitSpec",
    "Modality",
    "Provenance",
    "SplitOrder",
    "VoteMode",
    "config",
    "settings",
    "MskDxError",
    "VocabularyError",
    "NetworkError",
    "BackendUnavailableError",
    "ParsingError",
    "DataError",
    "__version__",
]
