from pymskdx.exceptions.base_error import MskDxError


class SplitError(MskDxError):
    """Error en la partición del corpus."""
    pass


class EmptyCorpusError(SplitError):
    """Corpus vacío."""
    pass


class InvalidSplitSpecError(SplitError, ValueError):
    """Proporciones inválidas (suma distinta de 1, menos de 2 partes, valores no positivos)."""
    pass
