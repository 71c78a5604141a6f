from pymskdx.exceptions.base_error import MskDxError


class PromptError(MskDxError):
    """Error al construir un prompt."""
    pass


class EmptyImpressionError(PromptError):
    """La impresión radiológica está vacía."""
    pass
