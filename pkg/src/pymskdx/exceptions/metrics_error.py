from pymskdx.exceptions.base_error import MskDxError


class MetricsError(MskDxError):
    """Error en la evaluación."""
    pass


class EmptyInputError(MetricsError):
    """No hay pares a evaluar."""
    pass
