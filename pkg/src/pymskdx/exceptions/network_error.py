from pymskdx.exceptions.base_error import MskDxError


class NetworkError(MskDxError):
    """Problemas de comunicación con el backend de completions."""
    pass


class BackendUnavailableError(NetworkError):
    """Reintentos agotados (timeouts, 429 o 5xx)."""

    def __init__(self, message: str, attempt_count: int = 0):
        super().__init__(message)
        self.attempt_count = attempt_count


class AuthenticationError(NetworkError):
    """Credencial ausente o rechazada; no se reintenta."""
    pass


class ResponseTruncatedError(NetworkError):
    """El backend cortó la respuesta por límite de tokens (finish_reason=length)."""
    pass
