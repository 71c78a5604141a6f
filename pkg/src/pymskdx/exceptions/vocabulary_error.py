from typing import Optional

from pymskdx.exceptions.base_error import MskDxError


class VocabularyError(MskDxError):
    """Problemas con el archivo o el contenido del vocabulario de patologías."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        super().__init__(message if line_no is None else f"línea {line_no}: {message}")
        self.line_no = line_no


class DuplicateNameError(VocabularyError):
    """Un nombre canónico o alias aparece en más de una entrada."""
    pass


class BadCountError(VocabularyError):
    """El número de entradas no coincide con el tamaño esperado (modo estricto)."""
    pass


class MalformedFileError(VocabularyError):
    """Línea con formato inválido en el archivo de vocabulario."""
    pass


class PathologyNotFoundError(MskDxError, LookupError):
    """Nombre fuera del vocabulario (posible alucinación del modelo)."""

    def __init__(self, name: str):
        super().__init__(f"Patología fuera de vocabulario: {name!r}")
        self.name = name
