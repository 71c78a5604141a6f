from typing import Optional

from pymskdx.exceptions.base_error import MskDxError


class DataError(MskDxError):
    """Problemas con archivos de datos (corpus, etiquetas, asignaciones)."""

    def __init__(self, message: str, line_no: Optional[int] = None, report_id: Optional[str] = None):
        prefix = f"línea {line_no}: " if line_no is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line_no = line_no
        self.report_id = report_id


class DuplicateIdError(DataError):
    """report_id repetido dentro de un mismo archivo."""
    pass


class MissingFieldError(DataError):
    """Falta un campo obligatorio en un registro."""
    pass


class MalformedJsonError(DataError):
    """Línea que no es JSON válido."""
    pass


class InvalidRecordError(DataError):
    """Registro con valores inválidos (impresión vacía, tipos erróneos)."""
    pass


class MissingLabelsError(DataError):
    """Un reporte no tiene conjunto de etiquetas votado."""
    pass


class MissingReportError(DataError):
    """Un report_id del gold no aparece en las predicciones."""
    pass
