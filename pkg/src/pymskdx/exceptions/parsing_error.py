from pymskdx.exceptions.base_error import MskDxError


class ParsingError(MskDxError):
    """Error al interpretar la salida de un LLM."""
    pass


class NoCsvFoundError(ParsingError):
    """La respuesta no contiene la cabecera PathologyID,PathologyName,Word."""
    pass


class MalformedRowError(ParsingError):
    """Fila de la región CSV que no tiene el formato esperado."""

    def __init__(self, line_no: int, text: str, reason: str):
        super().__init__(f"fila {line_no} inválida ({reason}): {text!r}")
        self.line_no = line_no
        self.text = text
        self.reason = reason
