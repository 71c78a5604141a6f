class MskDxError(Exception):
    """Excepción base para la librería pymskdx."""
    pass
