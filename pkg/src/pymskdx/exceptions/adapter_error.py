from pymskdx.exceptions.base_error import MskDxError


class AdapterError(MskDxError):
    """Error en el núcleo numérico (NF4, LoRA, pérdida)."""
    pass


class ShapeMismatchError(AdapterError, ValueError):
    """Dimensiones incompatibles entre adaptador, configuración o pesos base."""
    pass


class NonFiniteInputError(AdapterError, ValueError):
    """El tensor contiene NaN o infinitos."""
    pass


class AllMaskedError(AdapterError, ValueError):
    """El batch no tiene ningún token de completion sobre el cual calcular la pérdida."""
    pass
