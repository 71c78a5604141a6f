# src/pymskdx/utils/bfloat16.py
import numpy as np
from numpy.typing import ArrayLike

# float64 tiene 52 bits de mantisa explícita; bfloat16 tiene 7.
_DROPPED_BITS = 52 - 7
_SHIFT = np.uint64(_DROPPED_BITS)
_ONE = np.uint64(1)
_HALF_MINUS_ONE = np.uint64((1 << (_DROPPED_BITS - 1)) - 1)
_KEEP_MASK = np.uint64(~((1 << _DROPPED_BITS) - 1) & 0xFFFF_FFFF_FFFF_FFFF)

BFLOAT16_EPS = 2.0 ** -7


def round_to_bfloat16(values: ArrayLike) -> np.ndarray:
    """
    Redondea a la precisión de mantisa de bfloat16 (round-to-nearest-even).

    Se emula sobre el patrón de bits de float64: el rango de exponentes es el
    de float64. NaN e infinitos pasan sin cambios.
    """
    arr = np.array(values, dtype=np.float64)
    shape = arr.shape
    flat = np.ascontiguousarray(arr.reshape(-1))
    bits = flat.view(np.uint64)
    lsb = (bits >> _SHIFT) & _ONE
    rounded = ((bits + _HALF_MINUS_ONE + lsb) & _KEEP_MASK).view(np.float64)
    return np.where(np.isfinite(flat), rounded, flat).reshape(shape)
