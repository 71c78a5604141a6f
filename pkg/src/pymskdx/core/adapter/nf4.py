import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.stats import norm

from pymskdx.config.settings import config
from pymskdx.exceptions import AdapterError, NonFiniteInputError
from pymskdx.utils.bfloat16 import BFLOAT16_EPS, round_to_bfloat16

# Punto medio entre 1 - 1/(2·15) y 1 - 1/(2·16): cuantil extremo de la construcción NormalFloat.
NF4_OFFSET = 0.9677083
ZERO_CODE = 7

MAGIC = b"NF4Q"
FORMAT_VERSION = 1


@lru_cache(maxsize=1)
def _codebook() -> Tuple[float, ...]:
    positive = norm.ppf(np.linspace(NF4_OFFSET, 0.5, 9)[:-1])
    negative = -norm.ppf(np.linspace(NF4_OFFSET, 0.5, 8)[:-1])
    values = np.sort(np.concatenate([positive, [0.0], negative]))
    return tuple((values / values.max()).tolist())


def nf4_codebook() -> np.ndarray:
    """Los 16 niveles NF4: cuantiles normales asimétricos (8 positivos, 7 negativos y el 0) en [-1, 1]."""
    return np.array(_codebook(), dtype=np.float64)


def max_codebook_gap() -> float:
    return float(np.diff(nf4_codebook()).max())


def quantization_error_bound(absmax: ArrayLike, bf16_slack: bool = True) -> np.ndarray:
    """Cota de |dequantize(quantize(x)) − x| por bloque; la holgura cubre el redondeo bfloat16."""
    half_gap = max_codebook_gap() / 2
    return np.asarray(absmax, dtype=np.float64) * (half_gap + (BFLOAT16_EPS if bf16_slack else 0.0))


@dataclass(frozen=True, eq=False)
class QuantizedTensor:
    codes: np.ndarray      # uint8, un código por elemento (aplanado)
    absmax: np.ndarray     # float64, uno por bloque, redondeado a bfloat16
    block_size: int
    codebook: np.ndarray
    shape: Tuple[int, ...]

    @property
    def n_elements(self) -> int:
        return int(self.codes.size)

    @property
    def n_blocks(self) -> int:
        return int(self.absmax.size)

    def code_payload_bytes(self) -> int:
        """Bytes de los códigos empaquetados (4 bits por elemento), sin metadatos."""
        return (self.n_elements + 1) // 2

    def packed_codes(self) -> np.ndarray:
        codes = self.codes.astype(np.uint8)
        if codes.size % 2:
            codes = np.append(codes, np.uint8(0))
        return (codes[0::2] | (codes[1::2] << 4)).astype(np.uint8)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        header = MAGIC + struct.pack("<BB", FORMAT_VERSION, len(self.shape))
        header += struct.pack(f"<{len(self.shape)}Q", *self.shape)
        header += struct.pack("<I", self.block_size)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(self.codebook.astype("<f8").tobytes())
            fh.write(self.absmax.astype("<f8").tobytes())
            fh.write(self.packed_codes().tobytes())
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "QuantizedTensor":
        data = Path(path).read_bytes()
        try:
            return cls._decode(data)
        except (struct.error, ValueError) as exc:
            raise AdapterError(f"{path}: archivo NF4Q truncado o corrupto: {exc}") from exc

    @classmethod
    def _decode(cls, data: bytes) -> "QuantizedTensor":
        if data[:4] != MAGIC:
            raise AdapterError("no es un archivo NF4Q")
        version, ndim = struct.unpack_from("<BB", data, 4)
        if version != FORMAT_VERSION:
            raise AdapterError(f"versión {version} no soportada")
        offset = 6
        shape = struct.unpack_from(f"<{ndim}Q", data, offset)
        offset += 8 * ndim
        (block_size,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if block_size == 0:
            raise AdapterError("block_size 0 en la cabecera")

        n = int(np.prod(shape, dtype=np.int64))
        n_blocks = -(-n // block_size)
        codebook = np.frombuffer(data, dtype="<f8", count=16, offset=offset).astype(np.float64)
        offset += 16 * 8
        absmax = np.frombuffer(data, dtype="<f8", count=n_blocks, offset=offset).astype(np.float64)
        offset += 8 * n_blocks
        packed = np.frombuffer(data, dtype=np.uint8, count=(n + 1) // 2, offset=offset)
        if offset + packed.size != len(data):
            raise AdapterError("tamaño inconsistente con la cabecera")

        codes = np.empty(packed.size * 2, dtype=np.uint8)
        codes[0::2] = packed & 0x0F
        codes[1::2] = packed >> 4
        return cls(codes=codes[:n], absmax=absmax, block_size=int(block_size), codebook=codebook,
                   shape=tuple(int(d) for d in shape))


def nf4_quantize(weights: ArrayLike, block_size: Optional[int] = None) -> QuantizedTensor:
    """
    Cuantización NF4 por bloques.

    absmax se guarda redondeado a bfloat16 para que cuantizar lo ya
    decuantizado sea un punto fijo. Cada valor escalado va al código más
    cercano (empate: índice menor); un bloque nulo queda todo en el código del 0.
    """
    block_size = config.NF4_BLOCK_SIZE if block_size is None else block_size
    if block_size < 1:
        raise AdapterError("block_size debe ser positivo")

    arr = np.asarray(weights, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise NonFiniteInputError("el tensor contiene valores no finitos")

    flat = arr.reshape(-1)
    n = flat.size
    n_blocks = -(-n // block_size)
    blocks = np.zeros(n_blocks * block_size, dtype=np.float64)
    blocks[:n] = flat
    blocks = blocks.reshape(n_blocks, block_size)

    absmax = round_to_bfloat16(np.abs(blocks).max(axis=1)) if n_blocks else np.zeros(0)
    safe = np.where(absmax > 0, absmax, 1.0)
    scaled = np.where(absmax[:, None] > 0, blocks / safe[:, None], 0.0)

    codebook = nf4_codebook()
    midpoints = (codebook[:-1] + codebook[1:]) / 2
    # side="left": un valor exactamente en el punto medio queda en el índice menor.
    codes = np.searchsorted(midpoints, scaled.reshape(-1), side="left").astype(np.uint8)

    return QuantizedTensor(codes=codes[:n], absmax=absmax, block_size=block_size, codebook=codebook,
                           shape=tuple(arr.shape))


def nf4_dequantize(q: QuantizedTensor) -> np.ndarray:
    block_index = np.arange(q.n_elements) // q.block_size
    values = q.codebook[q.codes.astype(np.intp)] * q.absmax[block_index]
    return round_to_bfloat16(values).reshape(q.shape)


def roundtrip_error(weights: ArrayLike, block_size: Optional[int] = None) -> Tuple[float, float]:
    """(máximo, media) del error absoluto de ida y vuelta."""
    arr = np.asarray(weights, dtype=np.float64)
    error = np.abs(nf4_dequantize(nf4_quantize(arr, block_size)) - arr)
    if error.size == 0:
        return 0.0, 0.0
    return float(error.max()), float(error.mean())
