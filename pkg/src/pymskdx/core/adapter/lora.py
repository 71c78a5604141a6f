import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pymskdx.core.adapter.nf4 import QuantizedTensor, nf4_dequantize
from pymskdx.core.models import LoraConfig, TargetModule
from pymskdx.exceptions import ShapeMismatchError


@dataclass(eq=False)
class LoraAdapter:
    """Par de matrices de bajo rango: lora_a (r×d_in) y lora_b (d_out×r)."""

    lora_a: np.ndarray
    lora_b: np.ndarray

    def __post_init__(self):
        self.lora_a = np.asarray(self.lora_a, dtype=np.float64)
        self.lora_b = np.asarray(self.lora_b, dtype=np.float64)
        if self.lora_a.ndim != 2 or self.lora_b.ndim != 2 or self.lora_a.shape[0] != self.lora_b.shape[1]:
            raise ShapeMismatchError(f"formas incompatibles: A{self.lora_a.shape} B{self.lora_b.shape}")

    @property
    def rank(self) -> int:
        return self.lora_a.shape[0]

    @property
    def d_in(self) -> int:
        return self.lora_a.shape[1]

    @property
    def d_out(self) -> int:
        return self.lora_b.shape[0]

    @classmethod
    def initialize(cls, d_out: int, d_in: int, rank: int,
                   rng: Optional[np.random.Generator] = None) -> "LoraAdapter":
        """A con Kaiming-uniforme (a=√5, cota 1/√d_in) y B en cero, de modo que ΔW = 0."""
        rng = rng or np.random.default_rng()
        bound = 1.0 / math.sqrt(d_in)
        return cls(lora_a=rng.uniform(-bound, bound, size=(rank, d_in)), lora_b=np.zeros((d_out, rank)))


def _check(adapter: LoraAdapter, config: LoraConfig, module: Optional[TargetModule]) -> None:
    if adapter.rank != config.rank:
        raise ShapeMismatchError(f"rank del adaptador {adapter.rank} != rank configurado {config.rank}")
    if module is not None and (adapter.d_out, adapter.d_in) != (module.d_out, module.d_in):
        raise ShapeMismatchError(
            f"{module.name}: se esperaba {module.d_out}×{module.d_in}, el adaptador es {adapter.d_out}×{adapter.d_in}"
        )


def lora_delta(adapter: LoraAdapter, config: LoraConfig, module: Optional[TargetModule] = None) -> np.ndarray:
    """ΔW = (α/r)·B·A."""
    _check(adapter, config, module)
    return config.scale * (adapter.lora_b @ adapter.lora_a)


def merge(base: QuantizedTensor, adapter: LoraAdapter, config: LoraConfig,
          module: Optional[TargetModule] = None) -> np.ndarray:
    """dequantize(base) + ΔW en float64; ``base`` no se modifica."""
    weights = nf4_dequantize(base)
    delta = lora_delta(adapter, config, module)
    if weights.shape != delta.shape:
        raise ShapeMismatchError(f"base {weights.shape} y delta {delta.shape} no coinciden")
    return weights + delta
