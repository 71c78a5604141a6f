from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from pymskdx.exceptions import AllMaskedError, NonFiniteInputError, ShapeMismatchError


@dataclass(frozen=True, eq=False)
class TokenBatch:
    """logits T×V, target_ids de largo T y loss_mask (True = token de completion)."""

    logits: np.ndarray
    target_ids: np.ndarray
    loss_mask: np.ndarray

    def __post_init__(self):
        logits = np.asarray(self.logits, dtype=np.float64)
        targets = np.asarray(self.target_ids, dtype=np.intp)
        mask = np.asarray(self.loss_mask, dtype=bool)
        if logits.ndim != 2 or targets.shape != (logits.shape[0],) or mask.shape != targets.shape:
            raise ShapeMismatchError(
                f"logits {logits.shape}, target_ids {targets.shape}, loss_mask {mask.shape} no concuerdan"
            )
        if targets.size and (targets.min() < 0 or targets.max() >= logits.shape[1]):
            raise ShapeMismatchError("target_ids fuera de [0, V)")
        if not np.isfinite(logits).all():
            raise NonFiniteInputError("logits no finitos")
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "target_ids", targets)
        object.__setattr__(self, "loss_mask", mask)

    @property
    def completion_tokens(self) -> int:
        return int(self.loss_mask.sum())


def _require_completion(batch: TokenBatch) -> int:
    count = batch.completion_tokens
    if count == 0:
        raise AllMaskedError("no hay tokens de completion en el batch")
    return count


def masked_cross_entropy(batch: TokenBatch) -> float:
    """Media de −log softmax(logits[t])[target[t]] sobre las posiciones de completion."""
    _require_completion(batch)
    logits = batch.logits[batch.loss_mask]
    targets = batch.target_ids[batch.loss_mask]
    nll = logsumexp(logits, axis=1) - logits[np.arange(len(targets)), targets]
    return float(nll.mean())


def cross_entropy_grad(batch: TokenBatch) -> np.ndarray:
    """Gradiente respecto de los logits; filas del prompt en cero."""
    count = _require_completion(batch)
    grad = np.zeros_like(batch.logits)
    rows = np.flatnonzero(batch.loss_mask)
    probs = softmax(batch.logits[rows], axis=1)
    probs[np.arange(len(rows)), batch.target_ids[rows]] -= 1.0
    grad[rows] = probs / count
    return grad
