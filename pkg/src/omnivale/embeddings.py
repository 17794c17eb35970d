"""Unit-norm embedding series shared by the gates, stitching, and coherence metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .manifest import InvariantError

UNIT_NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EmbeddingSeries:
    """A sequence of unit-norm vectors, one per item (clip, chunk, or second).

    ``item_span_s`` records how much time each vector covers; None for series
    whose items are not uniform in time (e.g. one vector per event).
    """

    vectors: np.ndarray
    item_span_s: Optional[float] = None

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=np.float64)
        if arr.ndim != 2:
            raise InvariantError(f"embedding series must be 2-D (items x dim), got shape {arr.shape}")
        if arr.shape[0] > 0:
            norms = np.linalg.norm(arr, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOLERANCE):
                worst = float(np.max(np.abs(norms - 1.0)))
                raise InvariantError(f"embedding vectors must be unit norm (worst deviation {worst:.2e})")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __getitem__(self, idx: int) -> np.ndarray:
        return self.vectors[idx]


def normalize(vector: Sequence[float]) -> np.ndarray:
    """L2-normalize; a zero vector stays zero (callers treat it as 'no signal')."""
    arr = np.asarray(vector, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        return arr.copy()
    return arr / norm


def series_from_vectors(vectors: Sequence[Sequence[float]], item_span_s: Optional[float] = None) -> EmbeddingSeries:
    """Build a series, normalizing each vector. Zero vectors are rejected."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise InvariantError(f"expected 2-D vector array, got shape {arr.shape}")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms == 0.0):
        raise InvariantError("cannot normalize a zero vector into an embedding series")
    return EmbeddingSeries(vectors=arr / norms[:, None], item_span_s=item_span_s)


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity of two vectors; 0 when either has zero norm."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    denom = float(np.linalg.norm(va) * np.linalg.norm(vb))
    if denom == 0.0:
        return 0.0
    return float(np.dot(va, vb) / denom)
