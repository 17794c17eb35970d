"""NumPy implementations of the hot kernels.

Same contracts as the compiled extension in ``_kernels.pyx``; used when the
extension is unavailable or when OMNIVALE_FORCE_NUMPY is set. Inputs are
float64 C-contiguous arrays (the dispatcher in ``kernels`` normalizes them).
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def resample_linear(x: np.ndarray, n_out: int, ratio: float) -> np.ndarray:
    """Sample ``x`` at positions i * ratio by linear interpolation."""
    positions = np.arange(n_out, dtype=np.float64) * ratio
    return np.interp(positions, np.arange(x.shape[0], dtype=np.float64), x)


def preemphasis(x: np.ndarray, coeff: float) -> np.ndarray:
    """y[0] = x[0]; y[t] = x[t] - coeff * x[t-1]."""
    out = np.empty_like(x)
    out[0] = x[0]
    out[1:] = x[1:] - coeff * x[:-1]
    return out


def frame_windows(x: np.ndarray, frame_len: int, hop: int, window: np.ndarray) -> np.ndarray:
    """Slice ``x`` into T = (n - frame_len) // hop + 1 windowed frames."""
    n_frames = (x.shape[0] - frame_len) // hop + 1
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx] * window[None, :]


def mean_abs_rowdiff(m: np.ndarray) -> np.ndarray:
    """Mean absolute difference between consecutive rows: T-1 values."""
    return np.mean(np.abs(np.diff(m, axis=0)), axis=1)


def rowwise_cosine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosine similarity per row pair; rows with zero norm score 0."""
    dots = np.einsum("ij,ij->i", a, b)
    norms = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    out = np.zeros(a.shape[0], dtype=np.float64)
    nz = norms > 0.0
    out[nz] = dots[nz] / norms[nz]
    return out
