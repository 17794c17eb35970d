"""Backend selection for the hot kernels.

Prefers the compiled extension (``omnivale._kernels``), falling back to the
NumPy implementation when the extension is missing or OMNIVALE_FORCE_NUMPY
is set. ``BACKEND`` reports which one is active. Public wrappers normalize
inputs to float64 C-contiguous so both backends see identical data.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np

if os.environ.get("OMNIVALE_FORCE_NUMPY"):
    _impl = _kernels_np
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_np

BACKEND: str = _impl.BACKEND


def _as_f64_1d(x) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected 1-D array, got shape {arr.shape}")
    return arr


def _as_f64_2d(x) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D array, got shape {arr.shape}")
    return arr


def resample_linear(x, n_out: int, ratio: float) -> np.ndarray:
    """Linear-interpolation resampling at source positions i * ratio."""
    arr = _as_f64_1d(x)
    if arr.shape[0] == 0:
        raise ValueError("cannot resample an empty signal")
    if n_out <= 0:
        return np.empty(0, dtype=np.float64)
    return np.asarray(_impl.resample_linear(arr, int(n_out), float(ratio)))


def preemphasis(x, coeff: float) -> np.ndarray:
    arr = _as_f64_1d(x)
    if arr.shape[0] == 0:
        return arr.copy()
    return np.asarray(_impl.preemphasis(arr, float(coeff)))


def frame_windows(x, frame_len: int, hop: int, window) -> np.ndarray:
    """Windowed analysis frames; frame count is (n - frame_len) // hop + 1."""
    arr = _as_f64_1d(x)
    win = _as_f64_1d(window)
    if win.shape[0] != frame_len:
        raise ValueError(f"window length {win.shape[0]} != frame length {frame_len}")
    if hop <= 0 or hop > frame_len:
        raise ValueError(f"hop {hop} must be in 1..frame_len ({frame_len})")
    if arr.shape[0] < frame_len:
        raise ValueError(f"signal length {arr.shape[0]} shorter than one frame ({frame_len})")
    return np.asarray(_impl.frame_windows(arr, int(frame_len), int(hop), win))


def mean_abs_rowdiff(m) -> np.ndarray:
    """Mean |row[t+1] - row[t]| for each consecutive row pair."""
    arr = _as_f64_2d(m)
    if arr.shape[0] < 2:
        raise ValueError("need at least 2 rows to difference")
    return np.asarray(_impl.mean_abs_rowdiff(arr))


def rowwise_cosine(a, b) -> np.ndarray:
    """Per-row cosine similarity; zero-norm rows yield 0."""
    aa = _as_f64_2d(a)
    bb = _as_f64_2d(b)
    if aa.shape != bb.shape:
        raise ValueError(f"shape mismatch: {aa.shape} vs {bb.shape}")
    if aa.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    return np.asarray(_impl.rowwise_cosine(aa, bb))
