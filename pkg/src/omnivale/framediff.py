"""Downsampled-grayscale frame difference, shared by the static gate and scene splitting."""

from __future__ import annotations

import numpy as np

from . import kernels
from .mediaio import FrameSequence

DOWNSAMPLE_W = 64
DOWNSAMPLE_H = 36


def downsample_gray(frames: np.ndarray, width: int = DOWNSAMPLE_W, height: int = DOWNSAMPLE_H) -> np.ndarray:
    """Block-mean downsample a T x H x W stack; frames already smaller pass through."""
    t, h, w = frames.shape
    if h <= height and w <= width:
        return frames
    row_edges = np.linspace(0, h, min(height, h) + 1).astype(int)
    col_edges = np.linspace(0, w, min(width, w) + 1).astype(int)
    rows = np.add.reduceat(frames, row_edges[:-1], axis=1)
    cells = np.add.reduceat(rows, col_edges[:-1], axis=2)
    areas = np.outer(np.diff(row_edges), np.diff(col_edges)).astype(np.float64)
    return cells / areas[None, :, :]


def frame_diff_series(frames: FrameSequence) -> np.ndarray:
    """Mean absolute pixel difference between consecutive downsampled frames.

    Returns len(frames) - 1 values in [0, 1]; an empty array for a single frame.
    """
    if len(frames) < 2:
        return np.empty(0, dtype=np.float64)
    small = downsample_gray(frames.frames)
    flat = small.reshape(small.shape[0], -1)
    return kernels.mean_abs_rowdiff(flat)


def span_mean_diff(diffs: np.ndarray, frames: FrameSequence, start_s: float, end_s: float) -> float:
    """Mean of the diff values whose frame pairs fall inside [start_s, end_s).

    A pair belongs to the span only when both frames do; the pair straddling
    the end boundary belongs to the next span. Spans with fewer than two
    frames have no pairs and report 0 (treated as static by callers).
    """
    ts = frames.timestamps_s
    mask = (ts[:-1] >= start_s - 1e-9) & (ts[1:] < end_s - 1e-9)
    selected = diffs[mask]
    if selected.size == 0:
        return 0.0
    return float(np.mean(selected))
