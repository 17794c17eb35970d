"""Compact content descriptors sent to embedding/captioning clients.

Live deployments embed raw media server-side; the toolkit itself only ships
these low-cost summaries, which also give the deterministic stubs something
content-coupled to work from. All values are roughly [0, 1] scaled.
"""

from __future__ import annotations

import math

import numpy as np

from .framediff import frame_diff_series
from .mediaio import AudioTrack, FrameSequence


def audio_span_features(track: AudioTrack, start_s: float, end_s: float) -> list[float]:
    """[rms level, mean |sample delta|, zero-crossing rate] for a span."""
    clip = track.slice(start_s, end_s).samples
    if clip.size == 0:
        return [0.0, 0.0, 0.0]
    rms = float(np.sqrt(np.mean(clip**2)))
    delta = float(np.mean(np.abs(np.diff(clip)))) if clip.size > 1 else 0.0
    zcr = float(np.mean(np.signbit(clip[:-1]) != np.signbit(clip[1:]))) if clip.size > 1 else 0.0
    return [rms, delta, zcr]


def visual_span_features(frames: FrameSequence, start_s: float, end_s: float) -> list[float]:
    """[mean brightness, pixel std, mean adjacent-frame difference] for a span."""
    ts = frames.timestamps_s
    mask = (ts >= start_s - 1e-9) & (ts < end_s - 1e-9)
    selected = frames.frames[mask]
    if selected.shape[0] == 0:
        idx = min(int(np.searchsorted(ts, start_s)), len(frames) - 1)
        selected = frames.frames[idx : idx + 1]
    brightness = float(np.mean(selected))
    spread = float(np.std(selected))
    if selected.shape[0] > 1:
        sub = FrameSequence(
            fps=frames.fps,
            frames=selected,
            timestamps_s=np.arange(selected.shape[0]) / frames.fps,
        )
        motion = float(np.mean(frame_diff_series(sub)))
    else:
        motion = 0.0
    return [brightness, spread, motion]


def frame_features(frames: FrameSequence, index: int) -> list[float]:
    """Per-frame descriptor used for scene stitching embeddings."""
    frame = frames.frames[index]
    return [float(np.mean(frame)), float(np.std(frame)), float(np.mean(frame[: frame.shape[0] // 2]))]


def chunk_spans(duration_s: float, chunk_s: float) -> list[tuple[float, float]]:
    """Consecutive chunk spans covering [0, duration); the last may be partial."""
    n = max(1, int(math.ceil(duration_s / chunk_s - 1e-9)))
    return [(i * chunk_s, min((i + 1) * chunk_s, duration_s)) for i in range(n)]


class MediaClipSource:
    """ClipSource over a decoded frame sequence and audio track."""

    def __init__(self, frames: FrameSequence, audio: AudioTrack):
        self.frames = frames
        self.audio = audio

    def visual_features(self, start_s: float, end_s: float) -> list[float]:
        return visual_span_features(self.frames, start_s, end_s)

    def audio_features(self, start_s: float, end_s: float) -> list[float]:
        return audio_span_features(self.audio, start_s, end_s)

    def keyframe_features(self, t_s: float) -> list[float]:
        idx = min(int(t_s * self.frames.fps), len(self.frames) - 1)
        return frame_features(self.frames, max(idx, 0))
