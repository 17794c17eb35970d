"""Two-stage visual event boundary detection.

Stage one cuts on downsampled frame differences and absorbs sub-minimum
fragments into their more similar neighbor; stage two stitches adjacent
scenes whose embeddings agree. Fragments shorter than the transition window
with a hard cut on both sides are deliberately left alone by the
min-length merge so that postprocessing can drop them as transition clips
instead of contaminating a neighbor scene.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .embeddings import EmbeddingSeries, cosine, normalize
from .framediff import frame_diff_series, span_mean_diff
from .manifest import InvariantError, ModalEvent, TimeInterval
from .mediaio import FrameSequence


@dataclass(frozen=True)
class VsegConfig:
    cut_threshold: float = 0.10
    min_event_s: float = 2.0
    max_event_s: float = 600.0
    stitch_similarity: float = 0.85
    transition_max_s: float = 0.5
    static_frame_diff_threshold: float = 0.01

    def __post_init__(self):
        if not self.min_event_s < self.max_event_s:
            raise InvariantError("min_event_s must be below max_event_s")
        for name in ("cut_threshold", "stitch_similarity"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise InvariantError(f"{name} must be in (0, 1], got {value}")


@dataclass
class _Scene:
    start_s: float
    end_s: float
    left_diff: Optional[float]  # cut strength at start boundary, None at video edge
    right_diff: Optional[float]

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s


def _is_transition_candidate(scene: _Scene, cfg: VsegConfig) -> bool:
    return (
        scene.duration < cfg.transition_max_s
        and scene.left_diff is not None
        and scene.right_diff is not None
    )


def _merge_short_scenes(scenes: list[_Scene], cfg: VsegConfig) -> list[_Scene]:
    scenes = list(scenes)
    while len(scenes) > 1:
        idx = None
        for i, sc in enumerate(scenes):
            if sc.duration < cfg.min_event_s and not _is_transition_candidate(sc, cfg):
                idx = i
                break
        if idx is None:
            break
        sc = scenes[idx]
        # Merge into the more similar neighbor (lower cut strength); ties go left.
        left_cost = sc.left_diff if idx > 0 else None
        right_cost = sc.right_diff if idx < len(scenes) - 1 else None
        if left_cost is not None and (right_cost is None or left_cost <= right_cost):
            left = scenes[idx - 1]
            scenes[idx - 1] = _Scene(left.start_s, sc.end_s, left.left_diff, sc.right_diff)
            del scenes[idx]
        elif right_cost is not None:
            right = scenes[idx + 1]
            scenes[idx + 1] = _Scene(sc.start_s, right.end_s, sc.left_diff, right.right_diff)
            del scenes[idx]
        else:
            break
    return scenes


def _split_long_scenes(scenes: list[_Scene], cfg: VsegConfig) -> list[_Scene]:
    out: list[_Scene] = []
    for sc in scenes:
        if sc.duration <= cfg.max_event_s:
            out.append(sc)
            continue
        parts = int(np.ceil(sc.duration / cfg.max_event_s))
        edges = np.linspace(sc.start_s, sc.end_s, parts + 1)
        for i in range(parts):
            out.append(
                _Scene(
                    float(edges[i]),
                    float(edges[i + 1]),
                    sc.left_diff if i == 0 else 0.0,
                    sc.right_diff if i == parts - 1 else 0.0,
                )
            )
    return out


def split_scenes(frames: FrameSequence, cfg: VsegConfig = VsegConfig()) -> list[TimeInterval]:
    """Cut wherever adjacent-frame difference exceeds the threshold.

    The result partitions [0, duration); fragments below min_event_s are
    merged into the neighbor with the weaker separating cut, and scenes over
    max_event_s are split into equal parts.
    """
    if len(frames) < 2:
        raise InvariantError("scene splitting needs at least 2 frames")
    diffs = frame_diff_series(frames)
    duration = frames.duration_s

    cut_indices = np.nonzero(diffs > cfg.cut_threshold)[0]
    boundaries = [0.0] + [float(frames.timestamps_s[i + 1]) for i in cut_indices] + [duration]
    scenes = []
    for i in range(len(boundaries) - 1):
        left = float(diffs[cut_indices[i - 1]]) if i > 0 else None
        right = float(diffs[cut_indices[i]]) if i < len(boundaries) - 2 else None
        scenes.append(_Scene(boundaries[i], boundaries[i + 1], left, right))

    scenes = _merge_short_scenes(scenes, cfg)
    scenes = _split_long_scenes(scenes, cfg)
    return [TimeInterval(sc.start_s, sc.end_s) for sc in scenes]


def scene_embeddings(frame_embeddings: EmbeddingSeries, frames: FrameSequence, scenes: Sequence[TimeInterval]) -> EmbeddingSeries:
    """Per-scene embedding: normalized mean of the scene's first- and last-frame embeddings."""
    if len(frame_embeddings) != len(frames):
        raise InvariantError(
            f"frame embedding count {len(frame_embeddings)} != frame count {len(frames)}"
        )
    ts = frames.timestamps_s
    vectors = []
    for scene in scenes:
        idx = np.nonzero((ts >= scene.start_s - 1e-9) & (ts < scene.end_s - 1e-9))[0]
        if idx.size == 0:
            idx = np.array([int(np.searchsorted(ts, scene.start_s)) - 1])
            idx = np.clip(idx, 0, len(frames) - 1)
        mean = (frame_embeddings[int(idx[0])] + frame_embeddings[int(idx[-1])]) / 2.0
        vectors.append(normalize(mean))
    return EmbeddingSeries(vectors=np.asarray(vectors))


def stitch_scenes(
    scenes: Sequence[TimeInterval],
    embeddings: EmbeddingSeries,
    cfg: VsegConfig = VsegConfig(),
) -> list[TimeInterval]:
    """Merge adjacent scenes whose embeddings agree, iterated to a fixpoint.

    A merge happens when cosine similarity >= the stitch threshold and the
    merged span stays within max_event_s. Merged embeddings are the
    duration-weighted normalized mean of the parts.
    """
    if len(embeddings) != len(scenes):
        raise InvariantError(f"embedding count {len(embeddings)} != scene count {len(scenes)}")
    for a, b in zip(scenes, scenes[1:]):
        if abs(a.end_s - b.start_s) > 1e-9:
            raise InvariantError("scenes must be contiguous and sorted for stitching")

    spans = [(s.start_s, s.end_s) for s in scenes]
    vecs = [np.array(embeddings[i], dtype=np.float64) for i in range(len(embeddings))]

    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(spans) - 1:
            merged_len = spans[i + 1][1] - spans[i][0]
            if merged_len <= cfg.max_event_s and cosine(vecs[i], vecs[i + 1]) >= cfg.stitch_similarity:
                w1 = spans[i][1] - spans[i][0]
                w2 = spans[i + 1][1] - spans[i + 1][0]
                merged_vec = normalize(vecs[i] * w1 + vecs[i + 1] * w2)
                spans[i] = (spans[i][0], spans[i + 1][1])
                vecs[i] = merged_vec
                del spans[i + 1]
                del vecs[i + 1]
                changed = True
            else:
                i += 1
    return [TimeInterval(a, b) for a, b in spans]


def _boundary_cut_strength(diffs: np.ndarray, frames: FrameSequence, t: float) -> Optional[float]:
    """Frame-difference value at the cut straddling time t; None at the video edges."""
    ts = frames.timestamps_s
    idx = int(np.searchsorted(ts, t - 1e-9))
    if idx <= 0 or idx - 1 >= diffs.shape[0]:
        return None
    return float(diffs[idx - 1])


def postprocess_visual(
    events: Sequence[TimeInterval],
    frames: FrameSequence,
    cfg: VsegConfig = VsegConfig(),
    id_prefix: str = "v",
) -> list[ModalEvent]:
    """Drop static scenes and hard-cut transition clips; keep the rest as visual events."""
    diffs = frame_diff_series(frames)
    kept: list[ModalEvent] = []
    for interval in events:
        mean_diff = span_mean_diff(diffs, frames, interval.start_s, interval.end_s)
        if mean_diff < cfg.static_frame_diff_threshold:
            continue
        if interval.duration_s < cfg.transition_max_s:
            left = _boundary_cut_strength(diffs, frames, interval.start_s)
            right = _boundary_cut_strength(diffs, frames, interval.end_s)
            if (
                left is not None
                and right is not None
                and left > cfg.cut_threshold
                and right > cfg.cut_threshold
            ):
                continue
        kept.append(
            ModalEvent(
                id=f"{id_prefix}{len(kept):03d}",
                modality="visual",
                interval=interval,
            )
        )
    return kept
