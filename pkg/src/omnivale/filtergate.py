"""Four-stage retention policy: metadata, speech dominance, static scenes, AV consistency.

Threshold comparisons are strict on purpose: "over 95%", "over 80%", and
"above 0.25" all mean the boundary value itself passes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .embeddings import EmbeddingSeries
from .framediff import frame_diff_series, span_mean_diff
from .manifest import InvariantError, TimeInterval, VideoRecord
from .mediaio import FrameSequence, Transcript, VideoMeta, subtitle_coverage


@dataclass(frozen=True)
class FilterConfig:
    min_height_px: int = 360
    required_language: str = "en"
    max_subtitle_coverage: float = 0.95
    static_frame_diff_threshold: float = 0.01
    max_static_fraction: float = 0.80
    av_chunk_s: float = 5.0
    av_similarity_threshold: float = 0.25

    def __post_init__(self):
        if not 0.0 <= self.max_subtitle_coverage <= 1.0:
            raise InvariantError("max_subtitle_coverage must be in [0, 1]")
        if not 0.0 <= self.max_static_fraction <= 1.0:
            raise InvariantError("max_static_fraction must be in [0, 1]")
        if self.av_chunk_s <= 0:
            raise InvariantError("av_chunk_s must be positive")
        if not -1.0 <= self.av_similarity_threshold <= 1.0:
            raise InvariantError("av_similarity_threshold must be a valid cosine value")


@dataclass(frozen=True)
class GateResult:
    passed: bool
    reason: Optional[str] = None

    @classmethod
    def ok(cls) -> "GateResult":
        return cls(passed=True)

    @classmethod
    def reject(cls, reason: str) -> "GateResult":
        return cls(passed=False, reason=reason)


def metadata_gate(meta: VideoMeta, transcript: Optional[Transcript], cfg: FilterConfig = FilterConfig()) -> GateResult:
    """Resolution and transcript-language gate."""
    if meta.height < cfg.min_height_px:
        return GateResult.reject("resolution")
    if transcript is None or not meta.has_transcript:
        return GateResult.reject("transcript")
    if transcript.language != cfg.required_language:
        return GateResult.reject("transcript")
    return GateResult.ok()


def speech_dominance_gate(transcript: Optional[Transcript], duration_s: float, cfg: FilterConfig = FilterConfig()) -> GateResult:
    """Reject speech-dominated videos: subtitle coverage strictly over the cap."""
    coverage = subtitle_coverage(transcript, duration_s)
    if coverage > cfg.max_subtitle_coverage:
        return GateResult.reject("speech-dominance")
    return GateResult.ok()


def scene_is_static(
    diffs: np.ndarray, frames: FrameSequence, scene: TimeInterval, cfg: FilterConfig
) -> bool:
    """A scene is static when its mean adjacent-frame difference is below threshold.

    Scenes with fewer than two frames have no difference signal and count as
    static.
    """
    return span_mean_diff(diffs, frames, scene.start_s, scene.end_s) < cfg.static_frame_diff_threshold


def static_scene_gate(
    frames: FrameSequence, scenes: Sequence[TimeInterval], cfg: FilterConfig = FilterConfig()
) -> GateResult:
    """Reject when static scenes cover strictly more than the allowed fraction."""
    if not scenes:
        return GateResult.reject("static-scenes")
    diffs = frame_diff_series(frames)
    total = sum(s.duration_s for s in scenes)
    static_total = sum(s.duration_s for s in scenes if scene_is_static(diffs, frames, s, cfg))
    if total <= 0:
        return GateResult.reject("static-scenes")
    if static_total / total > cfg.max_static_fraction:
        return GateResult.reject("static-scenes")
    return GateResult.ok()


def av_consistency_gate(
    audio_embeddings: EmbeddingSeries,
    visual_embeddings: EmbeddingSeries,
    cfg: FilterConfig = FilterConfig(),
) -> GateResult:
    """Pass when at least one aligned chunk pair is strictly more similar than the threshold."""
    if len(audio_embeddings) != len(visual_embeddings):
        raise InvariantError(
            f"chunk count mismatch: {len(audio_embeddings)} audio vs {len(visual_embeddings)} visual"
        )
    if len(audio_embeddings) == 0:
        return GateResult.reject("av-consistency")
    sims = kernels.rowwise_cosine(audio_embeddings.vectors, visual_embeddings.vectors)
    if float(np.max(sims)) > cfg.av_similarity_threshold:
        return GateResult.ok()
    return GateResult.reject("av-consistency")


def run_filters(
    record: VideoRecord,
    assets,
    embed_chunks: Callable[[object, float], tuple[EmbeddingSeries, EmbeddingSeries]],
    cfg: FilterConfig = FilterConfig(),
    scenes_for: Optional[Callable[[FrameSequence], Sequence[TimeInterval]]] = None,
) -> VideoRecord:
    """Apply the gates in pipeline order, recording the first rejection.

    ``assets`` supplies meta/transcript/frames (see mediaio.VideoAssets);
    ``embed_chunks(assets, chunk_s)`` returns the aligned (audio, visual)
    chunk embedding series for the AV gate; ``scenes_for(frames)`` provides
    the scene partition the static gate scores (whole-video span when
    omitted). Scene detection runs only after the cheap gates pass, so a
    metadata reject never touches media. Load failures reject with "io".
    """
    try:
        meta = assets.meta()
        transcript = assets.transcript()
    except Exception:
        return replace(record, filter_status="rejected", rejection_reason="io")

    result = metadata_gate(meta, transcript, cfg)
    if result.passed:
        result = speech_dominance_gate(transcript, meta.duration_s, cfg)
    if result.passed:
        try:
            frames = assets.frames()
        except Exception:
            return replace(record, filter_status="rejected", rejection_reason="io")
        if scenes_for is not None:
            scenes: Sequence[TimeInterval] = scenes_for(frames)
        else:
            scenes = [TimeInterval(0.0, max(frames.duration_s, 1e-3))]
        result = static_scene_gate(frames, scenes, cfg)
    if result.passed:
        try:
            audio_emb, visual_emb = embed_chunks(assets, cfg.av_chunk_s)
        except InvariantError:
            raise
        except Exception:
            return replace(record, filter_status="rejected", rejection_reason="io")
        result = av_consistency_gate(audio_emb, visual_emb, cfg)

    if result.passed:
        return replace(record, filter_status="retained", rejection_reason=None)
    return replace(record, filter_status="rejected", rejection_reason=result.reason)
