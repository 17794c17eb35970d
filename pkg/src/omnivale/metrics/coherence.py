"""Semantic coherence of event boundaries: max running semantic difference.

A clip's score is the largest adjacent-second embedding difference
(1 - cosine) inside it; low values mean the boundary stage produced
semantically coherent clips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .. import kernels
from ..embeddings import EmbeddingSeries
from ..manifest import InvariantError, TimeInterval


def mrsd(series: EmbeddingSeries) -> float:
    """Max over adjacent vector pairs of (1 - cosine similarity)."""
    if len(series) < 2:
        raise InvariantError("mrsd needs at least 2 vectors")
    sims = kernels.rowwise_cosine(series.vectors[:-1], series.vectors[1:])
    # float error can push a cosine of identical vectors past 1.0
    return float(max(1.0 - np.clip(sims, -1.0, 1.0)))


def event_mrsd(per_second: EmbeddingSeries, interval: TimeInterval) -> Optional[float]:
    """MRSD over the seconds overlapping the interval; None when under 2 s."""
    lo = int(math.floor(interval.start_s))
    hi = min(int(math.ceil(interval.end_s)), len(per_second))
    if hi - lo < 2:
        return None
    return mrsd(EmbeddingSeries(vectors=per_second.vectors[lo:hi], item_span_s=1.0))


@dataclass(frozen=True)
class StageBoundaries:
    """Per-video event intervals as produced by each boundary stage."""

    video_id: str
    visual_split: tuple[TimeInterval, ...] = ()
    visual_stitch: tuple[TimeInterval, ...] = ()
    audio_split: tuple[TimeInterval, ...] = ()
    audio_stitch: tuple[TimeInterval, ...] = ()
    omni: tuple[TimeInterval, ...] = ()


@dataclass(frozen=True)
class MrsdRow:
    stage: str
    mean_mrsd_visual: Optional[float]
    mean_mrsd_audio: Optional[float]
    mean_length_s: float
    n_events: int


STAGE_MODALITIES = {
    "visual_split": ("visual",),
    "visual_stitch": ("visual",),
    "audio_split": ("audio",),
    "audio_stitch": ("audio",),
    "omni": ("visual", "audio"),
}


def mrsd_report(
    stages: Sequence[StageBoundaries],
    per_second_embeddings: Callable[[str, str], EmbeddingSeries],
) -> list[MrsdRow]:
    """Mean MRSD and mean event length per boundary stage.

    ``per_second_embeddings(video_id, modality)`` supplies one unit vector
    per second of the video for the requested modality.
    """
    rows = []
    for stage_name, modalities in STAGE_MODALITIES.items():
        collected: dict[str, list[float]] = {m: [] for m in modalities}
        lengths: list[float] = []
        for sb in stages:
            intervals = getattr(sb, stage_name)
            if not intervals:
                continue
            series = {m: per_second_embeddings(sb.video_id, m) for m in modalities}
            for interval in intervals:
                lengths.append(interval.duration_s)
                for m in modalities:
                    value = event_mrsd(series[m], interval)
                    if value is not None:
                        collected[m].append(value)

        def mean_or_none(values: list[float]) -> Optional[float]:
            return sum(values) / len(values) if values else None

        rows.append(
            MrsdRow(
                stage=stage_name,
                mean_mrsd_visual=mean_or_none(collected.get("visual", [])),
                mean_mrsd_audio=mean_or_none(collected.get("audio", [])),
                mean_length_s=sum(lengths) / len(lengths) if lengths else 0.0,
                n_events=len(lengths),
            )
        )
    return rows


def format_mrsd_table(rows: Sequence[MrsdRow]) -> str:
    def fmt(v: Optional[float]) -> str:
        return f"{v:.3f}" if v is not None else "-"

    lines = [f"{'stage':<16} {'MRSD-V':>8} {'MRSD-A':>8} {'avg len':>9} {'events':>7}"]
    for row in rows:
        lines.append(
            f"{row.stage:<16} {fmt(row.mean_mrsd_visual):>8} {fmt(row.mean_mrsd_audio):>8} "
            f"{row.mean_length_s:>8.1f}s {row.n_events:>7}"
        )
    return "\n".join(lines)
