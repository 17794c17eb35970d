"""Omni-modal boundary fusion.

Omni events anchor on visual starts and grow rightward until every audio
event they overlap fits without truncation; a grown event swallows any
later visual event it reaches. Chained overlaps therefore merge rather than
clamp: clamping would either truncate audio or produce overlapping output.

Audio with no visual context seeds its own audio-only event. The one case
where a visual anchor cannot hold is an audio event that starts in a gap
and crosses into a visual-anchored event; its start is folded in (counted
in ``left_extended_count``), since dropping it would lose content and
splitting it would truncate. With no gap-crossing audio, every event with
visual constituents starts exactly at a visual start.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .manifest import InvariantError, ModalEvent, OmniEvent, TimeInterval


@dataclass(frozen=True)
class FusionReport:
    omni_events: tuple[OmniEvent, ...]
    coverage_fraction: float
    absorbed_visual_count: int
    left_extended_count: int
    duration_s: float


@dataclass
class _Span:
    start: float
    end: float
    visual_ids: list[str]
    audio_ids: list[str]


def _check_modality_list(events: Sequence[ModalEvent], what: str) -> None:
    for prev, cur in zip(events, events[1:]):
        if cur.interval.start_s < prev.interval.start_s:
            raise InvariantError(f"{what} events must be sorted by start time")
        if prev.interval.end_s > cur.interval.start_s:
            raise InvariantError(f"{what} events must be non-overlapping")


def fusion_coverage(omni_events: Sequence[OmniEvent], duration_s: float) -> float:
    """Fraction of the video covered by (non-overlapping) omni events."""
    if duration_s <= 0:
        raise InvariantError("duration must be positive")
    return sum(ev.interval.duration_s for ev in omni_events) / duration_s


def fuse_events(
    visual: Sequence[ModalEvent],
    audio: Sequence[ModalEvent],
    duration_s: float,
) -> FusionReport:
    """Fuse per-modality events into non-overlapping omni events."""
    _check_modality_list(visual, "visual")
    _check_modality_list(audio, "audio")
    for ev in (*visual, *audio):
        if ev.interval.end_s > duration_s + 1e-9:
            raise InvariantError(f"event {ev.id} extends past the video duration")

    spans = [
        _Span(ev.interval.start_s, ev.interval.end_s, [ev.id], []) for ev in visual
    ]
    unassigned = {ev.id: ev for ev in audio}
    left_extended = 0

    def fold_and_merge() -> None:
        changed = True
        while changed:
            changed = False
            for span in spans:
                for aid in list(unassigned):
                    a = unassigned[aid].interval
                    if span.start <= a.start_s < span.end:
                        span.audio_ids.append(aid)
                        del unassigned[aid]
                        if a.end_s > span.end:
                            span.end = a.end_s
                        changed = True
            spans.sort(key=lambda s: (s.start, s.end))
            i = 0
            while i < len(spans) - 1:
                cur, nxt = spans[i], spans[i + 1]
                if nxt.start < cur.end:
                    cur.end = max(cur.end, nxt.end)
                    cur.visual_ids.extend(nxt.visual_ids)
                    cur.audio_ids.extend(nxt.audio_ids)
                    del spans[i + 1]
                    changed = True
                else:
                    i += 1

    fold_and_merge()
    while unassigned:
        aid = min(unassigned, key=lambda k: unassigned[k].interval.start_s)
        a = unassigned.pop(aid).interval
        crossed = next((s for s in spans if a.start_s < s.start < a.end_s), None)
        if crossed is not None:
            crossed.start = a.start_s
            crossed.audio_ids.append(aid)
            if a.end_s > crossed.end:
                crossed.end = a.end_s
            left_extended += 1
        else:
            spans.append(_Span(a.start_s, a.end_s, [], [aid]))
        fold_and_merge()

    spans.sort(key=lambda s: (s.start, s.end))
    omni_events = []
    absorbed = 0
    for i, span in enumerate(spans):
        absorbed += max(0, len(span.visual_ids) - 1)
        tags: frozenset[str] = frozenset()
        if not span.audio_ids:
            tags = frozenset({"visual-only"})
        elif not span.visual_ids:
            tags = frozenset({"audio-only"})
        omni_events.append(
            OmniEvent(
                id=f"o{i:03d}",
                interval=TimeInterval(span.start, span.end),
                visual_event_ids=tuple(span.visual_ids),
                audio_event_ids=tuple(sorted(span.audio_ids)),
                correlation_tags=tags,
            )
        )

    coverage = fusion_coverage(omni_events, duration_s) if duration_s > 0 else 0.0
    return FusionReport(
        omni_events=tuple(omni_events),
        coverage_fraction=coverage,
        absorbed_visual_count=absorbed,
        left_extended_count=left_extended,
        duration_s=duration_s,
    )
