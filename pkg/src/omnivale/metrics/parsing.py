"""Parsing of free-form model output into scoreable predictions.

Grounding and dense-captioning answers arrive as "From X to Y, ..." text in
many small variants; a pattern set extracts the spans and captions, and
anything unextractable lands on the exclusion list so callers can drop it
from metric denominators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..manifest import TimeInterval

TASKS = ("tvg", "dvc", "sc")

# "From 3.0 to 9.5, ..." / "From 3 second to 9 seconds: ..." / "from 3.0s to 9.5s - ..."
_SPAN = re.compile(
    r"from\s+(\d+(?:\.\d+)?)\s*(?:seconds?|sec|s\b)?\s+to\s+(\d+(?:\.\d+)?)\s*(?:seconds?|sec|s\b)?",
    re.IGNORECASE,
)
_LEADING_SEPARATORS = re.compile(r"^[\s:,\-.]+")
_TRAILING_BOUNDARY = re.compile(r"[\s,;]+$")


@dataclass(frozen=True)
class PredictionItem:
    interval: Optional[TimeInterval]
    caption: Optional[str]


@dataclass(frozen=True)
class Prediction:
    task: str
    items: tuple[PredictionItem, ...]
    exclusions: tuple[str, ...]

    @property
    def first_interval(self) -> Optional[TimeInterval]:
        for item in self.items:
            if item.interval is not None:
                return item.interval
        return None


def _clean_caption(text: str) -> str:
    text = _LEADING_SEPARATORS.sub("", text)
    return _TRAILING_BOUNDARY.sub("", text).strip()


def _interval_or_none(start_text: str, end_text: str) -> Optional[TimeInterval]:
    start = float(start_text)
    end = float(end_text)
    if end <= start:
        return None
    return TimeInterval(start, end)


def parse_predictions(raw: str, task: str) -> Prediction:
    """Extract spans (and captions for dvc) from raw model output.

    Never raises on content: malformed spans and uncaptioned leftovers are
    recorded as exclusions instead.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    text = raw.strip()

    if task == "sc":
        # Caption-only output: spans, if any, are stripped from the caption.
        caption = _clean_caption(_SPAN.sub(" ", text))
        if not caption:
            return Prediction(task=task, items=(), exclusions=(raw,))
        return Prediction(task=task, items=(PredictionItem(None, caption),), exclusions=())

    matches = list(_SPAN.finditer(text))
    if not matches:
        return Prediction(task=task, items=(), exclusions=((raw,) if text or task == "tvg" else ()))

    if task == "tvg":
        items = []
        exclusions = []
        for m in matches[:1]:
            interval = _interval_or_none(m.group(1), m.group(2))
            if interval is None:
                exclusions.append(m.group(0))
            else:
                items.append(PredictionItem(interval, None))
        return Prediction(task=task, items=tuple(items), exclusions=tuple(exclusions))

    items = []
    exclusions = []
    for i, m in enumerate(matches):
        interval = _interval_or_none(m.group(1), m.group(2))
        seg_end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        caption = _clean_caption(text[m.end() : seg_end])
        if interval is None:
            exclusions.append(text[m.start() : seg_end].strip())
            continue
        items.append(PredictionItem(interval, caption or None))
    return Prediction(task=task, items=tuple(items), exclusions=tuple(exclusions))


FRAME_INDEX_SCALE = 100  # "0-99" rendering convention


def frame_index_to_seconds(index: float, duration_s: float, scale: int = FRAME_INDEX_SCALE) -> float:
    """Map a frame index in the 0..scale-1 convention onto seconds."""
    return index / (scale - 1) * duration_s


def seconds_to_frame_index(t_s: float, duration_s: float, scale: int = FRAME_INDEX_SCALE) -> int:
    index = round(t_s / duration_s * (scale - 1)) if duration_s > 0 else 0
    return max(0, min(scale - 1, index))


def convert_frame_spans(pred: Prediction, duration_s: float, scale: int = FRAME_INDEX_SCALE) -> Prediction:
    """Convert intervals parsed from frame-index output into seconds."""
    items = []
    for item in pred.items:
        if item.interval is None:
            items.append(item)
            continue
        items.append(
            PredictionItem(
                TimeInterval(
                    frame_index_to_seconds(item.interval.start_s, duration_s, scale),
                    frame_index_to_seconds(item.interval.end_s, duration_s, scale),
                ),
                item.caption,
            )
        )
    return Prediction(task=pred.task, items=tuple(items), exclusions=pred.exclusions)
