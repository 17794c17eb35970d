"""Temporal grounding metrics: interval IoU and Recall@1 at IoU thresholds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ..manifest import TimeInterval

DEFAULT_IOU_THRESHOLDS = (0.3, 0.5, 0.7)


def iou(a: TimeInterval, b: TimeInterval) -> float:
    """Intersection over union of two half-open intervals; 0 when disjoint."""
    inter = min(a.end_s, b.end_s) - max(a.start_s, b.start_s)
    if inter <= 0:
        return 0.0
    union = max(a.end_s, b.end_s) - min(a.start_s, b.start_s)
    return inter / union


@dataclass(frozen=True)
class TvgReport:
    recalls: tuple[tuple[float, float], ...]  # (threshold, recall@1)
    miou: float
    n_items: int

    def to_dict(self) -> dict:
        out = {f"r@{t:g}": r for t, r in self.recalls}
        out["miou"] = self.miou
        out["n_items"] = self.n_items
        return out


def eval_tvg(
    predictions: Sequence[tuple[object, Optional[TimeInterval]]] | Mapping[object, Optional[TimeInterval]],
    references: Mapping[object, TimeInterval],
    thresholds: Sequence[float] = DEFAULT_IOU_THRESHOLDS,
) -> TvgReport:
    """Recall@1 at each IoU threshold plus mean IoU.

    Every reference is scored; a missing prediction contributes IoU 0.
    Duplicate prediction keys are an error.
    """
    if isinstance(predictions, Mapping):
        pred_pairs = list(predictions.items())
    else:
        pred_pairs = list(predictions)
    pred_map: dict = {}
    for key, interval in pred_pairs:
        if key in pred_map:
            raise ValueError(f"duplicate prediction key {key!r}")
        pred_map[key] = interval
    if not references:
        raise ValueError("no references to evaluate")

    ious = []
    for key, ref_interval in references.items():
        pred = pred_map.get(key)
        ious.append(iou(pred, ref_interval) if pred is not None else 0.0)

    n = len(ious)
    recalls = tuple((t, sum(1 for v in ious if v >= t) / n) for t in thresholds)
    return TvgReport(recalls=recalls, miou=sum(ious) / n, n_items=n)
