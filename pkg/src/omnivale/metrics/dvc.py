"""Dense video captioning evaluation: story-level SODA plus matched-pair scores."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from ..manifest import TimeInterval
from .grounding import iou
from .text import CiderD, meteor, tokenize


@dataclass(frozen=True)
class CaptionedEvent:
    interval: TimeInterval
    caption: str


def _default_pair_scorer(candidate: str, reference: str) -> float:
    return meteor(tokenize(candidate), [tokenize(reference)])


def soda_f_score(
    preds: Sequence[CaptionedEvent],
    refs: Sequence[CaptionedEvent],
    pair_scorer: Callable[[str, str], float] = _default_pair_scorer,
) -> float:
    """Story-level F-measure for one video.

    Dynamic programming finds the one-to-one temporally-ordered matching
    that maximizes summed IoU-weighted caption score; precision and recall
    normalize that total by prediction and reference counts.
    """
    if not preds or not refs:
        return 0.0
    n, m = len(preds), len(refs)
    score = [[0.0] * m for _ in range(n)]
    for i, p in enumerate(preds):
        for j, r in enumerate(refs):
            overlap = iou(p.interval, r.interval)
            if overlap > 0.0:
                score[i][j] = overlap * pair_scorer(p.caption, r.caption)

    dp = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dp[i][j] = max(
                dp[i - 1][j],
                dp[i][j - 1],
                dp[i - 1][j - 1] + score[i - 1][j - 1],
            )
    total = dp[n][m]
    precision = total / n
    recall = total / m
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def greedy_iou_matching(
    preds: Sequence[CaptionedEvent], refs: Sequence[CaptionedEvent]
) -> list[tuple[int, Optional[int]]]:
    """Best-IoU one-to-one matching; predictions with no positive-IoU
    reference stay unmatched. Ties resolve by (pred, ref) index order."""
    pairs = sorted(
        (
            (-iou(p.interval, r.interval), i, j)
            for i, p in enumerate(preds)
            for j, r in enumerate(refs)
        ),
    )
    matched_p: dict[int, int] = {}
    used_r: set[int] = set()
    for neg, i, j in pairs:
        if neg >= 0.0:
            break
        if i in matched_p or j in used_r:
            continue
        matched_p[i] = j
        used_r.add(j)
    return [(i, matched_p.get(i)) for i in range(len(preds))]


@dataclass(frozen=True)
class DvcReport:
    soda_c: float
    cider: float
    meteor: float
    n_videos: int

    def to_dict(self) -> dict:
        return {"soda_c": self.soda_c, "cider": self.cider, "meteor": self.meteor, "n_videos": self.n_videos}


def eval_dvc(
    preds_by_video: Mapping[str, Sequence[CaptionedEvent]],
    refs_by_video: Mapping[str, Sequence[CaptionedEvent]],
    pair_scorer: Callable[[str, str], float] = _default_pair_scorer,
) -> DvcReport:
    """SODA_c averaged over videos; CIDEr/METEOR over greedy IoU-matched pairs.

    Unmatched predictions count as zero-score items (scored against nothing),
    so over-generation is penalized in the caption means.
    """
    unknown = set(preds_by_video) - set(refs_by_video)
    if unknown:
        raise ValueError(f"predictions reference unknown videos: {sorted(unknown)}")

    soda_scores = []
    matched_items: list[tuple[str, Optional[str]]] = []
    for video_id, refs in refs_by_video.items():
        preds = list(preds_by_video.get(video_id, ()))
        soda_scores.append(soda_f_score(preds, list(refs), pair_scorer))
        for i, j in greedy_iou_matching(preds, list(refs)):
            matched_items.append((preds[i].caption, refs[j].caption if j is not None else None))

    cider_corpus = [
        (tokenize(cand), [tokenize(ref)])
        for cand, ref in matched_items
        if ref is not None
    ]
    _, cider_scores = CiderD().compute(cider_corpus)

    cider_values = []
    meteor_values = []
    idx = 0
    for cand, ref in matched_items:
        if ref is None:
            cider_values.append(0.0)
            meteor_values.append(0.0)
        else:
            cider_values.append(cider_scores[idx])
            meteor_values.append(meteor(tokenize(cand), [tokenize(ref)]))
            idx += 1

    def mean(values: list[float]) -> float:
        return sum(values) / len(values) if values else 0.0

    return DvcReport(
        soda_c=mean(soda_scores),
        cider=mean(cider_values),
        meteor=mean(meteor_values),
        n_videos=len(refs_by_video),
    )
