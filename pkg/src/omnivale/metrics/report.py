"""Combined evaluation report across the three tasks plus QA accuracy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .dvc import DvcReport
from .grounding import TvgReport
from .qa import QaReport
from .text import CaptionScores


@dataclass(frozen=True)
class EvalReport:
    tvg: Optional[TvgReport] = None
    dvc: Optional[DvcReport] = None
    sc: Optional[CaptionScores] = None
    qa: Optional[QaReport] = None

    def __post_init__(self):
        for name, value in self.bounded_values():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} out of [0, 1]: {value}")
        for name, value in self.cider_values():
            if not 0.0 <= value <= 10.0:
                raise ValueError(f"{name} out of [0, 10]: {value}")

    def bounded_values(self) -> list[tuple[str, float]]:
        out = []
        if self.tvg is not None:
            out += [(f"tvg.r@{t:g}", r) for t, r in self.tvg.recalls]
            out.append(("tvg.miou", self.tvg.miou))
        if self.dvc is not None:
            out += [("dvc.soda_c", self.dvc.soda_c), ("dvc.meteor", self.dvc.meteor)]
        if self.sc is not None:
            out += [
                ("sc.bleu4", self.sc.bleu4),
                ("sc.rouge_l", self.sc.rouge_l),
                ("sc.meteor", self.sc.meteor),
            ]
        if self.qa is not None:
            out.append(("qa.accuracy", self.qa.accuracy))
        return out

    def cider_values(self) -> list[tuple[str, float]]:
        out = []
        if self.dvc is not None:
            out.append(("dvc.cider", self.dvc.cider))
        if self.sc is not None:
            out.append(("sc.cider", self.sc.cider))
        return out

    def to_dict(self) -> dict:
        return {
            "tvg": self.tvg.to_dict() if self.tvg else None,
            "dvc": self.dvc.to_dict() if self.dvc else None,
            "sc": self.sc.to_dict() if self.sc else None,
            "qa": self.qa.to_dict() if self.qa else None,
        }
