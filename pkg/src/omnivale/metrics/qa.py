"""LLM-judge accuracy for open-ended QA answers."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QaReport:
    accuracy: float
    n_judged: int
    n_excluded: int

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "n_judged": self.n_judged, "n_excluded": self.n_excluded}


def eval_qa_accuracy(
    predictions: Mapping[str, str],
    references: Mapping[str, tuple[str, str]],
    judge,
) -> QaReport:
    """Fraction of answers the judge accepts.

    ``references`` maps item id to (question, reference answer); the judge
    client returns {"verdict": "yes"|"no", ...}. Unparseable verdicts are
    excluded from the denominator and logged.
    """
    if not predictions:
        raise ValueError("no predictions to judge")
    judged = 0
    correct = 0
    excluded = 0
    for item_id in sorted(references):
        question, ref_answer = references[item_id]
        pred_answer = predictions.get(item_id, "")
        response = judge.judge(question=question, reference=ref_answer, candidate=pred_answer)
        verdict = str(response.get("verdict", "")).strip().lower()
        if verdict not in ("yes", "no"):
            excluded += 1
            logger.warning("judge verdict unparseable for item %s: %r", item_id, response)
            continue
        judged += 1
        if verdict == "yes":
            correct += 1
    accuracy = correct / judged if judged else 0.0
    return QaReport(accuracy=accuracy, n_judged=judged, n_excluded=excluded)
