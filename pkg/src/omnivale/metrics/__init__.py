"""Evaluation metrics: grounding recalls, caption scores, SODA, MRSD, QA accuracy."""

from .coherence import MrsdRow, StageBoundaries, event_mrsd, format_mrsd_table, mrsd, mrsd_report
from .dvc import CaptionedEvent, DvcReport, eval_dvc, greedy_iou_matching, soda_f_score
from .grounding import DEFAULT_IOU_THRESHOLDS, TvgReport, eval_tvg, iou
from .parsing import (
    Prediction,
    PredictionItem,
    convert_frame_spans,
    frame_index_to_seconds,
    parse_predictions,
    seconds_to_frame_index,
)
from .qa import QaReport, eval_qa_accuracy
from .report import EvalReport
from .text import (
    CaptionScores,
    CiderD,
    bleu4,
    caption_scores,
    meteor,
    rouge_l,
    score_caption_corpus,
    tokenize,
)

__all__ = [
    "CaptionScores",
    "CaptionedEvent",
    "CiderD",
    "DEFAULT_IOU_THRESHOLDS",
    "DvcReport",
    "EvalReport",
    "MrsdRow",
    "Prediction",
    "PredictionItem",
    "QaReport",
    "StageBoundaries",
    "TvgReport",
    "bleu4",
    "caption_scores",
    "convert_frame_spans",
    "eval_dvc",
    "eval_qa_accuracy",
    "eval_tvg",
    "event_mrsd",
    "format_mrsd_table",
    "frame_index_to_seconds",
    "greedy_iou_matching",
    "iou",
    "meteor",
    "mrsd",
    "mrsd_report",
    "parse_predictions",
    "rouge_l",
    "score_caption_corpus",
    "seconds_to_frame_index",
    "soda_f_score",
    "tokenize",
]
