"""Training dialogues from annotations: boundary-perception templates and
LLM-written instruction data.

Timestamps render as decimal seconds by default so that re-parsing an
assistant turn recovers the exact interval; the 0-99 frame-index mode
exists for parity with frame-token training recipes and quantizes.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from typing import IO, Optional, Sequence

from . import prompts
from .clients import ClientError, ModelClient
from .manifest import DatasetManifest, InvariantError, OmniEvent, VideoRecord
from .metrics.parsing import seconds_to_frame_index

logger = logging.getLogger(__name__)

KINDS = ("single_turn_dvc", "multi_turn", "instruction")

DVC_QUERY = (
    "Could you please detail the events that took place during different time "
    "segments in the video? List the events in the format: From x to y, event."
)
TVG_QUERY = (
    "During which frames does <event> occur in the video? "
    "Give the timestamps in the format: From x to y."
)
SC_QUERY = "Could you tell me what happened from <start> to <end> in the video?"


@dataclass(frozen=True)
class DialogueTurn:
    role: str
    text: str

    def __post_init__(self):
        if self.role not in ("user", "assistant"):
            raise InvariantError(f"unknown dialogue role {self.role!r}")


@dataclass(frozen=True)
class Dialogue:
    video_id: str
    kind: str
    turns: tuple[DialogueTurn, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvariantError(f"unknown dialogue kind {self.kind!r}")
        turns = tuple(self.turns)
        object.__setattr__(self, "turns", turns)
        if len(turns) < 2:
            raise InvariantError("dialogues need at least 2 turns")
        for i, turn in enumerate(turns):
            expected = "user" if i % 2 == 0 else "assistant"
            if turn.role != expected:
                raise InvariantError(
                    f"turn {i} must be {expected}, got {turn.role} (roles must alternate from user)"
                )


@dataclass(frozen=True)
class DialogueConfig:
    timestamp_mode: str = "seconds"  # or "frames"
    single_turn_fraction: float = 0.2
    tvg_probability: float = 0.5

    def __post_init__(self):
        if self.timestamp_mode not in ("seconds", "frames"):
            raise InvariantError(f"unknown timestamp mode {self.timestamp_mode!r}")


def render_timestamp(t_s: float, duration_s: float, cfg: DialogueConfig) -> str:
    if cfg.timestamp_mode == "frames":
        return f"{seconds_to_frame_index(t_s, duration_s):02d}"
    # repr is the shortest exact decimal, so parsing recovers the float bit-for-bit
    return str(int(t_s)) if t_s == int(t_s) else repr(t_s)


def _span_text(event: OmniEvent, duration_s: float, cfg: DialogueConfig) -> tuple[str, str]:
    return (
        render_timestamp(event.interval.start_s, duration_s, cfg),
        render_timestamp(event.interval.end_s, duration_s, cfg),
    )


def _captioned_events(record: VideoRecord) -> list[OmniEvent]:
    return [ev for ev in record.omni_events if ev.omni_caption]


def gen_boundary_dialogues(
    manifest: DatasetManifest, seed: int, cfg: DialogueConfig = DialogueConfig()
) -> list[Dialogue]:
    """One dialogue set per captioned video.

    An exact single_turn_fraction share of videos (seeded sample) gets a
    single-turn dense-captioning dialogue; the rest get multi-turn dialogues
    where each event independently lands on grounding or segment captioning.
    """
    eligible = []
    for rec in manifest.retained:
        if _captioned_events(rec):
            eligible.append(rec)
        else:
            logger.warning("skipping video %s: no captioned omni events", rec.video_id)
    eligible.sort(key=lambda r: r.video_id)
    if not eligible:
        return []

    rng = random.Random(seed)
    n_single = round(len(eligible) * cfg.single_turn_fraction)
    single_ids = set(rng.sample([r.video_id for r in eligible], n_single))

    dialogues = []
    for rec in eligible:
        events = _captioned_events(rec)
        if rec.video_id in single_ids:
            lines = []
            for ev in events:
                start, end = _span_text(ev, rec.duration_s, cfg)
                caption = ev.omni_caption.rstrip(".") + "."
                lines.append(f"From {start} to {end}, {caption}")
            turns = (
                DialogueTurn("user", DVC_QUERY),
                DialogueTurn("assistant", " ".join(lines)),
            )
            dialogues.append(Dialogue(video_id=rec.video_id, kind="single_turn_dvc", turns=turns))
        else:
            turns = []
            for ev in events:
                start, end = _span_text(ev, rec.duration_s, cfg)
                if rng.random() < cfg.tvg_probability:
                    turns.append(DialogueTurn("user", TVG_QUERY.replace("<event>", ev.omni_caption)))
                    turns.append(DialogueTurn("assistant", f"From {start} to {end}."))
                else:
                    query = SC_QUERY.replace("<start>", start).replace("<end>", end)
                    turns.append(DialogueTurn("user", query))
                    turns.append(DialogueTurn("assistant", ev.omni_caption))
            dialogues.append(Dialogue(video_id=rec.video_id, kind="multi_turn", turns=tuple(turns)))
    return dialogues


def _parse_instruction_response(video_id: str, resp: dict) -> list[Dialogue]:
    data = resp
    if "dialogues" not in data and "text" in data:
        data = json.loads(resp["text"])
    if not isinstance(data, dict) or "dialogues" not in data:
        raise ValueError(f"no dialogues in response: {resp!r}")
    out = []
    for raw in data["dialogues"]:
        turns = tuple(DialogueTurn(t["role"], str(t["text"])) for t in raw["turns"])
        out.append(Dialogue(video_id=video_id, kind="instruction", turns=turns))
    return out


def gen_instruction_dialogues(
    manifest: DatasetManifest, client: ModelClient
) -> list[Dialogue]:
    """Free-form QA dialogues written by the LLM from each video's annotations."""
    dialogues = []
    for rec in sorted(manifest.retained, key=lambda r: r.video_id):
        events = _captioned_events(rec)
        if not events:
            logger.warning("skipping video %s: no captioned omni events", rec.video_id)
            continue
        events_block = "\n".join(
            f"- {ev.interval.start_s:g} to {ev.interval.end_s:g}: {ev.omni_caption}" for ev in events
        )
        payload = {
            "prompt": prompts.render(
                "instruction_gen", duration_s=rec.duration_s, events_block=events_block
            ),
            "events": [
                {"start": ev.interval.start_s, "end": ev.interval.end_s, "caption": ev.omni_caption}
                for ev in events
            ],
        }
        parsed: Optional[list[Dialogue]] = None
        for _ in range(2):
            try:
                parsed = _parse_instruction_response(rec.video_id, client.request(payload))
                break
            except (ValueError, KeyError, TypeError, InvariantError) as exc:
                logger.warning("instruction parse failed for %s: %s", rec.video_id, exc)
            except ClientError as exc:
                logger.warning("instruction client failed for %s: %s", rec.video_id, exc)
                break
        if parsed:
            dialogues.extend(parsed)
        else:
            logger.warning("skipping video %s after retry", rec.video_id)
    return dialogues


# ---------------------------------------------------------------------------
# Serialization: conversational JSONL
# ---------------------------------------------------------------------------

_ROLE_TO_WIRE = {"user": "human", "assistant": "gpt"}
_WIRE_TO_ROLE = {v: k for k, v in _ROLE_TO_WIRE.items()}


def write_dialogues(dialogues: Sequence[Dialogue], sink: IO[str]) -> None:
    for d in dialogues:
        record = {
            "video_id": d.video_id,
            "kind": d.kind,
            "conversations": [
                {"from": _ROLE_TO_WIRE[t.role], "value": t.text} for t in d.turns
            ],
        }
        sink.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")


def read_dialogues(source: IO[str]) -> list[Dialogue]:
    out = []
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            turns = tuple(
                DialogueTurn(_WIRE_TO_ROLE[c["from"]], c["value"]) for c in raw["conversations"]
            )
            out.append(Dialogue(video_id=raw["video_id"], kind=raw["kind"], turns=turns))
        except (ValueError, KeyError, InvariantError) as exc:
            raise ValueError(f"line {lineno}: invalid dialogue record: {exc}") from exc
    return out
