"""Caption orchestration: modality captioning, hallucination cleanup, and
relation-aware omni-caption integration through the pluggable clients.

All model access goes through the ClientSet interface, so swapping stubs
for live endpoints changes no logic here. Integration is sequential per
video because each omni caption feeds the next one's context.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol, Sequence

from . import prompts
from .clients import ClientError, ClientSet
from .manifest import CORRELATION_TAGS, DatasetManifest, ModalEvent, OmniEvent, VideoRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapgenConfig:
    max_chunk_s: float = 30.0
    prior_context_k: int = 3


class ClipSource(Protocol):
    """Feature access for the spans a captioning request covers."""

    def visual_features(self, start_s: float, end_s: float) -> list[float]: ...

    def audio_features(self, start_s: float, end_s: float) -> list[float]: ...

    def keyframe_features(self, t_s: float) -> list[float]: ...


@dataclass
class CaptionBundle:
    """Captions keyed by event id, accumulated across the orchestration."""

    video_captions: dict[str, str] = field(default_factory=dict)
    keyframe_captions: dict[str, str] = field(default_factory=dict)
    audio_captions: dict[str, str] = field(default_factory=dict)
    asr_texts: dict[str, str] = field(default_factory=dict)
    omni_captions: dict[str, str] = field(default_factory=dict)
    correlation_tags: dict[str, frozenset[str]] = field(default_factory=dict)
    temporal_dynamics: dict[str, bool] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)


class CaptionParseError(ValueError):
    """Integrator/judge response did not match the documented format."""


def chunk_event(duration_s: float, max_chunk_s: float) -> list[tuple[float, float]]:
    """Split an event into ceil(duration/max) equal chunks, each <= max."""
    n = max(1, int(math.ceil(duration_s / max_chunk_s - 1e-9)))
    width = duration_s / n
    return [(i * width, (i + 1) * width if i < n - 1 else duration_s) for i in range(n)]


def caption_visual_event(
    event: ModalEvent,
    clip_source: ClipSource,
    clients: ClientSet,
    cfg: CapgenConfig = CapgenConfig(),
) -> tuple[Optional[str], Optional[str]]:
    """Chunked video captions plus a keyframe caption at each chunk center."""
    start, end = event.interval.start_s, event.interval.end_s
    video_parts: list[str] = []
    keyframe_parts: list[str] = []
    try:
        for rel_start, rel_end in chunk_event(end - start, cfg.max_chunk_s):
            span = (start + rel_start, start + rel_end)
            video_resp = clients.video_captioner.request(
                {
                    "prompt": prompts.render("video_caption", start_s=span[0], end_s=span[1]),
                    "span": list(span),
                    "features": clip_source.visual_features(*span),
                }
            )
            video_parts.append(str(video_resp["text"]))
            center = (span[0] + span[1]) / 2.0
            keyframe_resp = clients.keyframe_captioner.request(
                {
                    "prompt": prompts.render("keyframe_caption", time_s=center),
                    "time_s": center,
                    "features": clip_source.keyframe_features(center),
                }
            )
            keyframe_parts.append(str(keyframe_resp["text"]))
    except ClientError as exc:
        logger.warning("visual captioning failed for event %s: %s", event.id, exc)
        return None, None
    return " ".join(video_parts), " ".join(keyframe_parts)


def caption_audio_event(
    event: ModalEvent, clip_source: ClipSource, clients: ClientSet
) -> tuple[Optional[str], Optional[str]]:
    """General audio caption plus ASR text (empty when no speech reported)."""
    span = (event.interval.start_s, event.interval.end_s)
    features = clip_source.audio_features(*span)
    try:
        caption_resp = clients.audio_captioner.request(
            {
                "prompt": prompts.render("audio_caption", start_s=span[0], end_s=span[1]),
                "span": list(span),
                "features": features,
            }
        )
        asr_resp = clients.asr.request({"span": list(span), "features": features})
    except ClientError as exc:
        logger.warning("audio captioning failed for event %s: %s", event.id, exc)
        return None, None
    return str(caption_resp["text"]), str(asr_resp.get("text", ""))


_QUOTED = re.compile(r'(["“‘\']).*?(\1|”|’)')
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_WS = re.compile(r"\s{2,}")


def cleanup_audio_caption(raw_caption: str, asr_text: str = "") -> str:
    """Strip hallucination patterns from an audio caption.

    Quoted speech becomes the word "something" (the ASR text is the
    authoritative transcript and lives in asr_text), and consecutive
    duplicate sentences collapse to one. Idempotent.
    """
    text = _QUOTED.sub("something", raw_caption)
    text = _WS.sub(" ", text).strip()
    sentences = [s.strip() for s in _SENTENCE_SPLIT.split(text) if s.strip()]
    deduped: list[str] = []
    for sentence in sentences:
        if deduped and deduped[-1].lower() == sentence.lower():
            continue
        deduped.append(sentence)
    return " ".join(deduped)


def _format_boundary_block(events: Sequence[ModalEvent], captions: dict[str, str], extra: Optional[dict[str, str]] = None) -> str:
    lines = []
    for ev in events:
        caption = captions.get(ev.id) or "(caption missing)"
        line = f"- {ev.interval.start_s:.3f}s to {ev.interval.end_s:.3f}s: {caption}"
        if extra and extra.get(ev.id):
            line += f" | {extra[ev.id]}"
        lines.append(line)
    return "\n".join(lines) if lines else "(none)"


def _normalize_tags(raw) -> frozenset[str]:
    if isinstance(raw, str):
        parts = [p.strip() for p in raw.split(",")]
    elif isinstance(raw, (list, tuple)):
        parts = [str(p).strip() for p in raw]
    else:
        raise CaptionParseError(f"correlation tags have unexpected type {type(raw).__name__}")
    tags = frozenset(p for p in parts if p)
    unknown = tags - set(CORRELATION_TAGS)
    if unknown:
        raise CaptionParseError(f"unknown correlation tags {sorted(unknown)}")
    return tags


def _parse_structured_response(resp: dict, required: tuple[str, ...]) -> dict:
    data = resp
    if not all(key in data for key in required) and "text" in resp:
        try:
            data = json.loads(resp["text"])
        except (TypeError, ValueError) as exc:
            raise CaptionParseError(f"response text is not JSON: {resp['text']!r}") from exc
    if not isinstance(data, dict) or not all(key in data for key in required):
        raise CaptionParseError(f"response missing keys {required}: {data!r}")
    return data


def integrate_omni_caption(
    omni_event: OmniEvent,
    bundle: CaptionBundle,
    visual_events: Sequence[ModalEvent],
    audio_events: Sequence[ModalEvent],
    prior_omni_captions: Sequence[str],
    clients: ClientSet,
    cfg: CapgenConfig = CapgenConfig(),
) -> tuple[Optional[str], frozenset[str], bool]:
    """One integrator call (retried once with a repair prompt on bad format).

    Returns (caption, tags, has_temporal_dynamics); caption None on failure.
    """
    vis = [ev for ev in visual_events if ev.id in omni_event.visual_event_ids]
    aud = [ev for ev in audio_events if ev.id in omni_event.audio_event_ids]
    asr_lines = [
        f"- {ev.interval.start_s:.3f}s to {ev.interval.end_s:.3f}s: {bundle.asr_texts[ev.id]}"
        for ev in aud
        if bundle.asr_texts.get(ev.id)
    ]
    priors = list(prior_omni_captions)[-cfg.prior_context_k :]
    unimodal = None
    if not aud and vis:
        unimodal = "visual-only"
    elif not vis and aud:
        unimodal = "audio-only"

    prompt = prompts.render(
        "omni_integration",
        start_s=omni_event.interval.start_s,
        end_s=omni_event.interval.end_s,
        visual_block=_format_boundary_block(vis, bundle.video_captions, bundle.keyframe_captions),
        audio_block=_format_boundary_block(aud, bundle.audio_captions),
        asr_block="\n".join(asr_lines) if asr_lines else "(no speech)",
        prior_block="\n".join(f"- {c}" for c in priors) if priors else "(none)",
        tag_vocabulary=", ".join(CORRELATION_TAGS),
    )
    constituent_captions = [
        bundle.video_captions.get(ev.id, "") for ev in vis
    ] + [bundle.audio_captions.get(ev.id, "") for ev in aud]
    payload = {
        "prompt": prompt,
        "constituent_captions": constituent_captions,
        "prior_captions": priors,
        "span": [omni_event.interval.start_s, omni_event.interval.end_s],
    }
    if unimodal:
        payload["unimodal"] = unimodal

    for attempt in range(2):
        try:
            resp = clients.integrator_llm.request(payload)
            data = _parse_structured_response(
                resp, ("caption", "correlation_tags", "has_temporal_dynamics")
            )
            tags = _normalize_tags(data["correlation_tags"])
            return str(data["caption"]), tags, bool(data["has_temporal_dynamics"])
        except CaptionParseError as exc:
            if attempt == 0:
                payload = {**payload, "prompt": prompts.render("repair", original_prompt=prompt)}
                continue
            logger.warning("integration failed for omni %s: %s", omni_event.id, exc)
        except ClientError as exc:
            logger.warning("integrator client failed for omni %s: %s", omni_event.id, exc)
            break
    return None, frozenset(), False


def caption_record(
    record: VideoRecord,
    clip_source: ClipSource,
    clients: ClientSet,
    cfg: CapgenConfig = CapgenConfig(),
) -> tuple[VideoRecord, CaptionBundle]:
    """Caption every modal event, clean audio captions, then integrate omni
    captions in temporal order with prior-event context."""
    bundle = CaptionBundle()

    new_visual = []
    for ev in record.visual_events:
        video_caption, keyframe_caption = caption_visual_event(ev, clip_source, clients, cfg)
        if video_caption is None:
            bundle.failures.append(ev.id)
            new_visual.append(ev)
            continue
        bundle.video_captions[ev.id] = video_caption
        bundle.keyframe_captions[ev.id] = keyframe_caption or ""
        new_visual.append(replace(ev, caption=video_caption))

    new_audio = []
    for ev in record.audio_events:
        raw_caption, asr_text = caption_audio_event(ev, clip_source, clients)
        if raw_caption is None:
            bundle.failures.append(ev.id)
            new_audio.append(ev)
            continue
        cleaned = cleanup_audio_caption(raw_caption, asr_text or "")
        bundle.audio_captions[ev.id] = cleaned
        bundle.asr_texts[ev.id] = asr_text or ""
        new_audio.append(replace(ev, caption=cleaned, asr_text=asr_text or ""))

    prior_captions: list[str] = []
    new_omni = []
    for omni in record.omni_events:
        caption, tags, dynamics = integrate_omni_caption(
            omni, bundle, new_visual, new_audio, prior_captions, clients, cfg
        )
        if caption is None:
            bundle.failures.append(omni.id)
            new_omni.append(omni)
            continue
        bundle.omni_captions[omni.id] = caption
        bundle.correlation_tags[omni.id] = tags
        bundle.temporal_dynamics[omni.id] = dynamics
        prior_captions.append(caption)
        new_omni.append(
            replace(
                omni,
                omni_caption=caption,
                correlation_tags=omni.correlation_tags | tags,
                has_temporal_dynamics=dynamics,
            )
        )

    return (
        replace(record, visual_events=tuple(new_visual), audio_events=tuple(new_audio), omni_events=tuple(new_omni)),
        bundle,
    )


def tag_correlations(
    manifest: DatasetManifest, judge
) -> tuple[DatasetManifest, dict[str, int], float]:
    """Classify AVC tags per captioned omni event via the judge client.

    Returns the updated manifest, the tag histogram over classified events,
    and the fraction flagged as temporally dynamic. Per-event failures are
    logged and excluded from both denominators.
    """
    histogram = {tag: 0 for tag in CORRELATION_TAGS}
    classified = 0
    dynamic = 0
    new_records = []
    for rec in manifest.records:
        new_events = []
        for omni in rec.omni_events:
            if not omni.omni_caption:
                logger.warning("skipping omni %s/%s: no caption", rec.video_id, omni.id)
                new_events.append(omni)
                continue
            try:
                resp = judge.request(
                    {
                        "kind": "avc_classify",
                        "caption": omni.omni_caption,
                        "prompt": prompts.render(
                            "avc_classify",
                            caption=omni.omni_caption,
                            tag_vocabulary=", ".join(CORRELATION_TAGS),
                        ),
                    }
                )
                data = _parse_structured_response(resp, ("tags",))
                tags = _normalize_tags(data["tags"])
                dynamics = bool(data.get("has_temporal_dynamics", False))
            except (ClientError, CaptionParseError) as exc:
                logger.warning("classification failed for %s/%s: %s", rec.video_id, omni.id, exc)
                new_events.append(omni)
                continue
            classified += 1
            dynamic += int(dynamics)
            for tag in tags:
                histogram[tag] += 1
            new_events.append(
                replace(omni, correlation_tags=tags | (omni.correlation_tags & {"visual-only", "audio-only"}), has_temporal_dynamics=dynamics)
            )
        new_records.append(replace(rec, omni_events=tuple(new_events)))
    updated = DatasetManifest(records=tuple(new_records), schema_version=manifest.schema_version)
    dynamics_fraction = dynamic / classified if classified else 0.0
    return updated, histogram, dynamics_fraction
