"""Core data model: videos, modal/omni events, and the line-delimited manifest.

Timestamps are decimal seconds quantized to millisecond precision at
construction time; that quantization is what makes write -> read an exact
identity. All values are immutable after construction.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, replace
from typing import IO, Iterable, Optional, Sequence

SCHEMA_VERSION = 1
HEADER_KIND = "omnivale.manifest"

MODALITIES = ("visual", "audio")
SPLITS = ("train", "test", "unassigned")
FILTER_STATUSES = ("retained", "rejected")
REVIEW_STATES = ("unreviewed", "flagged", "corrected", "approved")

CORRELATION_TAGS = (
    "complementary",
    "synchronicity",
    "enhancement",
    "scene-aware",
    "causality",
    "temporal-association",
    "corrective",
    "visual-only",
    "audio-only",
)


class InvariantError(ValueError):
    """A value violates one of the documented data-model invariants."""


class ManifestFormatError(ValueError):
    """A serialized manifest could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def quantize_s(value: float) -> float:
    """Quantize a timestamp to the canonical millisecond grid."""
    return round(value * 1000.0) / 1000.0


@dataclass(frozen=True, order=True)
class TimeInterval:
    """Half-open [start_s, end_s) span in seconds."""

    start_s: float
    end_s: float

    def __post_init__(self):
        start = float(self.start_s)
        end = float(self.end_s)
        if not (math.isfinite(start) and math.isfinite(end)):
            raise InvariantError(f"interval endpoints must be finite, got [{start}, {end})")
        start = quantize_s(start)
        end = quantize_s(end)
        object.__setattr__(self, "start_s", start)
        object.__setattr__(self, "end_s", end)
        if start < 0:
            raise InvariantError(f"interval start must be non-negative, got {start}")
        if not start < end:
            raise InvariantError(f"interval must satisfy start < end, got [{start}, {end})")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def overlaps(self, other: "TimeInterval") -> bool:
        return self.start_s < other.end_s and other.start_s < self.end_s

    def contains(self, other: "TimeInterval") -> bool:
        return self.start_s <= other.start_s and other.end_s <= self.end_s


@dataclass(frozen=True)
class ModalEvent:
    id: str
    modality: str
    interval: TimeInterval
    caption: Optional[str] = None
    asr_text: Optional[str] = None

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise InvariantError(f"unknown modality {self.modality!r}")
        if self.asr_text is not None and self.modality != "audio":
            raise InvariantError("asr_text is only valid on audio events")


@dataclass(frozen=True)
class OmniEvent:
    id: str
    interval: TimeInterval
    visual_event_ids: tuple[str, ...] = ()
    audio_event_ids: tuple[str, ...] = ()
    omni_caption: Optional[str] = None
    correlation_tags: frozenset[str] = frozenset()
    has_temporal_dynamics: bool = False

    def __post_init__(self):
        object.__setattr__(self, "visual_event_ids", tuple(self.visual_event_ids))
        object.__setattr__(self, "audio_event_ids", tuple(self.audio_event_ids))
        object.__setattr__(self, "correlation_tags", frozenset(self.correlation_tags))
        bad = self.correlation_tags - set(CORRELATION_TAGS)
        if bad:
            raise InvariantError(f"unknown correlation tags: {sorted(bad)}")


def _check_sorted_disjoint(events: Sequence, what: str, video_id: str) -> None:
    for prev, cur in zip(events, events[1:]):
        if cur.interval.start_s < prev.interval.start_s:
            raise InvariantError(f"video {video_id}: {what} not sorted by start time")
        if prev.interval.end_s > cur.interval.start_s:
            raise InvariantError(
                f"video {video_id}: {what} overlap: "
                f"[{prev.interval.start_s}, {prev.interval.end_s}) and "
                f"[{cur.interval.start_s}, {cur.interval.end_s})"
            )


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    duration_s: float
    fps: float
    resolution: tuple[int, int]
    visual_events: tuple[ModalEvent, ...] = ()
    audio_events: tuple[ModalEvent, ...] = ()
    omni_events: tuple[OmniEvent, ...] = ()
    split: str = "unassigned"
    filter_status: str = "retained"
    rejection_reason: Optional[str] = None
    review_state: str = "unreviewed"

    def __post_init__(self):
        object.__setattr__(self, "duration_s", quantize_s(float(self.duration_s)))
        object.__setattr__(self, "resolution", (int(self.resolution[0]), int(self.resolution[1])))
        object.__setattr__(self, "visual_events", tuple(self.visual_events))
        object.__setattr__(self, "audio_events", tuple(self.audio_events))
        object.__setattr__(self, "omni_events", tuple(self.omni_events))
        self.validate()

    def validate(self) -> None:
        if self.duration_s <= 0:
            raise InvariantError(f"video {self.video_id}: duration must be positive")
        if self.split not in SPLITS:
            raise InvariantError(f"video {self.video_id}: unknown split {self.split!r}")
        if self.filter_status not in FILTER_STATUSES:
            raise InvariantError(f"video {self.video_id}: unknown filter_status {self.filter_status!r}")
        if self.filter_status == "rejected" and not self.rejection_reason:
            raise InvariantError(f"video {self.video_id}: rejected records need a rejection_reason")
        if self.review_state not in REVIEW_STATES:
            raise InvariantError(f"video {self.video_id}: unknown review_state {self.review_state!r}")

        seen_ids: set[str] = set()
        for ev in (*self.visual_events, *self.audio_events, *self.omni_events):
            if ev.id in seen_ids:
                raise InvariantError(f"video {self.video_id}: duplicate event id {ev.id!r}")
            seen_ids.add(ev.id)
            if ev.interval.end_s > self.duration_s:
                raise InvariantError(
                    f"video {self.video_id}: event {ev.id} ends at {ev.interval.end_s} "
                    f"past video duration {self.duration_s}"
                )

        for modality, events in (("visual", self.visual_events), ("audio", self.audio_events)):
            for ev in events:
                if ev.modality != modality:
                    raise InvariantError(f"video {self.video_id}: event {ev.id} in wrong modality list")
            _check_sorted_disjoint(events, f"{modality} events", self.video_id)
        _check_sorted_disjoint(self.omni_events, "omni events", self.video_id)

        visual_by_id = {ev.id: ev for ev in self.visual_events}
        audio_by_id = {ev.id: ev for ev in self.audio_events}
        for omni in self.omni_events:
            for vid in omni.visual_event_ids:
                if vid not in visual_by_id:
                    raise InvariantError(f"video {self.video_id}: omni {omni.id} references unknown visual event {vid!r}")
            for aid in omni.audio_event_ids:
                audio = audio_by_id.get(aid)
                if audio is None:
                    raise InvariantError(f"video {self.video_id}: omni {omni.id} references unknown audio event {aid!r}")
                if not omni.interval.contains(audio.interval):
                    raise InvariantError(
                        f"video {self.video_id}: omni {omni.id} truncates audio event {aid} "
                        f"([{audio.interval.start_s}, {audio.interval.end_s}) not within "
                        f"[{omni.interval.start_s}, {omni.interval.end_s}))"
                    )


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple[VideoRecord, ...] = ()
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen: set[str] = set()
        for rec in self.records:
            if rec.video_id in seen:
                raise InvariantError(f"duplicate video_id {rec.video_id!r}")
            seen.add(rec.video_id)

    def get(self, video_id: str) -> VideoRecord:
        for rec in self.records:
            if rec.video_id == video_id:
                return rec
        raise KeyError(video_id)

    def replace_record(self, record: VideoRecord) -> "DatasetManifest":
        records = tuple(record if r.video_id == record.video_id else r for r in self.records)
        return DatasetManifest(records=records, schema_version=self.schema_version)

    @property
    def retained(self) -> tuple[VideoRecord, ...]:
        return tuple(r for r in self.records if r.filter_status == "retained")


# ---------------------------------------------------------------------------
# Serialization (one header line + one JSON record per line)
# ---------------------------------------------------------------------------


def _interval_to_json(iv: TimeInterval) -> list[float]:
    return [iv.start_s, iv.end_s]


def _modal_to_json(ev: ModalEvent) -> dict:
    out: dict = {"id": ev.id, "modality": ev.modality, "interval": _interval_to_json(ev.interval)}
    if ev.caption is not None:
        out["caption"] = ev.caption
    if ev.asr_text is not None:
        out["asr_text"] = ev.asr_text
    return out


def _omni_to_json(ev: OmniEvent) -> dict:
    out: dict = {
        "id": ev.id,
        "interval": _interval_to_json(ev.interval),
        "visual_event_ids": list(ev.visual_event_ids),
        "audio_event_ids": list(ev.audio_event_ids),
        "correlation_tags": sorted(ev.correlation_tags),
        "has_temporal_dynamics": ev.has_temporal_dynamics,
    }
    if ev.omni_caption is not None:
        out["omni_caption"] = ev.omni_caption
    return out


def record_to_json(rec: VideoRecord) -> dict:
    out: dict = {
        "video_id": rec.video_id,
        "duration_s": rec.duration_s,
        "fps": rec.fps,
        "resolution": list(rec.resolution),
        "visual_events": [_modal_to_json(e) for e in rec.visual_events],
        "audio_events": [_modal_to_json(e) for e in rec.audio_events],
        "omni_events": [_omni_to_json(e) for e in rec.omni_events],
        "split": rec.split,
        "filter_status": rec.filter_status,
        "review_state": rec.review_state,
    }
    if rec.rejection_reason is not None:
        out["rejection_reason"] = rec.rejection_reason
    return out


def _interval_from_json(raw) -> TimeInterval:
    return TimeInterval(float(raw[0]), float(raw[1]))


def _modal_from_json(raw: dict) -> ModalEvent:
    return ModalEvent(
        id=raw["id"],
        modality=raw["modality"],
        interval=_interval_from_json(raw["interval"]),
        caption=raw.get("caption"),
        asr_text=raw.get("asr_text"),
    )


def _omni_from_json(raw: dict) -> OmniEvent:
    return OmniEvent(
        id=raw["id"],
        interval=_interval_from_json(raw["interval"]),
        visual_event_ids=tuple(raw.get("visual_event_ids", ())),
        audio_event_ids=tuple(raw.get("audio_event_ids", ())),
        omni_caption=raw.get("omni_caption"),
        correlation_tags=frozenset(raw.get("correlation_tags", ())),
        has_temporal_dynamics=bool(raw.get("has_temporal_dynamics", False)),
    )


def record_from_json(raw: dict) -> VideoRecord:
    return VideoRecord(
        video_id=raw["video_id"],
        duration_s=float(raw["duration_s"]),
        fps=float(raw["fps"]),
        resolution=(int(raw["resolution"][0]), int(raw["resolution"][1])),
        visual_events=tuple(_modal_from_json(e) for e in raw.get("visual_events", ())),
        audio_events=tuple(_modal_from_json(e) for e in raw.get("audio_events", ())),
        omni_events=tuple(_omni_from_json(e) for e in raw.get("omni_events", ())),
        split=raw.get("split", "unassigned"),
        filter_status=raw.get("filter_status", "retained"),
        rejection_reason=raw.get("rejection_reason"),
        review_state=raw.get("review_state", "unreviewed"),
    )


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_manifest(manifest: DatasetManifest, sink: IO[str], run_info: Optional[dict] = None) -> None:
    """Write one header line plus one record per line.

    Record invariants are re-validated before the first byte is emitted, so a
    bad manifest never produces a partial file. ``run_info`` (config hash,
    seed, version) lands in the header for reproducibility.
    """
    for rec in manifest.records:
        rec.validate()
    header = {"kind": HEADER_KIND, "schema_version": manifest.schema_version}
    if run_info:
        header["run"] = run_info
    sink.write(_dump_line(header) + "\n")
    for rec in manifest.records:
        sink.write(_dump_line(record_to_json(rec)) + "\n")


def read_manifest(source: IO[str]) -> DatasetManifest:
    """Parse a manifest, re-validating every invariant on load."""
    header_line = source.readline()
    if not header_line.strip():
        raise ManifestFormatError("empty input: missing manifest header", line=1)
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise ManifestFormatError(f"malformed header: {exc.msg}", line=1) from exc
    if not isinstance(header, dict) or header.get("kind") != HEADER_KIND:
        raise ManifestFormatError(f"not a manifest header (kind != {HEADER_KIND!r})", line=1)
    version = header.get("schema_version")
    if not isinstance(version, int) or version < 1:
        raise ManifestFormatError(f"invalid schema_version {version!r}", line=1)
    if version > SCHEMA_VERSION:
        raise ManifestFormatError(
            f"schema_version {version} is newer than supported version {SCHEMA_VERSION}", line=1
        )

    records = []
    for lineno, line in enumerate(source, start=2):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestFormatError(f"malformed record: {exc.msg}", line=lineno) from exc
        try:
            records.append(record_from_json(raw))
        except (InvariantError, KeyError, TypeError, IndexError) as exc:
            raise ManifestFormatError(f"invalid record: {exc}", line=lineno) from exc
    return DatasetManifest(records=tuple(records), schema_version=version)


def write_manifest_file(manifest: DatasetManifest, path, run_info: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_manifest(manifest, fh, run_info=run_info)


def read_manifest_file(path) -> DatasetManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return read_manifest(fh)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

DURATION_HISTOGRAM_EDGES_S = (0.0, 5.0, 10.0, 30.0, 60.0, 180.0, 600.0)


@dataclass(frozen=True)
class StatsReport:
    video_count: int
    total_hours: float
    mean_video_duration_s: float
    mean_events_per_video: float
    mean_event_duration_s: float
    coverage_fraction: float
    event_duration_histogram: tuple[tuple[str, int], ...]
    correlation_tag_histogram: tuple[tuple[str, int], ...]

    def to_dict(self) -> dict:
        return {
            "video_count": self.video_count,
            "total_hours": self.total_hours,
            "mean_video_duration_s": self.mean_video_duration_s,
            "mean_events_per_video": self.mean_events_per_video,
            "mean_event_duration_s": self.mean_event_duration_s,
            "coverage_fraction": self.coverage_fraction,
            "event_duration_histogram": dict(self.event_duration_histogram),
            "correlation_tag_histogram": dict(self.correlation_tag_histogram),
        }

    def format_table(self) -> str:
        lines = [
            f"videos                 {self.video_count}",
            f"total hours            {self.total_hours:.3f}",
            f"mean video duration    {self.mean_video_duration_s:.2f} s",
            f"mean events / video    {self.mean_events_per_video:.2f}",
            f"mean event duration    {self.mean_event_duration_s:.2f} s",
            f"omni coverage          {self.coverage_fraction:.4f}",
            "event duration histogram:",
        ]
        lines += [f"  {label:<12} {count}" for label, count in self.event_duration_histogram]
        lines.append("correlation tag histogram:")
        lines += [f"  {label:<20} {count}" for label, count in self.correlation_tag_histogram]
        return "\n".join(lines)


def _duration_bucket_label(idx: int) -> str:
    edges = DURATION_HISTOGRAM_EDGES_S
    if idx + 1 < len(edges):
        return f"[{edges[idx]:g},{edges[idx + 1]:g})s"
    return f">={edges[-1]:g}s"


def dataset_stats(manifest: DatasetManifest) -> StatsReport:
    """Corpus-level statistics over the retained records' omni events."""
    records = manifest.retained
    if not records:
        raise InvariantError("dataset_stats requires a manifest with retained videos")
    total_duration = sum(r.duration_s for r in records)
    n_events = sum(len(r.omni_events) for r in records)

    hist_counts = [0] * len(DURATION_HISTOGRAM_EDGES_S)
    tag_counts = {tag: 0 for tag in CORRELATION_TAGS}
    covered = 0.0
    event_duration_total = 0.0
    for rec in records:
        for ev in rec.omni_events:
            d = ev.interval.duration_s
            covered += d
            event_duration_total += d
            idx = 0
            for i, edge in enumerate(DURATION_HISTOGRAM_EDGES_S):
                if d >= edge:
                    idx = i
            hist_counts[idx] += 1
            for tag in ev.correlation_tags:
                tag_counts[tag] += 1

    coverage = covered / total_duration if total_duration > 0 else 0.0
    return StatsReport(
        video_count=len(records),
        total_hours=total_duration / 3600.0,
        mean_video_duration_s=total_duration / len(records),
        mean_events_per_video=n_events / len(records),
        mean_event_duration_s=event_duration_total / n_events if n_events else 0.0,
        coverage_fraction=coverage,
        event_duration_histogram=tuple(
            (_duration_bucket_label(i), c) for i, c in enumerate(hist_counts)
        ),
        correlation_tag_histogram=tuple(sorted(tag_counts.items())),
    )


# ---------------------------------------------------------------------------
# Split assignment
# ---------------------------------------------------------------------------


def _quartile_bucket(value: float, quartiles: tuple[float, float, float]) -> int:
    b = 0
    for q in quartiles:
        if value > q:
            b += 1
    return b


def _quartiles(values: list[float]) -> tuple[float, float, float]:
    ordered = sorted(values)
    n = len(ordered)

    def q(frac: float) -> float:
        pos = frac * (n - 1)
        lo = int(pos)
        hi = min(lo + 1, n - 1)
        w = pos - lo
        return ordered[lo] * (1 - w) + ordered[hi] * w

    return (q(0.25), q(0.5), q(0.75))


def assign_splits(manifest: DatasetManifest, test_fraction: float, seed: int) -> DatasetManifest:
    """Deterministic stratified train/test assignment.

    Stratification key is (duration quartile x omni-event-count quartile);
    within each stratum a seeded shuffle selects round(fraction * n) test
    videos, keeping per-split duration and event-count means close.
    """
    if not 0.0 < test_fraction < 1.0:
        raise InvariantError(f"test_fraction must be in (0, 1), got {test_fraction}")
    records = manifest.records
    n = len(records)
    if round(n * test_fraction) < 1 or n - round(n * test_fraction) < 1:
        raise InvariantError(
            f"cannot stratify {n} videos at test_fraction {test_fraction}: a split would be empty"
        )

    dur_q = _quartiles([r.duration_s for r in records])
    cnt_q = _quartiles([float(len(r.omni_events)) for r in records])

    strata: dict[tuple[int, int], list[VideoRecord]] = {}
    for rec in sorted(records, key=lambda r: r.video_id):
        key = (
            _quartile_bucket(rec.duration_s, dur_q),
            _quartile_bucket(float(len(rec.omni_events)), cnt_q),
        )
        strata.setdefault(key, []).append(rec)

    rng = random.Random(seed)
    assignment: dict[str, str] = {}
    for key in sorted(strata):
        bucket = strata[key]
        rng.shuffle(bucket)
        n_test = round(len(bucket) * test_fraction)
        for i, rec in enumerate(bucket):
            assignment[rec.video_id] = "test" if i < n_test else "train"

    new_records = tuple(replace(rec, split=assignment[rec.video_id]) for rec in records)
    return DatasetManifest(records=new_records, schema_version=manifest.schema_version)


def make_manifest(records: Iterable[VideoRecord]) -> DatasetManifest:
    return DatasetManifest(records=tuple(records))
