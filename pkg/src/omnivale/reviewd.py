"""HTTP review service: flag, correct, and approve omni events.

Mutations are optimistic-concurrency guarded by per-event revisions,
serialized through one lock, and appended to a JSONL audit log whose replay
reproduces the exact review state. Corrections re-validate every manifest
invariant before they land, so the service can never export a manifest that
read_manifest would reject.
"""

from __future__ import annotations

import base64
import binascii
import io
import json
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .manifest import (
    DatasetManifest,
    InvariantError,
    TimeInterval,
    VideoRecord,
    record_to_json,
    write_manifest,
)

EVENT_STATES = ("pending", "flagged", "corrected", "approved")
_TRANSITIONS = {
    ("pending", "flagged"),
    ("pending", "approved"),
    ("flagged", "corrected"),
    ("corrected", "approved"),
}


@dataclass
class ReviewItem:
    video_id: str
    event_id: str
    state: str = "pending"
    flag_reason: Optional[str] = None
    revision: int = 0


def _event_key(video_id: str, event_id: str) -> str:
    return f"{video_id}:{event_id}"


def _split_key(key: str) -> tuple[str, str]:
    video_id, _, event_id = key.partition(":")
    if not video_id or not event_id:
        raise KeyError(key)
    return video_id, event_id


def _invariant_name(message: str) -> str:
    if "truncates" in message:
        return "no-truncation"
    if "overlap" in message:
        return "non-overlap"
    if "sorted" in message:
        return "sorted-order"
    if "start < end" in message:
        return "valid-interval"
    if "duration" in message:
        return "within-duration"
    return "manifest-invariant"


class ConflictError(Exception):
    pass


class ValidationRejection(Exception):
    def __init__(self, message: str, invariant: str):
        super().__init__(message)
        self.invariant = invariant


class ReviewStore:
    """Review state over a manifest: append-only audit log + periodic snapshots."""

    def __init__(
        self,
        manifest: DatasetManifest,
        audit_log_path: Optional[str] = None,
        snapshot_path: Optional[str] = None,
        snapshot_every: int = 50,
    ):
        self._manifest = manifest
        self._items: dict[str, ReviewItem] = {}
        self._lock = threading.Lock()
        self._audit_path = Path(audit_log_path) if audit_log_path else None
        self._snapshot_path = Path(snapshot_path) if snapshot_path else None
        self._snapshot_every = max(1, snapshot_every)
        self._seq = 0
        for rec in manifest.records:
            for ev in rec.omni_events:
                key = _event_key(rec.video_id, ev.id)
                self._items[key] = ReviewItem(video_id=rec.video_id, event_id=ev.id)

    # -- queries ------------------------------------------------------------

    @property
    def manifest(self) -> DatasetManifest:
        with self._lock:
            return self._manifest

    def video_state(self, rec: VideoRecord) -> str:
        states = [
            self._items[_event_key(rec.video_id, ev.id)].state for ev in rec.omni_events
        ]
        if not states:
            return "unreviewed"
        if any(s == "flagged" for s in states):
            return "flagged"
        if all(s == "approved" for s in states):
            return "approved"
        if any(s == "corrected" for s in states):
            return "corrected"
        return "unreviewed"

    def list_videos(self, state: Optional[str], page_token: Optional[str], page_size: int) -> dict:
        with self._lock:
            records = sorted(self._manifest.records, key=lambda r: r.video_id)
            if state:
                records = [r for r in records if self.video_state(r) == state]
            offset = 0
            if page_token:
                try:
                    decoded = json.loads(base64.urlsafe_b64decode(page_token.encode()).decode())
                    offset = int(decoded["offset"])
                    if offset < 0:
                        raise ValueError
                except (ValueError, KeyError, binascii.Error, UnicodeDecodeError) as exc:
                    raise HTTPException(status_code=400, detail="invalid page token") from exc
            page = records[offset : offset + page_size]
            next_token = None
            if offset + page_size < len(records):
                next_token = base64.urlsafe_b64encode(
                    json.dumps({"offset": offset + page_size}).encode()
                ).decode()
            return {
                "videos": [
                    {
                        "video_id": r.video_id,
                        "duration_s": r.duration_s,
                        "n_omni_events": len(r.omni_events),
                        "review_state": self.video_state(r),
                        "filter_status": r.filter_status,
                        "split": r.split,
                    }
                    for r in page
                ],
                "next_page_token": next_token,
            }

    def get_events(self, video_id: str, media_urls: Optional[dict] = None) -> dict:
        with self._lock:
            try:
                rec = self._manifest.get(video_id)
            except KeyError as exc:
                raise HTTPException(
                    status_code=404, detail=f"unknown video_id {video_id!r}"
                ) from exc
            omni = []
            for ev in rec.omni_events:
                item = self._items[_event_key(video_id, ev.id)]
                omni.append(
                    {
                        "event_id": _event_key(video_id, ev.id),
                        "interval": [ev.interval.start_s, ev.interval.end_s],
                        "caption": ev.omni_caption,
                        "correlation_tags": sorted(ev.correlation_tags),
                        "has_temporal_dynamics": ev.has_temporal_dynamics,
                        "visual_event_ids": list(ev.visual_event_ids),
                        "audio_event_ids": list(ev.audio_event_ids),
                        "state": item.state,
                        "flag_reason": item.flag_reason,
                        "revision": item.revision,
                    }
                )
            modal = lambda evs: [
                {
                    "event_id": ev.id,
                    "interval": [ev.interval.start_s, ev.interval.end_s],
                    "caption": ev.caption,
                    "asr_text": ev.asr_text,
                }
                for ev in evs
            ]
            return {
                "video_id": video_id,
                "duration_s": rec.duration_s,
                "review_state": self.video_state(rec),
                "media": media_urls,
                "omni_events": omni,
                "visual_events": modal(rec.visual_events),
                "audio_events": modal(rec.audio_events),
            }

    # -- mutations ----------------------------------------------------------

    def _item_for(self, key: str) -> ReviewItem:
        item = self._items.get(key)
        if item is None:
            raise HTTPException(status_code=404, detail=f"unknown event {key!r}")
        return item

    def _check(self, item: ReviewItem, base_revision: int, new_state: str) -> None:
        if base_revision != item.revision:
            raise ConflictError(
                f"stale base_revision {base_revision}, current is {item.revision}"
            )
        if (item.state, new_state) not in _TRANSITIONS:
            raise ValidationRejection(
                f"illegal transition {item.state} -> {new_state}", "state-transition"
            )

    def _append_audit(self, action: dict) -> None:
        self._seq += 1
        entry = {"seq": self._seq, **action}
        if self._audit_path:
            with open(self._audit_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n")
        if self._snapshot_path and self._seq % self._snapshot_every == 0:
            self._write_snapshot()

    def _write_snapshot(self) -> None:
        tmp = self._snapshot_path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            write_manifest(self._manifest, fh)
        tmp.replace(self._snapshot_path)

    def submit_flag(self, key: str, reason: str, base_revision: int) -> int:
        with self._lock:
            item = self._item_for(key)
            self._check(item, base_revision, "flagged")
            item.state = "flagged"
            item.flag_reason = reason
            item.revision += 1
            self._append_audit(
                {"action": "flag", "event": key, "reason": reason, "base_revision": base_revision}
            )
            return item.revision

    def submit_correction(
        self,
        key: str,
        base_revision: int,
        author: str,
        interval: Optional[tuple[float, float]] = None,
        caption: Optional[str] = None,
    ) -> int:
        with self._lock:
            item = self._item_for(key)
            self._check(item, base_revision, "corrected")
            video_id, event_id = _split_key(key)
            rec = self._manifest.get(video_id)
            new_events = []
            for ev in rec.omni_events:
                if ev.id != event_id:
                    new_events.append(ev)
                    continue
                updated = ev
                if interval is not None:
                    try:
                        updated = replace(updated, interval=TimeInterval(*interval))
                    except InvariantError as exc:
                        raise ValidationRejection(str(exc), _invariant_name(str(exc))) from exc
                if caption is not None:
                    updated = replace(updated, omni_caption=caption)
                new_events.append(updated)
            try:
                new_rec = replace(rec, omni_events=tuple(new_events))
            except InvariantError as exc:
                raise ValidationRejection(str(exc), _invariant_name(str(exc))) from exc
            self._manifest = self._manifest.replace_record(new_rec)
            item.state = "corrected"
            item.revision += 1
            self._append_audit(
                {
                    "action": "correction",
                    "event": key,
                    "author": author,
                    "interval": list(interval) if interval else None,
                    "caption": caption,
                    "base_revision": base_revision,
                }
            )
            return item.revision

    def approve(self, key: str, base_revision: int) -> int:
        with self._lock:
            item = self._item_for(key)
            self._check(item, base_revision, "approved")
            item.state = "approved"
            item.revision += 1
            self._append_audit(
                {"action": "approve", "event": key, "base_revision": base_revision}
            )
            return item.revision

    def export_manifest(self) -> DatasetManifest:
        """Manifest with corrections applied and review states folded in."""
        with self._lock:
            records = []
            for rec in self._manifest.records:
                state = self.video_state(rec)
                records.append(replace(rec, review_state=state) if rec.omni_events else rec)
            return DatasetManifest(records=tuple(records), schema_version=self._manifest.schema_version)

    # -- replay -------------------------------------------------------------

    @classmethod
    def replay(cls, manifest: DatasetManifest, audit_log_path: str) -> "ReviewStore":
        """Rebuild a store by replaying the audit log against a base manifest."""
        store = cls(manifest, audit_log_path=None)
        with open(audit_log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                entry = json.loads(line)
                action = entry["action"]
                if action == "flag":
                    store.submit_flag(entry["event"], entry["reason"], entry["base_revision"])
                elif action == "correction":
                    store.submit_correction(
                        entry["event"],
                        entry["base_revision"],
                        entry.get("author", ""),
                        interval=tuple(entry["interval"]) if entry.get("interval") else None,
                        caption=entry.get("caption"),
                    )
                elif action == "approve":
                    store.approve(entry["event"], entry["base_revision"])
                else:
                    raise ValueError(f"unknown audit action {action!r}")
        return store


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------


class FlagBody(BaseModel):
    reason: str
    base_revision: int


class CorrectionBody(BaseModel):
    base_revision: int
    author: str = ""
    interval: Optional[tuple[float, float]] = None
    caption: Optional[str] = None


class ApproveBody(BaseModel):
    base_revision: int


def create_app(
    manifest: DatasetManifest,
    audit_log_path: Optional[str] = None,
    ui_origin: str = "*",
    snapshot_path: Optional[str] = None,
    snapshot_every: int = 50,
    media_root: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="omnivale review service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[ui_origin] if ui_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = ReviewStore(
        manifest,
        audit_log_path=audit_log_path,
        snapshot_path=snapshot_path,
        snapshot_every=snapshot_every,
    )
    app.state.store = store

    # playback is delegated: serve the pre-extracted corpus files as-is
    if media_root:
        from fastapi.staticfiles import StaticFiles

        app.mount("/media", StaticFiles(directory=media_root), name="media")

    def _media_urls(video_id: str) -> Optional[dict]:
        if not media_root:
            return None
        base = Path(media_root) / video_id
        urls: dict = {}
        if (base / "audio.wav").is_file():
            urls["audio_url"] = f"/media/{video_id}/audio.wav"
        if (base / "frames").is_dir():
            urls["frames_url"] = f"/media/{video_id}/frames/"
        return urls or None

    def _run(fn):
        try:
            return fn()
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except ValidationRejection as exc:
            raise HTTPException(
                status_code=422, detail={"message": str(exc), "invariant": exc.invariant}
            ) from exc

    @app.get("/videos")
    def list_videos(state: Optional[str] = None, page_token: Optional[str] = None, page_size: int = 50):
        if page_size < 1:
            raise HTTPException(status_code=400, detail="page_size must be positive")
        return store.list_videos(state, page_token, page_size)

    @app.get("/videos/{video_id}/events")
    def get_events(video_id: str):
        return store.get_events(video_id, media_urls=_media_urls(video_id))

    @app.post("/events/{event_key}/flag")
    def flag(event_key: str, body: FlagBody):
        revision = _run(lambda: store.submit_flag(event_key, body.reason, body.base_revision))
        return {"event_id": event_key, "revision": revision, "state": "flagged"}

    @app.post("/events/{event_key}/correction")
    def correction(event_key: str, body: CorrectionBody):
        revision = _run(
            lambda: store.submit_correction(
                event_key,
                body.base_revision,
                body.author,
                interval=body.interval,
                caption=body.caption,
            )
        )
        return {"event_id": event_key, "revision": revision, "state": "corrected"}

    @app.post("/events/{event_key}/approve")
    def approve(event_key: str, body: ApproveBody):
        revision = _run(lambda: store.approve(event_key, body.base_revision))
        return {"event_id": event_key, "revision": revision, "state": "approved"}

    @app.get("/export", response_class=PlainTextResponse)
    def export():
        buffer = io.StringIO()
        write_manifest(store.export_manifest(), buffer)
        return buffer.getvalue()

    @app.get("/export.json")
    def export_json():
        exported = store.export_manifest()
        return {
            "schema_version": exported.schema_version,
            "records": [record_to_json(r) for r in exported.records],
        }

    return app
