"""Stage wiring: per-video processing functions shared by the CLI.

Each stage maps a VideoRecord to an updated VideoRecord using the corpus
assets and the configured clients; work is parallelized across videos with
results reduced in input order, so runs are deterministic.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from . import aseg, capgen, features, filtergate, fuse, vseg
from .clients import ClientSet, embed_features
from .config import PipelineConfig
from .embeddings import EmbeddingSeries
from .manifest import DatasetManifest, TimeInterval, VideoRecord
from .mediaio import AudioTrack, VideoAssets
from .metrics.coherence import StageBoundaries

logger = logging.getLogger(__name__)


def make_clients(cfg: PipelineConfig) -> ClientSet:
    from . import clients as clients_mod

    if cfg.clients.mode == "stub":
        return clients_mod.stub_clients(seed=cfg.clients.seed, judge_mode=cfg.clients.judge_mode)
    import os

    api_key = os.environ.get(cfg.clients.api_key_env)
    return clients_mod.http_clients(cfg.clients.endpoints, timeout_s=cfg.clients.timeout_s, api_key=api_key)


def assets_for(record_or_id, corpus_root, cfg: PipelineConfig) -> VideoAssets:
    video_id = record_or_id if isinstance(record_or_id, str) else record_or_id.video_id
    return VideoAssets(
        corpus_root, video_id, analysis_fps=cfg.analysis_fps, analysis_rate_hz=cfg.analysis_rate_hz
    )


def chunk_embeddings(
    assets: VideoAssets, chunk_s: float, clients: ClientSet
) -> tuple[EmbeddingSeries, EmbeddingSeries]:
    """Aligned per-chunk audio/visual embeddings for the AV consistency gate."""
    duration = assets.meta().duration_s
    spans = features.chunk_spans(duration, chunk_s)
    audio = assets.audio()
    frames = assets.frames()
    audio_rows = [features.audio_span_features(audio, a, b) for a, b in spans]
    visual_rows = [features.visual_span_features(frames, a, b) for a, b in spans]
    return (
        embed_features(clients.embedder, audio_rows, item_span_s=chunk_s),
        embed_features(clients.embedder, visual_rows, item_span_s=chunk_s),
    )


def _detect_scenes(frames, cfg: PipelineConfig):
    if len(frames) < 2:
        return [TimeInterval(0.0, max(frames.duration_s, 1e-3))]
    return vseg.split_scenes(frames, cfg.vseg)


def filter_record(record: VideoRecord, corpus_root, cfg: PipelineConfig, clients: ClientSet) -> VideoRecord:
    assets = assets_for(record, corpus_root, cfg)
    return filtergate.run_filters(
        record,
        assets,
        lambda a, chunk_s: chunk_embeddings(a, chunk_s, clients),
        cfg.filter,
        scenes_for=lambda frames: _detect_scenes(frames, cfg),
    )


def _visual_stage_intervals(record, assets, cfg, clients):
    frames = assets.frames()
    split = vseg.split_scenes(frames, cfg.vseg)
    frame_rows = [features.frame_features(frames, i) for i in range(len(frames))]
    frame_embs = embed_features(clients.embedder, frame_rows, item_span_s=1.0 / frames.fps)
    scene_embs = vseg.scene_embeddings(frame_embs, frames, split)
    stitched = vseg.stitch_scenes(split, scene_embs, cfg.vseg)
    return frames, split, stitched


def segment_visual_record(record: VideoRecord, corpus_root, cfg: PipelineConfig, clients: ClientSet) -> VideoRecord:
    assets = assets_for(record, corpus_root, cfg)
    frames, _, stitched = _visual_stage_intervals(record, assets, cfg, clients)
    events = vseg.postprocess_visual(stitched, frames, cfg.vseg)
    events = [
        ev if ev.interval.end_s <= record.duration_s
        else replace(ev, interval=TimeInterval(ev.interval.start_s, record.duration_s))
        for ev in events
    ]
    return replace(record, visual_events=tuple(events))


def _audio_clip_embeddings(audio: AudioTrack, intervals, clients: ClientSet) -> EmbeddingSeries:
    rows = [features.audio_span_features(audio, iv.start_s, iv.end_s) for iv in intervals]
    return embed_features(clients.embedder, rows)


def segment_audio_record(
    record: VideoRecord, corpus_root, cfg: PipelineConfig, clients: ClientSet,
    score_sink: Optional[Callable[[str, aseg.TransitionScoreSeries], None]] = None,
) -> VideoRecord:
    assets = assets_for(record, corpus_root, cfg)
    audio = assets.audio()
    mfcc = aseg.compute_mfcc(audio, cfg.mfcc)
    scores = aseg.transition_scores(mfcc, cfg.aseg.window_s, audio.duration_s)
    if score_sink is not None:
        score_sink(record.video_id, scores)
    intervals = aseg.split_audio(scores, cfg.aseg, audio.duration_s)
    embeddings = _audio_clip_embeddings(audio, intervals, clients)
    events = aseg.stitch_audio(intervals, embeddings, cfg.aseg)
    # Audio events may end a hair past the quantized metadata duration.
    events = [
        ev if ev.interval.end_s <= record.duration_s
        else replace(ev, interval=TimeInterval(ev.interval.start_s, record.duration_s))
        for ev in events
    ]
    return replace(record, audio_events=tuple(events))


def fuse_record(record: VideoRecord) -> VideoRecord:
    report = fuse.fuse_events(record.visual_events, record.audio_events, record.duration_s)
    return replace(record, omni_events=report.omni_events)


def caption_record(record: VideoRecord, corpus_root, cfg: PipelineConfig, clients: ClientSet) -> VideoRecord:
    assets = assets_for(record, corpus_root, cfg)
    source = features.MediaClipSource(assets.frames(), assets.audio())
    updated, bundle = capgen.caption_record(record, source, clients, cfg.capgen)
    if bundle.failures:
        logger.warning("video %s: %d caption failures", record.video_id, len(bundle.failures))
    return updated


def stage_boundaries_for(record: VideoRecord, corpus_root, cfg: PipelineConfig, clients: ClientSet) -> StageBoundaries:
    """Recompute per-stage boundaries for the coherence report."""
    assets = assets_for(record, corpus_root, cfg)
    frames, v_split, v_stitch = _visual_stage_intervals(record, assets, cfg, clients)
    audio = assets.audio()
    mfcc = aseg.compute_mfcc(audio, cfg.mfcc)
    scores = aseg.transition_scores(mfcc, cfg.aseg.window_s, audio.duration_s)
    a_split = aseg.split_audio(scores, cfg.aseg, audio.duration_s)
    a_events = aseg.stitch_audio(a_split, _audio_clip_embeddings(audio, a_split, clients), cfg.aseg)
    return StageBoundaries(
        video_id=record.video_id,
        visual_split=tuple(v_split),
        visual_stitch=tuple(v_stitch),
        audio_split=tuple(a_split),
        audio_stitch=tuple(ev.interval for ev in a_events),
        omni=tuple(ev.interval for ev in record.omni_events),
    )


def per_second_embedder(corpus_root, cfg: PipelineConfig, clients: ClientSet):
    """per_second_embeddings(video_id, modality) for mrsd_report."""

    def provider(video_id: str, modality: str) -> EmbeddingSeries:
        assets = assets_for(video_id, corpus_root, cfg)
        duration = assets.meta().duration_s
        seconds = [(float(i), float(i + 1)) for i in range(max(1, int(np.ceil(duration))))]
        if modality == "audio":
            audio = assets.audio()
            rows = [features.audio_span_features(audio, a, b) for a, b in seconds]
        else:
            frames = assets.frames()
            rows = [features.visual_span_features(frames, a, b) for a, b in seconds]
        return embed_features(clients.embedder, rows, item_span_s=1.0)

    return provider


def map_records(
    manifest: DatasetManifest,
    fn: Callable[[VideoRecord], VideoRecord],
    parallelism: int = 1,
    retained_only: bool = True,
) -> DatasetManifest:
    """Apply fn across videos (thread pool), reducing in input order."""
    records = list(manifest.records)
    targets = [i for i, r in enumerate(records) if not retained_only or r.filter_status == "retained"]
    if parallelism <= 1 or len(targets) <= 1:
        for i in targets:
            records[i] = fn(records[i])
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(fn, [records[i] for i in targets]))
        for i, result in zip(targets, results):
            records[i] = result
    return DatasetManifest(records=tuple(records), schema_version=manifest.schema_version)
