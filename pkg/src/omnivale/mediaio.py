"""Ingestion contract for decoded media.

The toolkit never touches video containers or codecs: an external decoder
produces PCM WAV audio, numbered frame images at a fixed rate, and a JSON
transcript (see docs/decoder-contract.md). These loaders only normalize that
material into analysis-ready arrays.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image
from scipy.io import wavfile

from . import kernels
from .manifest import InvariantError, TimeInterval

DEFAULT_ANALYSIS_RATE_HZ = 16000
MIN_SAMPLE_RATE_HZ = 8000

_FRAME_NAME = re.compile(r"^frame_(\d+)\.(png|pgm|jpg|jpeg|bmp)$", re.IGNORECASE)


class MediaLoadError(ValueError):
    """Raised when a decoded asset violates the decoder contract."""


@dataclass(frozen=True)
class AudioTrack:
    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate < MIN_SAMPLE_RATE_HZ:
            raise InvariantError(f"sample_rate {self.sample_rate} below minimum {MIN_SAMPLE_RATE_HZ}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise InvariantError(f"samples must be mono 1-D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def duration_s(self) -> float:
        return self.samples.shape[0] / self.sample_rate

    def slice(self, start_s: float, end_s: float) -> "AudioTrack":
        lo = max(0, int(round(start_s * self.sample_rate)))
        hi = min(self.samples.shape[0], int(round(end_s * self.sample_rate)))
        return AudioTrack(sample_rate=self.sample_rate, samples=self.samples[lo:hi].copy())


@dataclass(frozen=True)
class FrameSequence:
    fps: float
    frames: np.ndarray
    timestamps_s: np.ndarray

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        ts = np.asarray(self.timestamps_s, dtype=np.float64)
        if frames.ndim != 3:
            raise InvariantError(f"frames must be T x H x W, got shape {frames.shape}")
        if ts.shape[0] != frames.shape[0]:
            raise InvariantError("timestamp count must match frame count")
        if ts.shape[0] > 1:
            spacing = np.diff(ts)
            if np.any(spacing <= 0):
                raise InvariantError("timestamps must be strictly increasing")
            if np.any(np.abs(spacing - 1.0 / self.fps) > 1e-6):
                raise InvariantError(f"timestamps must be uniformly spaced at 1/{self.fps} s")
        frames.setflags(write=False)
        ts.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "timestamps_s", ts)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def duration_s(self) -> float:
        return self.frames.shape[0] / self.fps

    def slice_span(self, start_s: float, end_s: float) -> "FrameSequence":
        """Frames whose timestamps fall in [start_s, end_s)."""
        mask = (self.timestamps_s >= start_s - 1e-9) & (self.timestamps_s < end_s - 1e-9)
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            raise MediaLoadError(f"no frames in span [{start_s}, {end_s})")
        offset = self.timestamps_s[idx[0]]
        return FrameSequence(
            fps=self.fps,
            frames=self.frames[idx],
            timestamps_s=self.timestamps_s[idx] - offset,
        )


@dataclass(frozen=True)
class Transcript:
    segments: tuple[tuple[TimeInterval, str], ...]
    language: str = "en"

    def __post_init__(self):
        segs = tuple((iv, str(text)) for iv, text in self.segments)
        for (a, _), (b, _) in zip(segs, segs[1:]):
            if b.start_s < a.start_s:
                raise InvariantError("transcript segments must be sorted")
            if a.end_s > b.start_s:
                raise InvariantError("transcript segments must be non-overlapping")
        object.__setattr__(self, "segments", segs)

    def text_in_span(self, start_s: float, end_s: float) -> str:
        parts = [text for iv, text in self.segments if iv.start_s < end_s and start_s < iv.end_s]
        return " ".join(parts)


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    duration_s: float
    width: int
    height: int
    has_transcript: bool
    language: Optional[str] = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvariantError(f"video {self.video_id}: resolution must be positive")


# ---------------------------------------------------------------------------
# Loaders
# ---------------------------------------------------------------------------


def _to_float_samples(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if data.dtype == np.int32:
        return data.astype(np.float64) / 2147483648.0
    if data.dtype in (np.float32, np.float64):
        return data.astype(np.float64)
    raise MediaLoadError(f"unsupported PCM encoding {data.dtype}")


def load_audio(path, analysis_rate_hz: int = DEFAULT_ANALYSIS_RATE_HZ) -> AudioTrack:
    """Load a PCM WAV file, downmix to mono, and resample to the analysis rate.

    Stereo is averaged across channels; resampling is linear interpolation
    with output length round(n * analysis_rate / source_rate), which keeps
    duration within one output sample period.
    """
    try:
        src_rate, data = wavfile.read(path)
    except Exception as exc:
        raise MediaLoadError(f"cannot read waveform {path}: {exc}") from exc
    if data.size == 0:
        raise MediaLoadError(f"empty waveform {path}")
    samples = _to_float_samples(np.atleast_1d(data))
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if src_rate != analysis_rate_hz:
        n_out = int(round(samples.shape[0] * analysis_rate_hz / src_rate))
        samples = kernels.resample_linear(samples, n_out, src_rate / analysis_rate_hz)
    return AudioTrack(sample_rate=analysis_rate_hz, samples=samples)


def load_frames(directory, fps: float) -> FrameSequence:
    """Load a numbered frame-image directory (frame_000001.* ..) as grayscale.

    Frame k (1-based) is timestamped at (k-1)/fps; an index gap or a
    dimension mismatch is a contract violation.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise MediaLoadError(f"frame directory {directory} does not exist")
    indexed: dict[int, Path] = {}
    for entry in directory.iterdir():
        m = _FRAME_NAME.match(entry.name)
        if m:
            indexed[int(m.group(1))] = entry
    if not indexed:
        raise MediaLoadError(f"no frame images found in {directory}")
    count = max(indexed)
    frames = []
    shape = None
    for k in range(1, count + 1):
        if k not in indexed:
            raise MediaLoadError(f"missing frame index {k} in {directory}")
        with Image.open(indexed[k]) as img:
            gray = np.asarray(img.convert("L"), dtype=np.float64) / 255.0
        if shape is None:
            shape = gray.shape
        elif gray.shape != shape:
            raise MediaLoadError(
                f"frame {k} has shape {gray.shape}, expected {shape} (inconsistent dimensions)"
            )
        frames.append(gray)
    stack = np.stack(frames)
    timestamps = np.arange(stack.shape[0], dtype=np.float64) / fps
    return FrameSequence(fps=fps, frames=stack, timestamps_s=timestamps)


def load_transcript(path) -> Transcript:
    """Load a transcript JSON file: {"language": ..., "segments": [[start, end, text], ...]}."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    segments = tuple(
        (TimeInterval(float(s[0]), float(s[1])), str(s[2])) for s in raw.get("segments", ())
    )
    return Transcript(segments=segments, language=raw.get("language", "en"))


def load_video_meta(path) -> VideoMeta:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return VideoMeta(
        video_id=raw["video_id"],
        duration_s=float(raw["duration_s"]),
        width=int(raw["width"]),
        height=int(raw["height"]),
        has_transcript=bool(raw.get("has_transcript", False)),
        language=raw.get("language"),
    )


class VideoAssets:
    """Lazy access to one video's decoded assets under corpus_root/video_id/."""

    def __init__(self, root, video_id: str, analysis_fps: float = 2.0, analysis_rate_hz: int = DEFAULT_ANALYSIS_RATE_HZ):
        self.root = Path(root)
        self.video_id = video_id
        self.analysis_fps = analysis_fps
        self.analysis_rate_hz = analysis_rate_hz
        self._meta: Optional[VideoMeta] = None
        self._frames: Optional[FrameSequence] = None
        self._audio: Optional[AudioTrack] = None
        self._transcript: Optional[Transcript] = None
        self._transcript_loaded = False

    @property
    def directory(self) -> Path:
        return self.root / self.video_id

    def meta(self) -> VideoMeta:
        if self._meta is None:
            self._meta = load_video_meta(self.directory / "meta.json")
        return self._meta

    def transcript(self) -> Optional[Transcript]:
        if not self._transcript_loaded:
            path = self.directory / "transcript.json"
            self._transcript = load_transcript(path) if path.exists() else None
            self._transcript_loaded = True
        return self._transcript

    def frames(self) -> FrameSequence:
        if self._frames is None:
            self._frames = load_frames(self.directory / "frames", self.analysis_fps)
        return self._frames

    def audio(self) -> AudioTrack:
        if self._audio is None:
            self._audio = load_audio(self.directory / "audio.wav", self.analysis_rate_hz)
        return self._audio


def scan_corpus(root) -> list[str]:
    """Video ids present in a corpus directory (any subdir with a meta.json)."""
    root = Path(root)
    if not root.is_dir():
        raise MediaLoadError(f"corpus root {root} does not exist")
    return sorted(p.name for p in root.iterdir() if (p / "meta.json").is_file())


def subtitle_coverage(transcript: Optional[Transcript], duration_s: float) -> float:
    """Fraction of the video covered by transcript segments, clipped to [0, duration]."""
    if duration_s <= 0:
        raise InvariantError(f"duration must be positive, got {duration_s}")
    if transcript is None or not transcript.segments:
        return 0.0
    covered = 0.0
    for iv, _ in transcript.segments:
        lo = max(0.0, min(iv.start_s, duration_s))
        hi = max(0.0, min(iv.end_s, duration_s))
        covered += hi - lo
    return covered / duration_s
