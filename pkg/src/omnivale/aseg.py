"""Generic semantics-aware audio event boundary detection.

MFCC features -> per-window mean |delta| transition scores -> threshold
splitting -> semantic stitching with a short-pause merge rule. The absolute
value of the deltas matters: signed first differences cancel over a window
and miss symmetric transitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.fft import dct

from . import kernels
from .embeddings import EmbeddingSeries, cosine, normalize
from .manifest import InvariantError, ModalEvent, TimeInterval
from .mediaio import AudioTrack


@dataclass(frozen=True)
class MfccConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    n_mels: int = 26
    n_coeffs: int = 13  # cepstral coefficients 1..n, the 0th is dropped
    preemphasis_coeff: float = 0.97
    log_floor: float = 1e-6

    def __post_init__(self):
        if self.hop_ms > self.frame_ms:
            raise InvariantError("hop_ms must not exceed frame_ms")
        if self.n_coeffs > self.n_mels:
            raise InvariantError("n_coeffs must not exceed n_mels")


@dataclass(frozen=True)
class MfccMatrix:
    coefficients: np.ndarray  # T x n_coeffs
    hop_s: float
    frame_s: float

    def __post_init__(self):
        arr = np.asarray(self.coefficients, dtype=np.float64)
        if arr.ndim != 2:
            raise InvariantError(f"coefficients must be T x n, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    @property
    def n_frames(self) -> int:
        return self.coefficients.shape[0]


@dataclass(frozen=True)
class TransitionScoreSeries:
    scores: np.ndarray
    window_s: float

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64)
        if arr.ndim != 1:
            raise InvariantError("scores must be 1-D")
        if np.any(arr < 0):
            raise InvariantError("transition scores must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    def __len__(self) -> int:
        return self.scores.shape[0]


@dataclass(frozen=True)
class AsegConfig:
    threshold_k: float = 1.0  # adaptive threshold: mean + k * std
    fixed_threshold: Optional[float] = None  # set to bypass the adaptive rule
    min_event_s: float = 1.0
    stitch_similarity: float = 0.60
    pause_merge_max_gap_s: float = 0.3
    window_s: float = 1.0

    def __post_init__(self):
        if self.threshold_k <= 0:
            raise InvariantError("threshold_k must be positive")
        if self.window_s <= 0:
            raise InvariantError("window_s must be positive")


def hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """Triangular mel filters over the rfft bins, spanning 0 .. sample_rate/2."""
    mel_points = np.linspace(hz_to_mel(0.0), hz_to_mel(sample_rate / 2.0), n_mels + 2)
    bin_points = np.floor((n_fft + 1) * mel_to_hz(mel_points) / sample_rate).astype(int)
    fbank = np.zeros((n_mels, n_fft // 2 + 1), dtype=np.float64)
    for m in range(1, n_mels + 1):
        left, center, right = bin_points[m - 1], bin_points[m], bin_points[m + 1]
        for k in range(left, center):
            fbank[m - 1, k] = (k - left) / max(center - left, 1)
        for k in range(center, right):
            fbank[m - 1, k] = (right - k) / max(right - center, 1)
    return fbank


def _next_pow2(n: int) -> int:
    size = 1
    while size < n:
        size *= 2
    return size


def compute_mfcc(audio: AudioTrack, cfg: MfccConfig = MfccConfig()) -> MfccMatrix:
    """Standard MFCC pipeline: pre-emphasis, Hann frames, power spectrum,
    mel filterbank, log, orthonormal DCT-II, coefficients 1..n_coeffs."""
    sr = audio.sample_rate
    frame_len = int(round(cfg.frame_ms / 1000.0 * sr))
    hop = int(round(cfg.hop_ms / 1000.0 * sr))
    if audio.samples.shape[0] < frame_len:
        raise InvariantError(
            f"audio of {audio.samples.shape[0]} samples is shorter than one frame ({frame_len})"
        )
    emphasized = kernels.preemphasis(audio.samples, cfg.preemphasis_coeff)
    window = np.hanning(frame_len)
    frames = kernels.frame_windows(emphasized, frame_len, hop, window)

    n_fft = _next_pow2(frame_len)
    power = np.abs(np.fft.rfft(frames, n=n_fft, axis=1)) ** 2 / n_fft
    fbank = mel_filterbank(cfg.n_mels, n_fft, sr)
    log_mel = np.log(np.maximum(power @ fbank.T, cfg.log_floor))
    ceps = dct(log_mel, type=2, axis=1, norm="ortho")
    return MfccMatrix(
        coefficients=ceps[:, 1 : cfg.n_coeffs + 1],
        hop_s=hop / sr,
        frame_s=frame_len / sr,
    )


def transition_scores(mfcc: MfccMatrix, window_s: float, duration_s: float) -> TransitionScoreSeries:
    """Per-window mean |MFCC delta|: ceil(duration / window_s) scores.

    The delta between frames t and t+1 is timestamped at the start of frame
    t+1, i.e. where the new content begins. Windows without deltas score 0.
    """
    if mfcc.n_frames < 2:
        raise InvariantError("need at least 2 MFCC frames for transition scores")
    deltas = kernels.mean_abs_rowdiff(mfcc.coefficients)
    n_windows = int(np.ceil(duration_s / window_s))
    times = (np.arange(deltas.shape[0]) + 1) * mfcc.hop_s
    idx = np.minimum((times / window_s).astype(int), n_windows - 1)
    sums = np.bincount(idx, weights=deltas, minlength=n_windows)
    counts = np.bincount(idx, minlength=n_windows)
    scores = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    return TransitionScoreSeries(scores=scores, window_s=window_s)


def split_audio(
    scores: TransitionScoreSeries, cfg: AsegConfig, duration_s: float
) -> list[TimeInterval]:
    """Threshold the score series into a partition of [0, duration).

    Adaptive threshold is mean + k * std over the windows. A run of
    consecutive above-threshold windows marks one transition, at the start
    of the run's highest-scoring window; sub-minimum intervals are merged
    forward, so only the final interval may stay short.
    """
    values = scores.scores
    if cfg.fixed_threshold is not None:
        theta = cfg.fixed_threshold
    else:
        theta = float(np.mean(values) + cfg.threshold_k * np.std(values)) if values.size else 0.0

    above = values > theta
    boundaries: list[float] = []
    i = 0
    while i < above.shape[0]:
        if above[i]:
            j = i
            while j + 1 < above.shape[0] and above[j + 1]:
                j += 1
            peak = i + int(np.argmax(values[i : j + 1]))
            t = peak * scores.window_s
            if 0.0 < t < duration_s:
                boundaries.append(t)
            i = j + 1
        else:
            i += 1

    edges = [0.0] + boundaries + [duration_s]
    intervals = [(a, b) for a, b in zip(edges, edges[1:]) if b > a]

    # Merge sub-minimum intervals into the following one.
    merged: list[tuple[float, float]] = []
    pending_start: Optional[float] = None
    for start, end in intervals:
        if pending_start is not None:
            start = pending_start
            pending_start = None
        if end - start < cfg.min_event_s:
            pending_start = start
        else:
            merged.append((start, end))
    if pending_start is not None:
        # Nothing left to merge into; the trailing interval may stay short.
        merged.append((pending_start, duration_s))

    return [TimeInterval(a, b) for a, b in merged]


def stitch_audio(
    intervals: Sequence[TimeInterval],
    clip_embeddings: EmbeddingSeries,
    cfg: AsegConfig = AsegConfig(),
    id_prefix: str = "a",
) -> list[ModalEvent]:
    """Merge semantically similar neighbors, bridging short pause segments.

    Two rules run to a fixpoint: (1) adjacent intervals with embedding
    cosine >= the stitch threshold merge; (2) a sub-pause middle interval
    whose flanking intervals agree merges all three, so word pauses and
    brief interruptions do not split one event.
    """
    if len(clip_embeddings) != len(intervals):
        raise InvariantError(
            f"embedding count {len(clip_embeddings)} != interval count {len(intervals)}"
        )
    spans = [(iv.start_s, iv.end_s) for iv in intervals]
    vecs = [np.array(clip_embeddings[i], dtype=np.float64) for i in range(len(intervals))]

    def merge_range(lo: int, hi: int) -> None:
        total = spans[hi][1] - spans[lo][0]
        weighted = sum(vecs[k] * (spans[k][1] - spans[k][0]) for k in range(lo, hi + 1))
        spans[lo] = (spans[lo][0], spans[hi][1])
        vecs[lo] = normalize(weighted)
        del spans[lo + 1 : hi + 1]
        del vecs[lo + 1 : hi + 1]

    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(spans) - 1:
            if cosine(vecs[i], vecs[i + 1]) >= cfg.stitch_similarity:
                merge_range(i, i + 1)
                changed = True
            else:
                i += 1
        i = 0
        while i < len(spans) - 2:
            gap_len = spans[i + 1][1] - spans[i + 1][0]
            if gap_len <= cfg.pause_merge_max_gap_s and cosine(vecs[i], vecs[i + 2]) >= cfg.stitch_similarity:
                merge_range(i, i + 2)
                changed = True
            else:
                i += 1

    return [
        ModalEvent(id=f"{id_prefix}{i:03d}", modality="audio", interval=TimeInterval(a, b))
        for i, (a, b) in enumerate(spans)
    ]


def segment_audio(
    audio: AudioTrack,
    embed_clips,
    mfcc_cfg: MfccConfig = MfccConfig(),
    cfg: AsegConfig = AsegConfig(),
) -> list[ModalEvent]:
    """Full audio path: MFCC -> scores -> split -> stitch.

    ``embed_clips(audio, intervals)`` returns one embedding per interval.
    """
    mfcc = compute_mfcc(audio, mfcc_cfg)
    scores = transition_scores(mfcc, cfg.window_s, audio.duration_s)
    intervals = split_audio(scores, cfg, audio.duration_s)
    embeddings = embed_clips(audio, intervals)
    return stitch_audio(intervals, embeddings, cfg)
