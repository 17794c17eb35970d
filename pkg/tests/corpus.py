"""Synthetic corpus builders: engineered videos for gate and pipeline tests.

Each video is a directory of meta.json, PNG frames at the analysis fps,
a PCM WAV track, and an optional transcript, matching the documented
decoder contract. Content is constructed so specific gates pass or fail by
design (moving-square scenes for motion, phase-locked tones for audio).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.io import wavfile

FPS = 2.0
SAMPLE_RATE = 16000
FRAME_W, FRAME_H = 64, 36


@dataclass(frozen=True)
class SceneSpec:
    start_s: float
    end_s: float
    brightness: float
    dynamic: bool = True  # False: constant frames (static scene)


@dataclass(frozen=True)
class ToneSpec:
    start_s: float
    end_s: float
    freq_hz: float
    amplitude: float


@dataclass(frozen=True)
class VideoSpec:
    video_id: str
    duration_s: float = 30.0
    height: int = 480
    width: int = 854
    language: str | None = "en"
    transcript_spans: tuple[tuple[float, float], ...] = ((0.0, 15.0),)
    scenes: tuple[SceneSpec, ...] = ()
    tones: tuple[ToneSpec, ...] = ()
    silent_audio: bool = False
    media: bool = True  # False: metadata-only video (rejected before media loads)


def render_frames(spec: VideoSpec) -> np.ndarray:
    n_frames = int(round(spec.duration_s * FPS))
    frames = np.zeros((n_frames, FRAME_H, FRAME_W), dtype=np.float64)
    for t in range(n_frames):
        time_s = t / FPS
        scene = next(
            (s for s in spec.scenes if s.start_s <= time_s < s.end_s),
            SceneSpec(0.0, spec.duration_s, 0.5, dynamic=False),
        )
        frame = np.full((FRAME_H, FRAME_W), scene.brightness)
        if scene.dynamic:
            # 8x8 square marching across the frame: motion without a cut.
            col = (t * 5) % (FRAME_W - 8)
            value = scene.brightness + (0.5 if scene.brightness < 0.5 else -0.5)
            frame[14:22, col : col + 8] = value
        frames[t] = frame
    return frames


def render_audio(spec: VideoSpec) -> np.ndarray:
    n = int(round(spec.duration_s * SAMPLE_RATE))
    samples = np.zeros(n, dtype=np.float64)
    if not spec.silent_audio:
        for tone in spec.tones:
            lo = int(round(tone.start_s * SAMPLE_RATE))
            hi = min(n, int(round(tone.end_s * SAMPLE_RATE)))
            t = np.arange(lo, hi) / SAMPLE_RATE
            samples[lo:hi] = tone.amplitude * np.sin(2 * np.pi * tone.freq_hz * t)
    return samples


def write_video(root, spec: VideoSpec) -> Path:
    directory = Path(root) / spec.video_id
    directory.mkdir(parents=True, exist_ok=True)

    meta = {
        "video_id": spec.video_id,
        "duration_s": spec.duration_s,
        "width": spec.width,
        "height": spec.height,
        "has_transcript": spec.language is not None,
        "language": spec.language,
    }
    (directory / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")

    if spec.language is not None:
        transcript = {
            "language": spec.language,
            "segments": [[a, b, f"spoken segment {i}"] for i, (a, b) in enumerate(spec.transcript_spans)],
        }
        (directory / "transcript.json").write_text(json.dumps(transcript), encoding="utf-8")

    if spec.media:
        frames_dir = directory / "frames"
        frames_dir.mkdir(exist_ok=True)
        for i, frame in enumerate(render_frames(spec), start=1):
            img = Image.fromarray((np.clip(frame, 0.0, 1.0) * 255).astype(np.uint8), mode="L")
            img.save(frames_dir / f"frame_{i:06d}.png")

        samples = render_audio(spec)
        wavfile.write(directory / "audio.wav", SAMPLE_RATE, (samples * 32767).astype(np.int16))
    return directory


# ---------------------------------------------------------------------------
# Canned specs
# ---------------------------------------------------------------------------


def good_video_spec(video_id: str = "vid_good") -> VideoSpec:
    """Passes every gate; yields 2 visual, 3 audio, 3 omni events.

    Static middle scene becomes a visual gap; the middle tone lives exactly
    in that gap and seeds an audio-only omni event. Tone changes sit
    mid-window (12.5/18.5) so the detected boundaries land on 12.0/18.0,
    aligned with the scene grid.
    """
    return VideoSpec(
        video_id=video_id,
        duration_s=30.0,
        scenes=(
            SceneSpec(0.0, 12.0, 0.25, dynamic=True),
            SceneSpec(12.0, 18.0, 0.5, dynamic=False),
            SceneSpec(18.0, 30.0, 0.75, dynamic=True),
        ),
        tones=(
            ToneSpec(0.0, 12.5, 400.0, 0.30),
            ToneSpec(12.5, 18.5, 600.0, 0.65),
            ToneSpec(18.5, 30.0, 800.0, 0.95),
        ),
    )


def absorb_video_spec(video_id: str = "vid_absorb") -> VideoSpec:
    """One audio event spanning two visual scenes: fusion absorbs the second."""
    return VideoSpec(
        video_id=video_id,
        duration_s=20.0,
        transcript_spans=((0.0, 8.0),),
        scenes=(
            SceneSpec(0.0, 10.0, 0.25, dynamic=True),
            SceneSpec(10.0, 20.0, 0.75, dynamic=True),
        ),
        tones=(ToneSpec(0.0, 20.0, 400.0, 0.30),),
    )


def gate_fail_specs() -> list[VideoSpec]:
    """One video per rejection reason, in gate order."""
    base_scenes = (
        SceneSpec(0.0, 12.0, 0.25, dynamic=True),
        SceneSpec(12.0, 30.0, 0.75, dynamic=True),
    )
    base_tones = (ToneSpec(0.0, 12.0, 400.0, 0.30), ToneSpec(12.0, 30.0, 800.0, 0.95))
    return [
        VideoSpec(video_id="vid_lowres", height=240, scenes=base_scenes, tones=base_tones),
        VideoSpec(video_id="vid_notranscript", language=None, scenes=base_scenes, tones=base_tones),
        VideoSpec(video_id="vid_frlang", language="fr", scenes=base_scenes, tones=base_tones),
        VideoSpec(
            video_id="vid_speechy",
            transcript_spans=((0.0, 28.8),),  # coverage 0.96 > 0.95
            scenes=base_scenes,
            tones=base_tones,
        ),
        VideoSpec(
            video_id="vid_static",
            scenes=(SceneSpec(0.0, 30.0, 0.5, dynamic=False),),
            tones=base_tones,
        ),
        VideoSpec(video_id="vid_dubbed", scenes=base_scenes, silent_audio=True),
    ]


def build_pipeline_corpus(root) -> list[str]:
    """The standard end-to-end fixture: 2 passing + 6 failing videos."""
    specs = [good_video_spec(), absorb_video_spec(), *gate_fail_specs()]
    for spec in specs:
        write_video(root, spec)
    return [s.video_id for s in specs]


def hundred_video_specs() -> list[VideoSpec]:
    """100 videos where 92 are engineered to fail a gate (8 retained).

    Cheap-gate failures (resolution/transcript/speech) skip media entirely;
    run_filters short-circuits before loading frames or audio.
    """
    from dataclasses import replace as _replace

    specs: list[VideoSpec] = []
    for i in range(4):
        specs.append(_replace(good_video_spec(f"pass_good_{i}"), media=True))
        specs.append(_replace(absorb_video_spec(f"pass_absorb_{i}"), media=True))
    for i in range(30):
        specs.append(VideoSpec(video_id=f"fail_lowres_{i:02d}", height=240, media=False))
    for i in range(30):
        specs.append(VideoSpec(video_id=f"fail_notranscript_{i:02d}", language=None, media=False))
    for i in range(12):
        specs.append(VideoSpec(video_id=f"fail_frlang_{i:02d}", language="fr", media=False))
    for i in range(12):
        specs.append(
            VideoSpec(
                video_id=f"fail_speechy_{i:02d}",
                transcript_spans=((0.0, 28.8),),
                media=False,
            )
        )
    for i in range(4):
        specs.append(
            VideoSpec(
                video_id=f"fail_static_{i}",
                scenes=(SceneSpec(0.0, 30.0, 0.5, dynamic=False),),
                tones=(ToneSpec(0.0, 30.0, 400.0, 0.3),),
            )
        )
    for i in range(4):
        specs.append(
            VideoSpec(
                video_id=f"fail_dubbed_{i}",
                scenes=(
                    SceneSpec(0.0, 15.0, 0.25, dynamic=True),
                    SceneSpec(15.0, 30.0, 0.75, dynamic=True),
                ),
                silent_audio=True,
            )
        )
    assert len(specs) == 100
    return specs
