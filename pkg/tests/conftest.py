import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from omnivale.manifest import (
    DatasetManifest,
    ModalEvent,
    OmniEvent,
    TimeInterval,
    VideoRecord,
)


def make_record(
    video_id="vid0",
    duration_s=30.0,
    visual=(),
    audio=(),
    omni=(),
    **kwargs,
) -> VideoRecord:
    return VideoRecord(
        video_id=video_id,
        duration_s=duration_s,
        fps=2.0,
        resolution=(854, 480),
        visual_events=tuple(visual),
        audio_events=tuple(audio),
        omni_events=tuple(omni),
        **kwargs,
    )


def vis(event_id, start, end, caption=None):
    return ModalEvent(id=event_id, modality="visual", interval=TimeInterval(start, end), caption=caption)


def aud(event_id, start, end, caption=None, asr=None):
    return ModalEvent(
        id=event_id, modality="audio", interval=TimeInterval(start, end), caption=caption, asr_text=asr
    )


def omni(event_id, start, end, visual_ids=(), audio_ids=(), caption=None, tags=()):
    return OmniEvent(
        id=event_id,
        interval=TimeInterval(start, end),
        visual_event_ids=tuple(visual_ids),
        audio_event_ids=tuple(audio_ids),
        omni_caption=caption,
        correlation_tags=frozenset(tags),
    )


@pytest.fixture
def simple_manifest() -> DatasetManifest:
    a0 = aud("a0", 2.0, 6.0, caption="steady music")
    v0 = vis("v0", 0.0, 10.0, caption="a scene")
    o0 = omni("o0", 0.0, 10.0, visual_ids=("v0",), audio_ids=("a0",), caption="integrated scene")
    return DatasetManifest(
        records=(
            make_record("vid0", duration_s=30.0, visual=[v0], audio=[a0], omni=[o0]),
        )
    )
