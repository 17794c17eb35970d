"""Versioned prompt catalog.

Templates are plain-text assets with str.format placeholders; bump
CATALOG_VERSION whenever any template's meaning changes so downstream runs
can detect prompt drift.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

CATALOG_VERSION = 1

_NAMES = (
    "video_caption",
    "keyframe_caption",
    "audio_caption",
    "omni_integration",
    "repair",
    "avc_classify",
    "qa_judge",
    "instruction_gen",
)


@lru_cache(maxsize=None)
def load(name: str) -> str:
    if name not in _NAMES:
        raise KeyError(f"unknown prompt template {name!r}; known: {_NAMES}")
    return resources.files(__package__).joinpath(f"{name}.txt").read_text(encoding="utf-8")


def render(name: str, **fields) -> str:
    return load(name).format(**fields)
