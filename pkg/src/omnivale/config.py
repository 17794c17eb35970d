"""Pipeline configuration: one JSON file covering every stage, strictly validated."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Optional

from .aseg import AsegConfig, MfccConfig
from .capgen import CapgenConfig
from .dialoggen import DialogueConfig
from .filtergate import FilterConfig
from .manifest import InvariantError
from .vseg import VsegConfig

ENV_CONFIG_PATH = "OMNIVALE_CONFIG"


@dataclass(frozen=True)
class ClientConfig:
    mode: str = "stub"  # "stub" or "live"
    seed: int = 0
    judge_mode: str = "exact"
    timeout_s: float = 30.0
    endpoints: dict = field(default_factory=dict)
    api_key_env: str = "OMNIVALE_API_KEY"

    def __post_init__(self):
        if self.mode not in ("stub", "live"):
            raise InvariantError(f"clients.mode must be stub or live, got {self.mode!r}")


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    parallelism: int = 1
    analysis_fps: float = 2.0
    analysis_rate_hz: int = 16000
    test_fraction: float = 0.14
    clients: ClientConfig = field(default_factory=ClientConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    vseg: VsegConfig = field(default_factory=VsegConfig)
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    aseg: AsegConfig = field(default_factory=AsegConfig)
    capgen: CapgenConfig = field(default_factory=CapgenConfig)
    dialogue: DialogueConfig = field(default_factory=DialogueConfig)

    def __post_init__(self):
        if self.parallelism < 1:
            raise InvariantError("parallelism must be at least 1")
        if self.analysis_fps <= 0:
            raise InvariantError("analysis_fps must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        # parallelism is an execution knob that cannot affect outputs, so
        # it stays out of the hash: runs at different worker counts compare
        # as identical configurations
        hashed = {k: v for k, v in self.to_dict().items() if k != "parallelism"}
        canonical = json.dumps(hashed, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def run_info(self) -> dict:
        from . import __version__

        return {"config_hash": self.config_hash(), "seed": self.seed, "version": __version__}


class ConfigError(ValueError):
    """Config file failed validation."""


def _build_dataclass(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        f = known[name]
        if is_dataclass(f.type) or (isinstance(f.type, str) and f.type in _NESTED):
            nested_cls = _NESTED[f.type] if isinstance(f.type, str) else f.type
            kwargs[name] = _build_dataclass(nested_cls, value, f"{path}.{name}")
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, InvariantError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


_NESTED = {
    "ClientConfig": ClientConfig,
    "FilterConfig": FilterConfig,
    "VsegConfig": VsegConfig,
    "MfccConfig": MfccConfig,
    "AsegConfig": AsegConfig,
    "CapgenConfig": CapgenConfig,
    "DialogueConfig": DialogueConfig,
}


def load_config(path: Optional[str] = None) -> PipelineConfig:
    """Load the pipeline config; falls back to $OMNIVALE_CONFIG, then defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH)
    if path is None:
        return PipelineConfig()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return _build_dataclass(PipelineConfig, raw, "config")
