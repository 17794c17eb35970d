"""External model clients: one wire contract, stub and HTTP implementations.

Every role speaks the same request/response shape (JSON-compatible dicts,
documented in docs/client-protocol.md). The stubs are deterministic
functions of (seed, payload), so the whole pipeline runs offline and twice
produces byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .embeddings import EmbeddingSeries
from .manifest import CORRELATION_TAGS

ROLES = (
    "video_captioner",
    "keyframe_captioner",
    "audio_captioner",
    "asr",
    "integrator_llm",
    "judge_llm",
    "embedder",
)


class ClientError(RuntimeError):
    """A client call failed after exhausting its retry policy."""


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_s: float = 0.0


class ModelClient:
    """Base request/response client with retries; subclasses implement _send."""

    role: str = "unset"

    def __init__(self, retry: RetryPolicy = RetryPolicy()):
        self.retry = retry

    def request(self, payload: dict) -> dict:
        last_error: Optional[Exception] = None
        for attempt in range(self.retry.max_attempts):
            try:
                return self._send(payload)
            except ClientError as exc:
                last_error = exc
                if self.retry.backoff_s:
                    time.sleep(self.retry.backoff_s * (attempt + 1))
        raise ClientError(f"{self.role}: all {self.retry.max_attempts} attempts failed") from last_error

    def _send(self, payload: dict) -> dict:
        raise NotImplementedError


def _payload_digest(seed: int, payload: dict) -> int:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    digest = hashlib.sha256(f"{seed}:{canonical}".encode()).hexdigest()
    return int(digest[:16], 16)


def _rng_for(seed: int, payload: dict) -> random.Random:
    return random.Random(_payload_digest(seed, payload))


_SUBJECTS = ("a man", "a woman", "a child", "a crowd", "a band", "a dog", "an athlete")
_VISUAL_ACTIONS = (
    "walks across the scene",
    "gestures while talking",
    "performs on a stage",
    "works with a tool",
    "rides through the frame",
    "plays an instrument",
)
_AUDIO_SOUNDS = (
    "steady music plays",
    "applause rises and falls",
    "an engine hums in the background",
    "birds chirp intermittently",
    "a tone sounds continuously",
    "laughter breaks out",
)
_SPEECH_LINES = (
    "welcome back everyone",
    "let us take a closer look",
    "that was an amazing moment",
    "thanks for watching today",
)


class StubVideoCaptioner(ModelClient):
    role = "video_captioner"

    def __init__(self, seed: int = 0, retry: RetryPolicy = RetryPolicy()):
        super().__init__(retry)
        self.seed = seed

    def _send(self, payload: dict) -> dict:
        rng = _rng_for(self.seed, payload)
        span = payload.get("span", (0.0, 0.0))
        text = (
            f"{rng.choice(_SUBJECTS)} {rng.choice(_VISUAL_ACTIONS)} "
            f"between {span[0]:.1f}s and {span[1]:.1f}s"
        )
        return {"text": text}


class StubKeyframeCaptioner(ModelClient):
    role = "keyframe_captioner"

    def __init__(self, seed: int = 0, retry: RetryPolicy = RetryPolicy()):
        super().__init__(retry)
        self.seed = seed

    def _send(self, payload: dict) -> dict:
        rng = _rng_for(self.seed, payload)
        t = payload.get("time_s", 0.0)
        return {"text": f"a frame at {t:.1f}s showing {rng.choice(_SUBJECTS)} in a detailed setting"}


class StubAudioCaptioner(ModelClient):
    role = "audio_captioner"

    def __init__(self, seed: int = 0, retry: RetryPolicy = RetryPolicy()):
        super().__init__(retry)
        self.seed = seed

    def _send(self, payload: dict) -> dict:
        rng = _rng_for(self.seed, payload)
        return {"text": f"{rng.choice(_AUDIO_SOUNDS)} during this clip"}


class StubAsr(ModelClient):
    """Reports no speech for near-silent clips (rms below the floor)."""

    role = "asr"
    SILENCE_RMS = 0.01

    def __init__(self, seed: int = 0, retry: RetryPolicy = RetryPolicy()):
        super().__init__(retry)
        self.seed = seed

    def _send(self, payload: dict) -> dict:
        features = payload.get("features") or [0.0]
        if features[0] < self.SILENCE_RMS:
            return {"text": ""}
        rng = _rng_for(self.seed, payload)
        return {"text": rng.choice(_SPEECH_LINES)}


class StubIntegrator(ModelClient):
    """Structured omni-caption response; ``fail_payload_key`` makes one
    request return garbage, for exercising the repair path in tests."""

    role = "integrator_llm"

    def __init__(self, seed: int = 0, retry: RetryPolicy = RetryPolicy(), fail_payload_key: Optional[str] = None):
        super().__init__(retry)
        self.seed = seed
        self.fail_payload_key = fail_payload_key

    def _send(self, payload: dict) -> dict:
        if self.fail_payload_key and self.fail_payload_key in json.dumps(payload, default=str):
            return {"text": "unstructured nonsense"}
        rng = _rng_for(self.seed, payload)
        constituents = payload.get("constituent_captions", ())
        base = "; ".join(c for c in constituents if c) or "an uneventful moment"
        n_tags = rng.randint(1, 2)
        tags = sorted(rng.sample(CORRELATION_TAGS[:7], n_tags))
        if payload.get("unimodal") == "visual-only":
            tags = ["visual-only"]
        elif payload.get("unimodal") == "audio-only":
            tags = ["audio-only"]
        return {
            "caption": f"Integrated: {base}",
            "correlation_tags": tags,
            "has_temporal_dynamics": rng.random() < 0.78,
        }


class StubJudge(ModelClient):
    """QA judging and AVC classification under one role.

    ``mode`` controls QA verdicts: "always_yes", or "exact" (yes iff the
    candidate equals the reference after case folding).
    """

    role = "judge_llm"

    def __init__(self, seed: int = 0, mode: str = "exact", retry: RetryPolicy = RetryPolicy()):
        super().__init__(retry)
        self.seed = seed
        if mode not in ("always_yes", "exact"):
            raise ValueError(f"unknown judge mode {mode!r}")
        self.mode = mode

    def _send(self, payload: dict) -> dict:
        kind = payload.get("kind")
        if kind == "qa_judge":
            if self.mode == "always_yes":
                return {"verdict": "yes", "score": 5}
            same = payload.get("candidate", "").strip().lower() == payload.get("reference", "").strip().lower()
            return {"verdict": "yes" if same else "no", "score": 5 if same else 1}
        if kind == "avc_classify":
            rng = _rng_for(self.seed, payload)
            caption = payload.get("caption", "")
            if not caption:
                raise ClientError("empty caption")
            tags = sorted(rng.sample(CORRELATION_TAGS[:7], rng.randint(1, 2)))
            return {"tags": tags, "has_temporal_dynamics": rng.random() < 0.78}
        raise ClientError(f"judge_llm: unknown request kind {kind!r}")

    def judge(self, question: str, reference: str, candidate: str) -> dict:
        return self.request(
            {"kind": "qa_judge", "question": question, "reference": reference, "candidate": candidate}
        )


class StubInstructionGenerator(ModelClient):
    """Stands in for the dialogue-writing LLM; same role as the integrator."""

    role = "integrator_llm"

    def __init__(self, seed: int = 0, retry: RetryPolicy = RetryPolicy(), malformed: bool = False):
        super().__init__(retry)
        self.seed = seed
        self.malformed = malformed

    def _send(self, payload: dict) -> dict:
        if self.malformed:
            return {"text": "not a dialogue"}
        rng = _rng_for(self.seed, payload)
        events = payload.get("events", ())
        dialogues = []
        for i in range(rng.randint(2, 4)):
            if events:
                ev = events[i % len(events)]
                question = f"What happens around {ev['start']:.1f} seconds?"
                answer = f"From {ev['start']} to {ev['end']}, {ev.get('caption') or 'an event unfolds'}."
            else:
                question = "What is this video about?"
                answer = "The video shows a sequence of events."
            dialogues.append({"turns": [
                {"role": "user", "text": question},
                {"role": "assistant", "text": answer},
            ]})
        return {"dialogues": dialogues}


class StubEmbedder(ModelClient):
    """Deterministic embeddings.

    mode "feature": feature rows are quantized to a grid and each bucket
    maps to a fixed random unit vector, so near-identical content embeds
    identically while distinct content is near-orthogonal (dim is large
    enough that stray cosines stay well under gate thresholds). mode
    "hash": an unrelated unit vector per payload.
    """

    role = "embedder"

    def __init__(self, seed: int = 0, dim: int = 256, mode: str = "feature", grid: float = 0.25, retry: RetryPolicy = RetryPolicy()):
        super().__init__(retry)
        self.seed = seed
        self.dim = dim
        self.grid = grid
        if mode not in ("feature", "hash"):
            raise ValueError(f"unknown embedder mode {mode!r}")
        self.mode = mode

    def _bucket_vector(self, bucket: tuple[int, ...]) -> np.ndarray:
        rng = np.random.default_rng(_payload_digest(self.seed, {"bucket": list(bucket)}) % (2**32))
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)

    def _send(self, payload: dict) -> dict:
        features = payload.get("features")
        if self.mode == "feature" and features is not None:
            vectors = []
            for f in features:
                bucket = tuple(int(round(x / self.grid)) for x in f)
                vectors.append(self._bucket_vector(bucket).tolist())
            return {"vectors": vectors}
        count = payload.get("count", 1)
        vectors = []
        for i in range(count):
            rng = np.random.default_rng(_payload_digest(self.seed, {**payload, "_i": i}) % (2**32))
            v = rng.standard_normal(self.dim)
            vectors.append((v / np.linalg.norm(v)).tolist())
        return {"vectors": vectors}

def embed_features(
    client: ModelClient,
    feature_rows: Sequence[Sequence[float]],
    item_span_s: Optional[float] = None,
) -> EmbeddingSeries:
    """Run feature rows through an embedder-role client into a series."""
    response = client.request({"features": [list(f) for f in feature_rows]})
    return EmbeddingSeries(vectors=np.asarray(response["vectors"]), item_span_s=item_span_s)


class HttpClient(ModelClient):
    """JSON-over-HTTP client for a live model endpoint."""

    def __init__(self, role: str, endpoint: str, timeout_s: float = 30.0, api_key: Optional[str] = None, retry: RetryPolicy = RetryPolicy(backoff_s=1.0)):
        super().__init__(retry)
        self.role = role
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self.api_key = api_key

    def _send(self, payload: dict) -> dict:
        import httpx

        headers = {"content-type": "application/json"}
        if self.api_key:
            headers["authorization"] = f"Bearer {self.api_key}"
        try:
            response = httpx.post(self.endpoint, json={"role": self.role, **payload}, headers=headers, timeout=self.timeout_s)
        except httpx.HTTPError as exc:
            raise ClientError(f"{self.role}: transport error: {exc}") from exc
        if response.status_code != 200:
            raise ClientError(f"{self.role}: endpoint returned {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise ClientError(f"{self.role}: non-JSON response") from exc

    def judge(self, question: str, reference: str, candidate: str) -> dict:
        return self.request(
            {"kind": "qa_judge", "question": question, "reference": reference, "candidate": candidate}
        )


@dataclass
class ClientSet:
    video_captioner: ModelClient
    keyframe_captioner: ModelClient
    audio_captioner: ModelClient
    asr: ModelClient
    integrator_llm: ModelClient
    judge_llm: ModelClient
    embedder: ModelClient


def stub_clients(seed: int = 0, judge_mode: str = "exact") -> ClientSet:
    return ClientSet(
        video_captioner=StubVideoCaptioner(seed),
        keyframe_captioner=StubKeyframeCaptioner(seed),
        audio_captioner=StubAudioCaptioner(seed),
        asr=StubAsr(seed),
        integrator_llm=StubIntegrator(seed),
        judge_llm=StubJudge(seed, mode=judge_mode),
        embedder=StubEmbedder(seed),
    )


def http_clients(endpoints: dict[str, str], timeout_s: float = 30.0, api_key: Optional[str] = None) -> ClientSet:
    missing = set(ROLES) - set(endpoints)
    if missing:
        raise ValueError(f"missing endpoints for roles: {sorted(missing)}")
    kwargs = {"timeout_s": timeout_s, "api_key": api_key}
    clients = {role: HttpClient(role, endpoints[role], **kwargs) for role in ROLES}
    return ClientSet(
        video_captioner=clients["video_captioner"],
        keyframe_captioner=clients["keyframe_captioner"],
        audio_captioner=clients["audio_captioner"],
        asr=clients["asr"],
        integrator_llm=clients["integrator_llm"],
        judge_llm=clients["judge_llm"],
        embedder=clients["embedder"],
    )
