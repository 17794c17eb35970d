"""Acceptance gate: one test per release criterion, at pinned tolerances.

Each criterion prints its own PASS line (run with -s or check -v output);
a failed assertion fails the criterion.
"""

import random
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import aud, make_record, omni, vis
from corpus import build_pipeline_corpus
from fusion_check import assert_fusion_invariants, random_fusion_case
from omnivale.aseg import AsegConfig, compute_mfcc, split_audio, transition_scores
from omnivale.cli import main
from omnivale.dialoggen import gen_boundary_dialogues
from omnivale.embeddings import EmbeddingSeries
from omnivale.filtergate import FilterConfig, av_consistency_gate, speech_dominance_gate, static_scene_gate
from omnivale.fuse import fuse_events
from omnivale.manifest import DatasetManifest, TimeInterval, read_manifest_file
from omnivale.mediaio import AudioTrack, FrameSequence, Transcript
from omnivale.metrics.coherence import StageBoundaries, mrsd, mrsd_report
from omnivale.metrics.dvc import CaptionedEvent, soda_f_score
from omnivale.metrics.grounding import eval_tvg, iou
from omnivale.metrics.parsing import parse_predictions
from omnivale.metrics.text import CiderD, caption_scores, tokenize
from omnivale.reviewd import ReviewStore, create_app
from test_metrics_dvc import brute_force_soda, _identity_scorer
from test_metrics_text import TOY_CORPUS, TOY_EXPECTED, _oracle_cider_d

SR = 16000


def _report(name: str, elapsed: float, budget: float | None = None):
    budget_note = f" ({elapsed:.2f}s < {budget:.0f}s)" if budget else f" ({elapsed:.2f}s)"
    print(f"ACCEPTANCE PASS: {name}{budget_note}")


# ---------------------------------------------------------------------------
# Criterion 1: filter thresholds exact, strict comparisons; < 1 s
# ---------------------------------------------------------------------------


def test_acceptance_filter_thresholds():
    start = time.monotonic()
    cfg = FilterConfig()

    # subtitle coverage 0.95 passes, 0.96 rejects (strict "over 95%")
    t95 = Transcript(segments=((TimeInterval(0.0, 95.0), "x"),))
    t96 = Transcript(segments=((TimeInterval(0.0, 96.0), "x"),))
    assert speech_dominance_gate(t95, 100.0, cfg).passed
    assert not speech_dominance_gate(t96, 100.0, cfg).passed

    # static fraction 0.80 passes, 0.81 rejects (strict "over 80%")
    rng = np.random.default_rng(0)
    def frames_with_static(n_static, n_dynamic):
        stack = np.concatenate(
            [np.full((n_static, 8, 8), 0.5), rng.uniform(size=(n_dynamic, 8, 8))]
        )
        return FrameSequence(fps=2.0, frames=stack, timestamps_s=np.arange(len(stack)) / 2.0)

    frames = frames_with_static(160, 40)  # 100 s at 2 fps
    scenes_80 = [TimeInterval(0.0, 80.0), TimeInterval(80.0, 100.0)]
    assert static_scene_gate(frames, scenes_80, cfg).passed
    frames81 = frames_with_static(162, 38)
    scenes_81 = [TimeInterval(0.0, 81.0), TimeInterval(81.0, 100.0)]
    assert not static_scene_gate(frames81, scenes_81, cfg).passed

    # AV similarity: exactly 0.25 rejects, 0.26 passes (strict "above 0.25")
    audio_vec = np.full(16, 0.25)  # norm exactly 1
    vis_25 = np.zeros(16)
    vis_25[0] = 1.0  # cosine = 0.25 exactly
    series_a = EmbeddingSeries(vectors=audio_vec[None, :])
    series_v25 = EmbeddingSeries(vectors=vis_25[None, :])
    assert not av_consistency_gate(series_a, series_v25, cfg).passed
    c = 0.26
    vis_26 = np.array([[c, np.sqrt(1 - c * c)] + [0.0] * 14])
    series_v26 = EmbeddingSeries(vectors=vis_26 / np.linalg.norm(vis_26))
    series_a2 = EmbeddingSeries(vectors=np.array([[1.0] + [0.0] * 15]))
    assert av_consistency_gate(series_a2, series_v26, cfg).passed

    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    _report("filter thresholds exact (0.95/0.96, 0.80/0.81, 0.25/0.26)", elapsed, 1.0)


# ---------------------------------------------------------------------------
# Criterion 2: audio segmentation oracle; < 5 s
# ---------------------------------------------------------------------------


def test_acceptance_audio_segmentation():
    start = time.monotonic()

    def tone(freq, duration):
        t = np.arange(int(SR * duration)) / SR
        return 0.5 * np.sin(2 * np.pi * freq * t)

    track = AudioTrack(
        sample_rate=SR,
        samples=np.concatenate([tone(440, 5.0), tone(880, 5.0), tone(220, 5.0)]),
    )
    cfg = AsegConfig()
    mfcc = compute_mfcc(track)
    scores = transition_scores(mfcc, cfg.window_s, track.duration_s)
    intervals = split_audio(scores, cfg, track.duration_s)
    assert len(intervals) == 3, f"expected exactly 3 events, got {intervals}"
    assert abs(intervals[0].end_s - 5.0) <= cfg.window_s + 1e-9
    assert abs(intervals[1].end_s - 10.0) <= cfg.window_s + 1e-9

    # stationarity: steady sine whose period divides the hop -> identical
    # frames -> rows constant within 1e-6 relative
    steady = AudioTrack(sample_rate=SR, samples=tone(500, 3.0))
    coeffs = compute_mfcc(steady).coefficients
    rel = np.abs(np.diff(coeffs, axis=0)).max() / np.abs(coeffs).max()
    assert rel < 1e-6, f"stationarity violated: {rel:.2e}"

    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    _report("audio segmentation oracle (3 tones -> 3 events, MFCC stationarity < 1e-6)", elapsed, 5.0)


# ---------------------------------------------------------------------------
# Criterion 3: fusion invariants on 10,000 randomized interval sets; < 10 s
# ---------------------------------------------------------------------------


def test_acceptance_fusion_invariants():
    start = time.monotonic()
    rng = random.Random(20260810)
    checked_empty_audio = 0
    for _ in range(10_000):
        visual, audio, duration = random_fusion_case(rng)
        report = fuse_events(visual, audio, duration)
        assert_fusion_invariants(visual, audio, report)
        if not audio:
            checked_empty_audio += 1
    assert checked_empty_audio > 0, "generator never produced the empty-audio case"
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    _report("fusion invariants on 10,000 randomized interval sets", elapsed, 10.0)


# ---------------------------------------------------------------------------
# Criterion 4: metric oracles; < 30 s
# ---------------------------------------------------------------------------


def test_acceptance_metric_oracles():
    start = time.monotonic()

    # IoU hand cases exact to 1e-9
    assert abs(iou(TimeInterval(2, 6), TimeInterval(2, 6)) - 1.0) < 1e-9
    assert iou(TimeInterval(0, 2), TimeInterval(3, 5)) == 0.0
    assert abs(iou(TimeInterval(2, 6), TimeInterval(4, 8)) - 2.0 / 6.0) < 1e-9

    # eval_tvg two-ref fixture -> (1.0, 0.5, 0.0, 0.475)
    refs = {"q1": TimeInterval(0.0, 10.0), "q2": TimeInterval(0.0, 10.0)}
    preds = {"q1": TimeInterval(0.0, 6.0), "q2": TimeInterval(0.0, 3.5)}
    report = eval_tvg(preds, refs)
    assert dict(report.recalls) == {0.3: 1.0, 0.5: 0.5, 0.7: 0.0}
    assert abs(report.miou - 0.475) < 1e-9

    # BLEU-4 / ROUGE-L exactly 1.0 on identical strings
    scores = caption_scores("a man sings a song on the stage", ["a man sings a song on the stage"])
    assert scores.bleu4 == pytest.approx(1.0, abs=1e-12)
    assert scores.rouge_l == pytest.approx(1.0, abs=1e-12)

    # CIDEr-D matches the independent hand computation within 1e-6
    items = [(tokenize(c), [tokenize(r) for r in refs_]) for c, refs_ in TOY_CORPUS]
    _, per_item = CiderD().compute(items)
    live_oracle = _oracle_cider_d(TOY_CORPUS)
    for got, frozen, live in zip(per_item, TOY_EXPECTED, live_oracle):
        assert abs(got - frozen) < 1e-6
        assert abs(got - live) < 1e-6

    # SODA DP equals brute-force enumeration on all generated instances <= 5/side
    rng = random.Random(7)
    vocab = ["a man sings", "a dog barks", "rain falls", "a crowd cheers"]
    for _ in range(120):
        def events():
            out, cursor = [], 0.0
            for _ in range(rng.randint(0, 5)):
                s = cursor + rng.random() * 4
                e = s + 0.5 + rng.random() * 6
                out.append(CaptionedEvent(TimeInterval(round(s, 3), round(e, 3)), rng.choice(vocab)))
                cursor = e
            return out

        p, r = events(), events()
        assert soda_f_score(p, r, _identity_scorer) == pytest.approx(
            brute_force_soda(p, r, _identity_scorer), abs=1e-9
        )

    elapsed = time.monotonic() - start
    assert elapsed < 30.0
    _report("metric oracles (IoU, TVG fixture, BLEU/ROUGE identity, CIDEr-D, SODA DP)", elapsed, 30.0)


# ---------------------------------------------------------------------------
# Criterion 5: MRSD unit cases + qualitative table ordering
# ---------------------------------------------------------------------------


def test_acceptance_mrsd():
    start = time.monotonic()

    def series(rows):
        arr = np.asarray(rows, dtype=np.float64)
        return EmbeddingSeries(
            vectors=arr / np.linalg.norm(arr, axis=1, keepdims=True), item_span_s=1.0
        )

    assert mrsd(series([[1.0, 0.0]] * 4)) == pytest.approx(0.0, abs=1e-12)
    assert mrsd(series([[1.0, 0.0], [0.0, 1.0]])) == pytest.approx(1.0, abs=1e-12)

    # synthetic piecewise-constant corpus: single-modal events align with
    # regimes; omni events span them. Expect omni MRSD >= single-modal MRSD
    # and stitched mean length > split mean length (the appendix pattern).
    regimes = [(6, [1.0, 0.0, 0.0]), (6, [0.0, 1.0, 0.0]), (8, [0.0, 0.0, 1.0])]
    rows = []
    for length, vec in regimes:
        rows.extend([vec] * length)
    per_second = series(rows)

    def provider(video_id, modality):
        return per_second

    stages = [
        StageBoundaries(
            video_id="v0",
            visual_split=(
                TimeInterval(0.0, 3.0),
                TimeInterval(3.0, 6.0),
                TimeInterval(6.0, 12.0),
                TimeInterval(12.0, 20.0),
            ),
            visual_stitch=(
                TimeInterval(0.0, 6.0),
                TimeInterval(6.0, 12.0),
                TimeInterval(12.0, 20.0),
            ),
            audio_split=(
                TimeInterval(0.0, 2.0),
                TimeInterval(2.0, 6.0),
                TimeInterval(6.0, 12.0),
                TimeInterval(12.0, 16.0),
                TimeInterval(16.0, 20.0),
            ),
            audio_stitch=(
                TimeInterval(0.0, 6.0),
                TimeInterval(6.0, 12.0),
                TimeInterval(12.0, 20.0),
            ),
            omni=(TimeInterval(0.0, 12.0), TimeInterval(12.0, 20.0)),
        )
    ]
    table = {r.stage: r for r in mrsd_report(stages, provider)}

    assert table["omni"].mean_mrsd_visual >= table["visual_split"].mean_mrsd_visual
    assert table["omni"].mean_mrsd_visual >= table["visual_stitch"].mean_mrsd_visual
    assert table["omni"].mean_mrsd_audio >= table["audio_split"].mean_mrsd_audio
    assert table["omni"].mean_mrsd_audio >= table["audio_stitch"].mean_mrsd_audio
    assert table["visual_stitch"].mean_length_s > table["visual_split"].mean_length_s
    assert table["audio_stitch"].mean_length_s > table["audio_split"].mean_length_s

    elapsed = time.monotonic() - start
    _report("MRSD unit cases + qualitative table ordering", elapsed)


# ---------------------------------------------------------------------------
# Criterion 6: dialogue generation ratio and round-trip
# ---------------------------------------------------------------------------


def test_acceptance_dialogues():
    start = time.monotonic()
    records = []
    for i in range(100):
        events = [
            omni(f"o{k}", k * 9.125 + 0.375, k * 9.125 + 7.5, caption=f"event {k} in video {i}")
            for k in range(3)
        ]
        records.append(make_record(f"v{i:03d}", duration_s=60.0, omni=events))
    manifest = DatasetManifest(records=tuple(records))

    dialogues = gen_boundary_dialogues(manifest, seed=20260810)
    kinds = [d.kind for d in dialogues]
    assert kinds.count("single_turn_dvc") == 20
    assert kinds.count("multi_turn") == 80

    source = {TimeInterval(k * 9.125 + 0.375, k * 9.125 + 7.5) for k in range(3)}
    for dialogue in dialogues:
        for turn in dialogue.turns:
            parsed = parse_predictions(turn.text, "dvc")
            for item in parsed.items:
                assert item.interval in source, f"round-trip drift: {item.interval}"

    elapsed = time.monotonic() - start
    _report("dialogue generation (20/100 single-turn, lossless round-trip)", elapsed)


# ---------------------------------------------------------------------------
# Criterion 7: end-to-end determinism on the synthetic fixture corpus
# ---------------------------------------------------------------------------


def test_acceptance_end_to_end_determinism(tmp_path):
    start = time.monotonic()
    corpus = tmp_path / "corpus"
    build_pipeline_corpus(corpus)

    def run(out_dir):
        out_dir.mkdir()
        chain = [
            ("filter", ["--corpus", str(corpus)]),
            ("segment-visual", ["--corpus", str(corpus)]),
            ("segment-audio", ["--corpus", str(corpus)]),
            ("fuse", []),
            ("caption", ["--corpus", str(corpus)]),
        ]
        prev = None
        for i, (command, extra) in enumerate(chain):
            out = out_dir / f"m{i}.jsonl"
            args = [command, *extra, "--output", str(out)]
            if prev is not None:
                args += ["--input", str(prev)]
            assert main(args) == 0
            prev = out
        return prev

    final_a = run(tmp_path / "a")
    final_b = run(tmp_path / "b")
    assert final_a.read_bytes() == final_b.read_bytes(), "runs are not byte-identical"

    manifest = read_manifest_file(final_a)
    for record in manifest.records:
        record.validate()
    # hand computation: vid_good 30 s fully covered by 3 events,
    # vid_absorb 20 s covered by 1 event -> coverage (30+20)/(30+20) = 1.0
    from omnivale.manifest import dataset_stats

    stats = dataset_stats(manifest)
    assert stats.coverage_fraction == pytest.approx(1.0)
    assert stats.video_count == 2
    assert stats.mean_events_per_video == pytest.approx(2.0)

    elapsed = time.monotonic() - start
    _report("end-to-end determinism (byte-identical manifests, stats match)", elapsed)


# ---------------------------------------------------------------------------
# Criterion 8: review service (replay, invariant rejection, conflicts)
# ---------------------------------------------------------------------------


def test_acceptance_review_service(tmp_path):
    start = time.monotonic()
    a0 = aud("a0", 2.0, 8.0)
    v0 = vis("v0", 0.0, 10.0)
    o0 = omni("o0", 0.0, 10.0, visual_ids=("v0",), audio_ids=("a0",), caption="event")
    manifest = DatasetManifest(
        records=(make_record("vid0", duration_s=30.0, visual=[v0], audio=[a0], omni=[o0]),)
    )
    log_path = tmp_path / "audit.jsonl"
    app = create_app(manifest, audit_log_path=str(log_path))
    client = TestClient(app)

    # invariant-violating correction rejected with the invariant named
    client.post("/events/vid0:o0/flag", json={"reason": "check", "base_revision": 0})
    bad = client.post(
        "/events/vid0:o0/correction",
        json={"base_revision": 1, "author": "x", "interval": [0.0, 5.0]},
    )
    assert bad.status_code == 422
    assert bad.json()["detail"]["invariant"] == "no-truncation"

    # concurrent corrections: exactly one wins
    good = client.post(
        "/events/vid0:o0/correction",
        json={"base_revision": 1, "author": "x", "interval": [0.0, 12.0]},
    )
    assert good.status_code == 200
    stale = client.post(
        "/events/vid0:o0/correction",
        json={"base_revision": 1, "author": "y", "interval": [0.0, 13.0]},
    )
    assert stale.status_code == 409

    client.post("/events/vid0:o0/approve", json={"base_revision": 2})

    # audit replay reproduces the exact state
    replayed = ReviewStore.replay(manifest, str(log_path))
    live = app.state.store
    assert {k: (i.state, i.revision) for k, i in replayed._items.items()} == {
        k: (i.state, i.revision) for k, i in live._items.items()
    }
    assert replayed.export_manifest() == live.export_manifest()
    exported = live.export_manifest()
    assert exported.get("vid0").omni_events[0].interval == TimeInterval(0.0, 12.0)
    assert exported.get("vid0").review_state == "approved"

    elapsed = time.monotonic() - start
    _report("review service (replay equivalence, invariant rejection, conflict)", elapsed)
