"""MRSD unit cases and the per-stage coherence report."""

import numpy as np
import pytest

from omnivale.embeddings import EmbeddingSeries
from omnivale.manifest import InvariantError, TimeInterval
from omnivale.metrics.coherence import StageBoundaries, event_mrsd, mrsd, mrsd_report


def _series(rows):
    arr = np.asarray(rows, dtype=np.float64)
    return EmbeddingSeries(vectors=arr / np.linalg.norm(arr, axis=1, keepdims=True), item_span_s=1.0)


class TestMrsd:
    def test_constant_zero(self):
        assert mrsd(_series([[1.0, 0.0]] * 5)) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pair_one(self):
        assert mrsd(_series([[1.0, 0.0], [0.0, 1.0]])) == pytest.approx(1.0, abs=1e-12)

    def test_max_of_neighbor_diffs(self):
        # adjacent cosines 0.9, 0.5, 0.8 -> max diff = 0.5
        def unit(angle):
            return [np.cos(angle), np.sin(angle)]

        angles = [0.0]
        for cos_value in (0.9, 0.5, 0.8):
            angles.append(angles[-1] + np.arccos(cos_value))
        series = _series([unit(a) for a in angles])
        assert mrsd(series) == pytest.approx(0.5, abs=1e-9)

    def test_needs_two_vectors(self):
        with pytest.raises(InvariantError):
            mrsd(_series([[1.0, 0.0]]))

    def test_rotation_invariance(self):
        rng = np.random.default_rng(0)
        vecs = rng.standard_normal((6, 4))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        # random orthogonal matrix via QR
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        rotated = vecs @ q.T
        a = mrsd(EmbeddingSeries(vectors=vecs, item_span_s=1.0))
        b = mrsd(EmbeddingSeries(vectors=rotated, item_span_s=1.0))
        assert a == pytest.approx(b, abs=1e-9)


class TestEventMrsd:
    def test_event_spanning_regime_change(self):
        vecs = [[1.0, 0.0]] * 5 + [[0.0, 1.0]] * 5
        series = _series(vecs)
        inside = event_mrsd(series, TimeInterval(0.0, 5.0))
        spanning = event_mrsd(series, TimeInterval(2.0, 8.0))
        assert inside == pytest.approx(0.0, abs=1e-12)
        assert spanning == pytest.approx(1.0, abs=1e-12)

    def test_sub_two_second_event_is_none(self):
        series = _series([[1.0, 0.0]] * 5)
        assert event_mrsd(series, TimeInterval(1.0, 1.5)) is None


def _piecewise_provider(regimes):
    """Per-second embeddings constant within regimes (list of (length_s, vec))."""
    rows = []
    for length, vec in regimes:
        rows.extend([vec] * length)
    series = _series(rows)

    def provider(video_id, modality):
        return series

    return provider


class TestMrsdReport:
    def test_aligned_events_score_zero_and_spanning_events_dont(self):
        provider = _piecewise_provider([(10, [1.0, 0.0]), (10, [0.0, 1.0])])
        stages = [
            StageBoundaries(
                video_id="v",
                visual_split=(TimeInterval(0.0, 10.0), TimeInterval(10.0, 20.0)),
                visual_stitch=(TimeInterval(0.0, 10.0), TimeInterval(10.0, 20.0)),
                audio_split=(TimeInterval(0.0, 10.0), TimeInterval(10.0, 20.0)),
                audio_stitch=(TimeInterval(0.0, 10.0), TimeInterval(10.0, 20.0)),
                omni=(TimeInterval(0.0, 20.0),),
            )
        ]
        rows = {r.stage: r for r in mrsd_report(stages, provider)}
        assert rows["visual_split"].mean_mrsd_visual == pytest.approx(0.0, abs=1e-12)
        assert rows["audio_stitch"].mean_mrsd_audio == pytest.approx(0.0, abs=1e-12)
        # the omni event crosses the regime boundary: strictly higher
        assert rows["omni"].mean_mrsd_visual == pytest.approx(1.0, abs=1e-12)
        assert rows["omni"].mean_mrsd_audio == pytest.approx(1.0, abs=1e-12)
        assert rows["omni"].mean_length_s == pytest.approx(20.0)
        assert rows["visual_split"].mean_length_s == pytest.approx(10.0)

    def test_stitch_lengthens_events(self):
        provider = _piecewise_provider([(20, [1.0, 0.0])])
        stages = [
            StageBoundaries(
                video_id="v",
                visual_split=(TimeInterval(0.0, 5.0), TimeInterval(5.0, 10.0)),
                visual_stitch=(TimeInterval(0.0, 10.0),),
            )
        ]
        rows = {r.stage: r for r in mrsd_report(stages, provider)}
        assert rows["visual_stitch"].mean_length_s > rows["visual_split"].mean_length_s
