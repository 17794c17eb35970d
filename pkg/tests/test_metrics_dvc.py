"""SODA story matching (with brute-force oracle) and DVC caption scores."""

import random

import pytest

from omnivale.manifest import TimeInterval
from omnivale.metrics.dvc import CaptionedEvent, eval_dvc, greedy_iou_matching, soda_f_score
from omnivale.metrics.grounding import iou


def _ev(start, end, caption="an event happens here"):
    return CaptionedEvent(TimeInterval(start, end), caption)


def _identity_scorer(a, b):
    return 1.0 if a == b else 0.0


def brute_force_soda(preds, refs, pair_scorer):
    """Enumerate every order-preserving one-to-one matching; max total."""
    n, m = len(preds), len(refs)

    def best(i, j):
        if i >= n or j >= m:
            return 0.0
        take = iou(preds[i].interval, refs[j].interval) * pair_scorer(preds[i].caption, refs[j].caption)
        return max(best(i + 1, j), best(i, j + 1), take + best(i + 1, j + 1))

    total = best(0, 0)
    if n == 0 or m == 0:
        return 0.0
    p, r = total / n, total / m
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


class TestSodaFScore:
    def test_perfect_match_is_one(self):
        events = [_ev(0.0, 5.0, "first"), _ev(5.0, 9.0, "second")]
        assert soda_f_score(events, events, _identity_scorer) == pytest.approx(1.0)

    def test_no_predictions_zero(self):
        assert soda_f_score([], [_ev(0.0, 5.0)]) == 0.0

    def test_crossed_order_scores_lower(self):
        refs = [_ev(0.0, 6.0, "alpha"), _ev(4.0, 10.0, "beta")]
        aligned = [_ev(0.0, 6.0, "alpha"), _ev(4.0, 10.0, "beta")]
        crossed = [_ev(0.0, 6.0, "beta"), _ev(4.0, 10.0, "alpha")]
        s_aligned = soda_f_score(aligned, refs, _identity_scorer)
        s_crossed = soda_f_score(crossed, refs, _identity_scorer)
        assert s_aligned == pytest.approx(1.0)
        # each crossed pair would score iou 0.2, but taking both would cross:
        # the ordered matching keeps one, so total 0.2, P = R = 0.1
        assert s_crossed == pytest.approx(0.1)
        assert s_crossed == pytest.approx(
            brute_force_soda(crossed, refs, _identity_scorer), abs=1e-12
        )

    def test_dp_equals_brute_force_on_random_instances(self):
        rng = random.Random(42)
        vocab = ["a man sings", "a dog barks", "rain falls", "a crowd cheers", "music plays"]
        for _ in range(60):
            def random_events():
                events = []
                cursor = 0.0
                for _ in range(rng.randint(0, 5)):
                    start = cursor + rng.random() * 3
                    end = start + 0.5 + rng.random() * 5
                    events.append(_ev(round(start, 3), round(end, 3), rng.choice(vocab)))
                    cursor = end
                return events

            preds, refs = random_events(), random_events()
            got = soda_f_score(preds, refs, _identity_scorer)
            want = brute_force_soda(preds, refs, _identity_scorer)
            assert got == pytest.approx(want, abs=1e-9)


class TestGreedyMatching:
    def test_best_iou_pairs(self):
        preds = [_ev(0.0, 10.0), _ev(20.0, 30.0)]
        refs = [_ev(0.0, 9.0), _ev(21.0, 30.0)]
        assert greedy_iou_matching(preds, refs) == [(0, 0), (1, 1)]

    def test_unmatched_when_disjoint(self):
        preds = [_ev(0.0, 5.0)]
        refs = [_ev(50.0, 60.0)]
        assert greedy_iou_matching(preds, refs) == [(0, None)]

    def test_one_to_one(self):
        preds = [_ev(0.0, 10.0), _ev(1.0, 10.0)]
        refs = [_ev(0.0, 10.0)]
        matches = dict(greedy_iou_matching(preds, refs))
        assert matches[0] == 0
        assert matches[1] is None


class TestEvalDvc:
    def test_perfect(self):
        events = {"v1": [_ev(0.0, 5.0, "a man sings a song"), _ev(5.0, 9.0, "a crowd cheers loudly")]}
        report = eval_dvc(events, events)
        assert report.soda_c > 0.9
        assert report.meteor > 0.9
        assert report.cider > 0.0

    def test_zero_predictions(self):
        refs = {"v1": [_ev(0.0, 5.0, "a man sings")]}
        report = eval_dvc({"v1": []}, refs)
        assert report.soda_c == 0.0
        assert report.cider == 0.0
        assert report.meteor == 0.0

    def test_unknown_video_error(self):
        with pytest.raises(ValueError, match="unknown videos"):
            eval_dvc({"zzz": []}, {"v1": []})

    def test_unmatched_predictions_drag_means_down(self):
        refs = {"v1": [_ev(0.0, 5.0, "a man sings")]}
        tight = eval_dvc({"v1": [_ev(0.0, 5.0, "a man sings")]}, refs)
        padded = eval_dvc(
            {"v1": [_ev(0.0, 5.0, "a man sings"), _ev(50.0, 60.0, "a man sings")]}, refs
        )
        assert padded.meteor < tight.meteor
