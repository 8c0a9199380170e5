import dataclasses
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlpforecast.bands import BandConfig, band_forecast, error_stats
from dlpforecast.errors import InvalidBand, InvalidThresholds
from dlpforecast.forecast import ForecastSeries
from dlpforecast.policy import (AccessDecision, Action, Basis, DecisionMode, Thresholds, assess,
                                classify_point, decide_action, rank_suspects, severity)

T = Thresholds(0, 1, 3)


class TestClassify:
    def test_normal_regime_below_80(self):
        assert classify_point(79, 0, 80) == (0, False)

    def test_boundary_allows(self):
        assert classify_point(80, 0, 80) == (0, False)

    def test_breach(self):
        assert classify_point(95, 0, 80) == (15, True)

    def test_under_use_is_benign(self):
        assert classify_point(-10, 0, 80) == (0, False)

    def test_invalid_band(self):
        with pytest.raises(InvalidBand):
            classify_point(1, 5, 4)


class TestDecideAction:
    @pytest.mark.parametrize("sev,expected", [
        (0, Action.ALLOW), (0.5, Action.ALERT), (1.0, Action.RESTRICT), (2.99, Action.RESTRICT),
        (3.0, Action.BLOCK), (3.2, Action.BLOCK),
    ])
    def test_ladder(self, sev, expected):
        assert decide_action(sev, T) is expected

    def test_invalid_thresholds(self):
        with pytest.raises(InvalidThresholds):
            Thresholds(0, 3, 1)
        with pytest.raises(InvalidThresholds):
            Thresholds(-1, 1, 3)

    @given(st.floats(0, 100), st.floats(0, 100))
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert decide_action(lo) <= decide_action(hi)


def test_severity_floor():
    assert severity(2.0, 4.0) == 0.5
    assert severity(1e-9, 0.0) == 1.0


def _decision(user, sev):
    return AccessDecision(user, 0, Basis.OBSERVED, 0.0, 0.0, 0.0, sev, sev, decide_action(sev))


class TestRanking:
    def test_single_clean_user(self):
        assert rank_suspects([_decision("u", 0.0)]) == [("u", 0.0)]

    def test_breach_outranks_clean(self):
        assert [u for u, _ in rank_suspects([_decision("b", 0.0), _decision("a", 2.0)])] == ["a", "b"]

    def test_ties_by_user_id_and_max_per_user(self):
        ds = [_decision("c", 1.0), _decision("b", 1.0), _decision("c", 0.2), _decision("a", 0.0)]
        assert rank_suspects(ds) == [("b", 1.0), ("c", 1.0), ("a", 0.0)]

    def test_permutation_invariance(self):
        rng = random.Random(0)
        ds = [_decision(f"u{rng.randint(0, 9)}", rng.choice([0.0, 0.5, 2.0, 7.0])) for _ in range(50)]
        ref = rank_suspects(ds)
        for _ in range(20):
            rng.shuffle(ds)
            assert rank_suspects(ds) == ref


def _banded(y, yhat, horizon_start, varsigma=2.0):
    fc = ForecastSeries("u", tuple(float(i) for i in range(len(yhat))), tuple(yhat), horizon_start)
    stats = error_stats(y[:horizon_start], yhat[:horizon_start])
    return band_forecast(fc, stats, BandConfig(varsigma=varsigma), y)


class TestAssess:
    def test_observed_and_forecast_rows(self):
        y = [10.0, 14.0, 10.0, 11.0]
        yhat = [11.0, 12.0, 11.0, 11.0, 30.0]
        b = _banded(y, yhat, 4)
        ds = assess(b)
        assert [d.observed_or_forecast for d in ds] == [Basis.OBSERVED] * 4 + [Basis.FORECAST]
        # period 1 exceeds its own upper bound; the forecast exceeds the training ceiling
        assert [d.breach for d in ds] == [False, True, False, False, True]
        ceiling = max(b.upper[:4])
        assert ds[4].upper == ceiling
        assert ds[4].excess == 30.0 - ceiling
        assert ds[4].severity == ds[4].excess / b.half_width

    def test_modes(self):
        b = _banded([10.0, 14.0, 10.0, 11.0], [11.0, 12.0, 11.0, 11.0, 30.0], 4)
        assert [d.breach for d in assess(b, DecisionMode.OBSERVED)] == [False, True, False, False, False]
        assert [d.breach for d in assess(b, DecisionMode.FORECAST)] == [False] * 4 + [True]

    def test_invariants(self):
        rng = random.Random(4)
        for _ in range(100):
            n = rng.randint(3, 12)
            y = [rng.uniform(0, 80) for _ in range(n)]
            yhat = [rng.uniform(0, 80) for _ in range(n + 3)]
            for d in assess(_banded(y, yhat, n)):
                assert (d.action is Action.ALLOW) == (d.excess == 0)
                assert (d.severity == 0) == (d.excess == 0)

    def test_zero_breach_identity(self):
        b = _banded([5.0, 5.0, 5.0], [5.0, 5.0, 5.0, 5.0], 3)
        ds = assess(b)
        assert all(d.action is Action.ALLOW for d in ds)
        assert rank_suspects(ds) == [("u", 0.0)]

    @given(st.lists(st.floats(0, 80), min_size=3, max_size=8), st.integers(0, 7), st.floats(0, 50))
    def test_raising_value_never_lowers_action(self, y, idx, bump):
        idx %= len(y)
        b = _banded(y, [40.0] * len(y), len(y))
        raised = list(y)
        raised[idx] += bump
        # the band stays fixed: only the judged value moves
        moved = dataclasses.replace(b, y=tuple(raised))
        assert assess(moved)[idx].action >= assess(b)[idx].action

    def test_wider_band_never_raises_action(self):
        rng = random.Random(9)
        for _ in range(50):
            n = rng.randint(3, 10)
            y = [rng.uniform(0, 80) for _ in range(n)]
            yhat = [rng.uniform(0, 80) for _ in range(n + 2)]
            prev = None
            for v in (0.5, 1.0, 2.0, 4.0, 8.0):
                acts = [d.action for d in assess(_banded(y, yhat, n, v))]
                if prev is not None:
                    assert all(a <= p for a, p in zip(acts, prev))
                prev = acts
