import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mtmlab import BalancingFunction, log_g, log_mean_weight, select_candidate
from mtmlab.weights import selection_probabilities


def test_log_g_examples():
    assert log_g("gb", 0.0) == 0.0
    assert log_g("sqrt", 2.0) == 1.0
    assert log_g("barker", 0.0) == pytest.approx(math.log(0.5), abs=1e-15)


@pytest.mark.parametrize("kind", ["sqrt", "barker"])
def test_local_balance_identity(kind):
    r = np.random.default_rng(0).uniform(-50, 50, 1000)
    assert np.max(np.abs((log_g(kind, r) - log_g(kind, -r)) - r)) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_gb_exact_and_barker_bounded(r):
    assert log_g("gb", r) == r
    b = log_g("barker", r)
    assert b <= 0.0 and math.isfinite(b)


def test_barker_matches_high_precision_and_tends_to_zero():
    mpmath.mp.dps = 40
    for r in (-800.0, -30.0, -1.0, 0.3, 5.0, 40.0, 800.0):
        exact = float(-mpmath.log1p(mpmath.exp(-mpmath.mpf(r))))
        assert log_g("barker", r) == pytest.approx(exact, rel=1e-13, abs=1e-300)
    assert log_g("barker", 1000.0) == 0.0 or abs(log_g("barker", 1000.0)) < 1e-300


def test_nan_rejected():
    with pytest.raises(ValueError):
        log_g("sqrt", float("nan"))
    with pytest.raises(ValueError):
        BalancingFunction.parse("uniform")


def _freqs(lw, n=100_000, seed=0):
    rng = np.random.default_rng(seed)
    counts = np.bincount([select_candidate(lw, rng) for _ in range(n)], minlength=len(lw))
    return counts / n


def test_select_candidate_examples():
    np.testing.assert_allclose(_freqs([0.0, 0.0, 0.0]), [1 / 3] * 3, atol=0.01)
    assert _freqs([0.0, math.log(3.0)])[1] == pytest.approx(0.75, abs=0.01)
    assert _freqs([-1e9, 0.0], n=100_000)[1] == 1.0


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 8), elements=st.floats(-50, 50)),
       st.floats(-1e5, 1e5))
def test_selection_probabilities_shift_invariant(lw, c):
    np.testing.assert_allclose(selection_probabilities(lw + c), selection_probabilities(lw), rtol=1e-9, atol=1e-15)


def test_selection_frequencies_shift_invariant_empirically():
    lw = np.array([0.2, -1.0, 1.3, 0.0])
    p = selection_probabilities(lw)
    f = _freqs(lw + 500.0, seed=3)
    se = np.sqrt(p * (1 - p) / 100_000)
    assert np.all(np.abs(f - p) <= 3 * se + 1e-12)


def test_log_mean_weight_examples():
    assert log_mean_weight([0.0, 0.0]) == 0.0
    assert log_mean_weight([math.log(2), math.log(4)]) == pytest.approx(math.log(3), abs=1e-15)
    mpmath.mp.dps = 50
    exact = float(mpmath.log((mpmath.exp(-1000) + 1) / 2))
    assert log_mean_weight([-1000.0, 0.0]) == pytest.approx(exact, abs=1e-15)


def test_log_weight_validation():
    for bad in ([], [np.nan], [np.inf, 0.0], [-np.inf, -np.inf]):
        with pytest.raises(ValueError):
            log_mean_weight(bad)
