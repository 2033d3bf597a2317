import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtmlab import optimize_speed, prop2_bound, speed, std_normal_cdf, theta
from mtmlab.theory import ND_SATURATION, golden_section_max, log_speed, nd_schedule, theory_curve


def phi_oracle(z):
    mpmath.mp.dps = 40
    return float(mpmath.erfc(-mpmath.mpf(z) / mpmath.sqrt(2)) / 2)


def test_cdf_examples():
    assert std_normal_cdf(0.0) == 0.5
    assert 2 * std_normal_cdf(-0.5) == pytest.approx(0.6171, abs=1e-4)
    assert std_normal_cdf(-38.0) > 0.0


@settings(max_examples=300, deadline=None)
@given(st.floats(-38, 8))
def test_cdf_matches_high_precision(z):
    assert std_normal_cdf(z) == pytest.approx(phi_oracle(z), rel=1e-12, abs=1e-16)


def test_theta_examples():
    assert theta("gb", 0.5, 2.381) == pytest.approx(0.234, abs=5e-4)
    assert theta("sqrt", 1 / 6, 1.650) == pytest.approx(0.574, abs=5e-4)
    assert theta("gb", 0.6, 5.0) == 1.0
    with pytest.raises(ValueError):
        theta("gb", 0.4, 1.0)
    with pytest.raises(ValueError):
        theta("barker", 0.5, 1.0)


def test_speed_examples():
    for ell in (0.5, 1.0, 3.2):
        assert speed("sqrt", 0.5, ell) == ell * ell
    assert speed("gb", 0.5, 2.381) == pytest.approx(2 * 2.381**2 * phi_oracle(-1.1905), rel=1e-12)
    assert speed("gb", 0.5, 1e-6) == pytest.approx(1e-12, rel=1e-6)


@pytest.mark.parametrize("weight,tau", [("gb", 0.5), ("sqrt", 1 / 6)])
def test_theta_range_and_monotone(weight, tau):
    grid = np.linspace(1e-3, 20, 20_000)
    v = theta(weight, tau, grid)
    bad = grid[~((v > 0) & (v <= 1))]
    assert bad.size == 0, f"theta leaves (0, 1] from ell = {bad.min():.4g}"
    assert np.all(np.diff(v) < 0)


@pytest.mark.parametrize("weight", ["gb", "sqrt"])
def test_log_theta_finite_and_strictly_decreasing(weight):
    grid = np.linspace(1e-3, 20, 20_000)
    log_th = np.array([log_speed(weight, e) - 2 * math.log(e) for e in grid])
    assert np.all(np.isfinite(log_th)) and np.all(log_th <= 0)
    assert np.all(np.diff(log_th) < 0)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-6, 50))
def test_lb_speed_dominates_gb_speed(ell):
    assert speed("gb", 0.5, ell) <= speed("sqrt", 0.5, ell) == ell * ell


@pytest.mark.parametrize("weight,tau,ell,th", [("gb", 0.5, 2.381, 0.234), ("sqrt", 1 / 6, 1.650, 0.574)])
def test_optimum_values(weight, tau, ell, th):
    ell_star, th_star = optimize_speed(weight)
    assert ell_star == pytest.approx(ell, abs=1e-3)
    assert th_star == pytest.approx(th, abs=1e-3)
    # grid-scan oracle on 1e6 points
    grid = np.linspace(1e-3, 20, 1_000_000)
    assert ell_star == pytest.approx(grid[np.argmax(speed(weight, tau, grid))], abs=1e-3)


def test_optimum_is_local_max():
    ell_star, _ = optimize_speed("gb")
    s = speed("gb", 0.5, ell_star)
    assert speed("gb", 0.5, ell_star - 0.1) < s and speed("gb", 0.5, ell_star + 0.1) < s


def test_golden_section_on_quadratic():
    assert golden_section_max(lambda v: -(v - 1.234) ** 2, -5, 5, 1e-9) == pytest.approx(1.234, abs=1e-8)


def test_prop2_examples():
    assert prop2_bound(0.0, 1.0, 2) == pytest.approx(4 / 3, rel=1e-15)
    assert prop2_bound(100.0, 1.0, 50) < 1e-6


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 10), st.integers(1, 500))
def test_prop2_at_origin_at_least_one(sigma, d):
    assert prop2_bound(0.0, sigma, d) >= 1.0


def test_prop2_matches_high_precision():
    mpmath.mp.dps = 40
    n, s, d = mpmath.mpf(3), mpmath.mpf("0.7"), 20
    s2 = s * s
    a = 1 + s2
    ref = mpmath.exp(-n**2 * (s2 + s2**2) / (2 * a * (a * a - s2))) * (1 - s2 / a**2) ** (-mpmath.mpf(d) / 2)
    assert prop2_bound(3.0, 0.7, 20) == pytest.approx(float(ref), rel=1e-13)


def test_nd_schedule_examples():
    assert nd_schedule(0.5, 10, rho=0.5) == 1000
    mpmath.mp.dps = 50
    assert nd_schedule(1 / 6, 50, nu=0.1) == int(mpmath.ceil(mpmath.mpf("1.1") ** 50))
    assert nd_schedule(0.5, 4, rho=1e-9) >= 16
    assert nd_schedule(1 / 6, 10_000) == ND_SATURATION
    with pytest.raises(ValueError):
        nd_schedule(0.0, 3)


def test_theory_curves():
    grid = [0.5, 1.0, 2.0]
    c = theory_curve("speed-lb-half", grid)
    np.testing.assert_array_equal(c.values, np.square(grid))
    assert theory_curve("theta-gb", grid).parameters == {"weight": "gb", "tau": 0.5}
    with pytest.raises(ValueError):
        theory_curve("speed-barker", grid)
