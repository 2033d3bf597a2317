import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from mtmlab import IdealConfig, ideal_gb_acc_prob, ideal_gb_propose, ideal_lb_sqrt_step, product_normal
from mtmlab.ideal import (
    IdealSchemeError,
    ideal_gb_step,
    ideal_lb_sqrt_acc_prob,
    ideal_lb_sqrt_propose,
    ideal_log_proposal_density,
)
from mtmlab.targets import product_laplace


def lb_normaliser(x, sigma):
    """Z(x) = integral of sqrt(pi(y)/pi(x)) phi_sigma(y - x) dy by adaptive quadrature."""
    f = lambda y: math.exp(0.25 * (x * x - y * y)) * stats.norm.pdf(y, x, sigma)
    val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)
    return val


def lb_moment(x, sigma, k):
    z = lb_normaliser(x, sigma)
    f = lambda y: y**k * math.exp(0.25 * (x * x - y * y)) * stats.norm.pdf(y, x, sigma) / z
    val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)
    return val


def test_lb_closed_form_moments_match_quadrature():
    for x, sigma in [(0.0, 1.0), (1.5, 0.4), (-3.0, 2.0)]:
        s2 = sigma * sigma
        mean = lb_moment(x, sigma, 1)
        var = lb_moment(x, sigma, 2) - mean**2
        assert mean == pytest.approx(2 * x / (2 + s2), abs=1e-9)
        assert var == pytest.approx(2 * s2 / (2 + s2), abs=1e-9)


def test_lb_acceptance_matches_quadrature_normalisers():
    # pi(y) Q(y, x) / (pi(x) Q(x, y)) reduces to Z(x) / Z(y)
    x, y, sigma = 1.0, 0.5, 1.0
    oracle = min(1.0, lb_normaliser(x, sigma) / lb_normaliser(y, sigma))
    assert ideal_lb_sqrt_acc_prob([x], [y], sigma) == pytest.approx(oracle, abs=1e-8)


def test_gb_proposal_examples():
    rng = np.random.default_rng(0)
    draws = np.array([ideal_gb_propose(np.zeros(1), 1.0, rng)[0] for _ in range(100_000)])
    assert draws.var() == pytest.approx(0.5, abs=0.01)
    y = ideal_gb_propose(np.full(4, 2.0), 1e-6, rng)
    assert np.max(np.abs(y - 2.0)) < 1e-5
    ys = np.array([ideal_gb_propose(np.array([3.0]), 1.0, rng)[0] for _ in range(100_000)])
    assert ys.mean() == pytest.approx(1.5, abs=0.01)


def test_gb_acceptance_examples():
    assert ideal_gb_acc_prob([1.0, 2.0], [1.0, 2.0], 0.7) == 1.0
    assert ideal_gb_acc_prob([2.0], [0.0], 1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert ideal_gb_acc_prob([0.0], [2.0], 1.0) == 1.0


@settings(max_examples=1000, deadline=None)
@given(st.lists(st.floats(-6, 6), min_size=3, max_size=3), st.lists(st.floats(-6, 6), min_size=3, max_size=3),
       st.floats(0.05, 3.0))
def test_gb_acceptance_equals_generic_ratio(x, y, sigma):
    x, y = np.array(x), np.array(y)
    s2 = sigma * sigma
    # Z(x) = integral of pi(y) phi_sigma(y - x) dy = N(x; 0, (1 + s2) I)
    log_z = lambda v: float(np.sum(stats.norm.logpdf(v, 0.0, math.sqrt(1 + s2))))
    oracle = min(1.0, math.exp(log_z(x) - log_z(y)))
    assert ideal_gb_acc_prob(x, y, sigma) == pytest.approx(oracle, abs=1e-10)
    t = product_normal(3)
    generic = (t.log_density(y) + ideal_log_proposal_density("gb", y, x, sigma)
               - t.log_density(x) - ideal_log_proposal_density("gb", x, y, sigma))
    assert ideal_gb_acc_prob(x, y, sigma) == pytest.approx(min(1.0, math.exp(generic)), abs=1e-10)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-6, 6), min_size=2, max_size=2), st.lists(st.floats(-6, 6), min_size=2, max_size=2),
       st.floats(0.05, 3.0))
def test_lb_acceptance_equals_generic_ratio(x, y, sigma):
    x, y = np.array(x), np.array(y)
    t = product_normal(2)
    generic = (t.log_density(y) + ideal_log_proposal_density("sqrt", y, x, sigma)
               - t.log_density(x) - ideal_log_proposal_density("sqrt", x, y, sigma))
    assert ideal_lb_sqrt_acc_prob(x, y, sigma) == pytest.approx(min(1.0, math.exp(generic)), abs=1e-10)


def test_lb_step_examples():
    t = product_normal(1)
    rng = np.random.default_rng(3)
    ys = np.array([ideal_lb_sqrt_step(np.zeros(1), 1.0, t, rng).proposal[0] for _ in range(100_000)])
    assert ys.var() == pytest.approx(2 / 3, abs=0.01)
    assert ideal_lb_sqrt_acc_prob([0.3, 0.1], [0.3, 0.1], 1.0) == 1.0


def test_gb_step_and_batched_propose_shapes():
    t = product_normal(4)
    out = ideal_gb_step(np.ones(4), 0.5, t, np.random.default_rng(1))
    assert out.proposal.shape == (4,) and 0 <= out.acc_prob <= 1
    assert ideal_lb_sqrt_propose(np.ones((3, 4)), 0.5, np.random.default_rng(1)).shape == (3, 4)


def flow_counts(weight, seed, n=2_000_000, always_accept=False):
    t = product_normal(1)
    cfg = IdealConfig(weight, 1.0)
    rng = np.random.default_rng(seed)
    xs = t.sample_exact(rng, n)
    res = cfg.cycle(xs, t.log_density_batch(xs), t, rng)
    acc = np.ones(n, dtype=bool) if always_accept else res.accepted
    xn = np.where(acc[:, None], res.proposal, xs)[:, 0]
    edges = np.linspace(-4, 4, 41)
    keep = (np.abs(xs[:, 0]) < 4) & (np.abs(xn) < 4)
    counts, _, _ = np.histogram2d(xs[keep, 0], xn[keep], bins=[edges, edges])
    iu = np.triu_indices(40, 1)
    a, b = counts[iu], counts.T[iu]
    m = (a + b) > 0
    return a[m], b[m]


def symmetry_checks(a, b):
    z = np.abs(a - b) / np.sqrt(a + b)
    # per-entry 3 s.e.; exceedances may not go beyond what chance allows
    allowed = stats.binom.ppf(0.99, a.size, 2 * stats.norm.sf(3.0))
    bowker_p = stats.chi2.sf(np.sum(z * z), a.size)
    return int(np.sum(z > 3)), allowed, bowker_p


@pytest.mark.parametrize("weight", ["gb", "sqrt"])
def test_detailed_balance_flow_matrix(weight):
    """F(a, b) = P(X in a, X' in b) is symmetric on 40 bins of [-4, 4]."""
    over, allowed, p = symmetry_checks(*flow_counts(weight, 8))
    assert over <= allowed
    assert p > 0.01


def test_flow_check_detects_non_reversible_kernel():
    # accepting every ideal proposal breaks pi-reversibility
    over, allowed, p = symmetry_checks(*flow_counts("gb", 8, always_accept=True))
    assert over > allowed and p < 1e-6


def test_ideal_requires_normal_and_known_weight():
    with pytest.raises(IdealSchemeError):
        IdealConfig("barker", 1.0)
    with pytest.raises(IdealSchemeError):
        IdealConfig("gb", 1.0).cycle(np.zeros((1, 2)), np.zeros(1), product_laplace(2), np.random.default_rng(0))
