import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtmlab import AdaptationConfig, MtmConfig, ScaleAdapter, product_normal, run_chain, update_scale
from mtmlab.adaptation import DEFAULT_TARGET_RATES, learning_rate
from mtmlab.weights import BalancingFunction


def test_examples():
    cfg = AdaptationConfig(target_rate=0.3)
    assert update_scale(1.7, 0.3, 5, cfg) == 1.7
    assert update_scale(1.7, 1.0, 5, cfg) > 1.7
    assert learning_rate(1) == 1.0
    with pytest.raises(ValueError):
        learning_rate(0)


def test_default_rates_per_weight():
    assert AdaptationConfig.for_weight("gb").target_rate == 0.25
    assert AdaptationConfig.for_weight("sqrt").target_rate == 0.5
    assert AdaptationConfig.for_weight("barker", 0.55).target_rate == 0.55
    assert DEFAULT_TARGET_RATES[BalancingFunction.BARKER] == 0.5


rates = st.floats(0.01, 0.99)


@settings(max_examples=500, deadline=None)
@given(st.floats(1e-3, 1e2), st.floats(0.0, 1.0), st.integers(1, 10**7), rates)
def test_direction_and_diminishing_step(ell, acc, m, target):
    cfg = AdaptationConfig(target_rate=target)
    new = update_scale(ell, acc, m, cfg)
    step = math.log(new) - math.log(ell)
    assert np.sign(step) == np.sign(acc - target) or step == 0.0
    assert abs(step) <= m**-0.6 + 1e-15


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=200))
def test_adapter_stays_within_clamps(accs):
    cfg = AdaptationConfig(ell_min=0.5, ell_max=4.0, initial_ell=2.0)
    a = ScaleAdapter(cfg)
    for acc in accs:
        assert 0.5 <= a.update(acc) <= 4.0
    assert a.m == len(accs)


def test_chain_records_adapted_scale():
    d = 5
    adapter = ScaleAdapter(AdaptationConfig.for_weight("sqrt", initial_ell=2.0))
    cfg = MtmConfig.from_ell(2.0, d, n_candidates=3, weight="sqrt")
    tr = run_chain(np.full(d, 3.0), cfg, product_normal(d), 50, 1, adapter=adapter)
    assert tr.scale_history[0] == 2.0
    assert tr.scale_history[-1] == adapter.ell
    ell = 2.0
    for m, acc in enumerate(tr.acc_probs, start=1):
        ell = update_scale(ell, acc, m, adapter.cfg)
    assert ell == pytest.approx(adapter.ell, rel=1e-12)


def adapted_ell(n_candidates, seed, n_steps=10_000, d=50):
    adapter = ScaleAdapter(AdaptationConfig.for_weight("gb"))
    cfg = MtmConfig.from_ell(adapter.ell, d, n_candidates=n_candidates, weight="gb")
    run_chain(np.full(d, 10.0), cfg, product_normal(d), n_steps, seed, adapter=adapter)
    return adapter.ell


def test_gb_large_n_collapses_scale_by_two_orders():
    """GB, d=50, start (10,...,10): ell at m=1e4 for N=500 is <= 1/100 of that for N=5."""
    small = adapted_ell(5, 1)
    large = adapted_ell(500, 1)
    assert large <= small / 100.0, f"ell(N=5)={small:.4g}, ell(N=500)={large:.4g}, ratio={small / large:.3g}"
