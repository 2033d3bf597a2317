"""Robbins-Monro tuning of the scale parameter toward a target acceptance rate.

log ell_{m+1} = log ell_m + m^{-a} (alpha_m - target), clamped to
[ell_min, ell_max], where alpha_m is the acceptance probability of step m.
"""
import math
from dataclasses import dataclass
from typing import Optional

from .weights import BalancingFunction

DEFAULT_TARGET_RATES = {
    BalancingFunction.GB: 0.25,
    BalancingFunction.SQRT: 0.50,
    BalancingFunction.BARKER: 0.50,
}


@dataclass(frozen=True)
class AdaptationConfig:
    target_rate: float = 0.25
    learning_exponent: float = 0.6
    ell_min: float = 1e-6
    ell_max: float = 1e3
    initial_ell: float = 2.38

    def __post_init__(self):
        if not 0.0 < self.target_rate < 1.0:
            raise ValueError("target_rate must lie in (0, 1)")
        if not 0.0 < self.ell_min < self.ell_max:
            raise ValueError("need 0 < ell_min < ell_max")
        if not self.initial_ell > 0:
            raise ValueError("initial_ell must be positive")
        if self.learning_exponent <= 0:
            raise ValueError("learning_exponent must be positive")

    @classmethod
    def for_weight(cls, weight, target_rate: Optional[float] = None, **kwargs):
        weight = BalancingFunction.parse(weight)
        rate = DEFAULT_TARGET_RATES[weight] if target_rate is None else target_rate
        return cls(target_rate=rate, **kwargs)


def learning_rate(m, exponent=0.6):
    if m < 1:
        raise ValueError("iteration index starts at 1")
    return float(m) ** (-exponent)


def update_scale(ell, acc_prob, m, cfg):
    if not ell > 0:
        raise ValueError("ell must be positive")
    step = learning_rate(m, cfg.learning_exponent) * (acc_prob - cfg.target_rate)
    return min(max(ell * math.exp(step), cfg.ell_min), cfg.ell_max)


class ScaleAdapter:
    """Holds the current ell of one chain and applies ``update_scale``."""

    def __init__(self, cfg: AdaptationConfig):
        self.cfg = cfg
        self.ell = cfg.initial_ell
        self.m = 0

    def update(self, acc_prob):
        self.m += 1
        self.ell = update_scale(self.ell, acc_prob, self.m, self.cfg)
        return self.ell
