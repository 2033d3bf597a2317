"""Ideal Metropolis-Hastings schemes for the standard-normal product target.

The ideal proposal draws y with density proportional to w(x, y) q_sigma(x, y).
For the normal product and a factorising weight this is Gaussian per
coordinate:

* GB, w = pi(y)/pi(x):        mean x / (1 + s2),     variance s2 / (1 + s2)
* sqrt, w = sqrt(pi(y)/pi(x)): mean 2x / (2 + s2),    variance 2 s2 / (2 + s2)

with s2 = sigma^2. The MH ratio pi(y) Q(y, x) / (pi(x) Q(x, y)) then reduces to

* GB:   exp((|y|^2 - |x|^2) / (2 (1 + s2)))
* sqrt: exp((|x|^2 - |y|^2) s2 / (4 (2 + s2)))

The sqrt case follows from completing the square in -y^2/4 - (y - x)^2/(2 s2);
its normalising constant is exp(-x^2 / (2 (2 + s2))) up to factors free of x.
"""
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import kernels
from .mtm import CycleResult, MtmStepOutcome, _empty_weights, _outcome_from_cycle, _start
from .targets import PRODUCT_NORMAL
from .weights import BalancingFunction


class IdealSchemeError(ValueError):
    """Ideal scheme requested where no closed form exists."""


def _shrink_and_var(weight, sigma):
    s2 = sigma * sigma
    if weight is BalancingFunction.GB:
        return 1.0 / (1.0 + s2), s2 / (1.0 + s2)
    if weight is BalancingFunction.SQRT:
        return 2.0 / (2.0 + s2), 2.0 * s2 / (2.0 + s2)
    raise IdealSchemeError(f"no closed-form ideal scheme for weight {weight.value!r}")


def _log_acc_from_sq(weight, sq_x, sq_y, sigma):
    s2 = sigma * sigma
    if weight is BalancingFunction.GB:
        la = (sq_y - sq_x) / (2.0 * (1.0 + s2))
    else:
        la = (sq_x - sq_y) * s2 / (4.0 * (2.0 + s2))
    return np.minimum(0.0, la)


def ideal_gb_propose(x, sigma, rng):
    """Draw from the GB ideal proposal: x/(1+s2) + sqrt(s2/(1+s2)) U."""
    x = np.asarray(x, dtype=np.float64)
    shrink, var = _shrink_and_var(BalancingFunction.GB, sigma)
    return shrink * x + math.sqrt(var) * rng.standard_normal(x.shape)


def ideal_gb_acc_prob(x, y, sigma):
    """1 ^ exp((|y|^2 - |x|^2) / (2 (1 + sigma^2)))."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    la = _log_acc_from_sq(
        BalancingFunction.GB, kernels.row_sq_norms(x), kernels.row_sq_norms(y), sigma
    )
    out = np.exp(la)
    return float(out[0]) if out.size == 1 else out


def ideal_lb_sqrt_propose(x, sigma, rng):
    x = np.asarray(x, dtype=np.float64)
    shrink, var = _shrink_and_var(BalancingFunction.SQRT, sigma)
    return shrink * x + math.sqrt(var) * rng.standard_normal(x.shape)


def ideal_lb_sqrt_acc_prob(x, y, sigma):
    """1 ^ exp((|x|^2 - |y|^2) sigma^2 / (4 (2 + sigma^2)))."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    la = _log_acc_from_sq(
        BalancingFunction.SQRT, kernels.row_sq_norms(x), kernels.row_sq_norms(y), sigma
    )
    out = np.exp(la)
    return float(out[0]) if out.size == 1 else out


def ideal_log_proposal_density(weight, x, y, sigma):
    """log Q_{w,sigma}(x, y) (normalised) for the normal product target."""
    weight = BalancingFunction.parse(weight)
    shrink, var = _shrink_and_var(weight, sigma)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r = y - shrink * x
    d = x.shape[-1]
    return -0.5 * np.sum(r * r, axis=-1) / var - 0.5 * d * math.log(2.0 * math.pi * var)


@dataclass(frozen=True)
class IdealConfig:
    """Ideal scheme with weight ``gb`` or ``sqrt`` and scale sigma."""

    weight: BalancingFunction
    scale: float
    ell: Optional[float] = None
    tau: Optional[float] = None

    def __post_init__(self):
        w = BalancingFunction.parse(self.weight)
        object.__setattr__(self, "weight", w)
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        _shrink_and_var(w, self.scale)

    @classmethod
    def from_ell(cls, weight, ell, dim, tau=0.5):
        return cls(weight, ell / dim**tau, ell=ell, tau=tau)

    def with_ell(self, ell, dim):
        tau = 0.5 if self.tau is None else self.tau
        return replace(self, scale=ell / dim**tau, ell=ell, tau=tau)

    @property
    def label(self):
        return "ideal-gb" if self.weight is BalancingFunction.GB else "ideal-lb-sqrt"

    def cycle(self, x, lp_x, target, rng, executor=None, keep_candidates=False):
        if target.kind != PRODUCT_NORMAL:
            raise IdealSchemeError("ideal schemes are defined for the normal product target only")
        n, d = x.shape
        shrink, var = _shrink_and_var(self.weight, self.scale)
        y = shrink * x + math.sqrt(var) * rng.standard_normal((n, d))
        sq_x = kernels.row_sq_norms(x)
        sq_y = kernels.row_sq_norms(y)
        acc = np.exp(_log_acc_from_sq(self.weight, sq_x, sq_y, self.scale))
        accepted = rng.random(n) < acc
        return CycleResult(
            proposal=y,
            proposal_log_density=target.log_density_batch(y),
            selected_index=np.zeros(n, dtype=np.int64),
            acc_prob=acc,
            accepted=accepted,
            candidate_log_weights=_empty_weights(n),
            shadow_log_weights=_empty_weights(n),
        )


def _ideal_step(weight, x, sigma, target, rng):
    cfg = IdealConfig(weight, sigma)
    x, lp_x = _start(x, target)
    res = cfg.cycle(x[None, :], np.array([lp_x]), target, rng)
    return _outcome_from_cycle(x, lp_x, res)


def ideal_gb_step(x, sigma, target, rng):
    return _ideal_step(BalancingFunction.GB, x, sigma, target, rng)


def ideal_lb_sqrt_step(x, sigma, target, rng) -> MtmStepOutcome:
    """One MH step of the ideal scheme with w = sqrt(pi(y)/pi(x))."""
    return _ideal_step(BalancingFunction.SQRT, x, sigma, target, rng)
