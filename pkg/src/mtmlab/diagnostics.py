"""Monte Carlo estimators of acceptance, jumping distance and discrepancies.

All estimators average i.i.d. replications of a single proposal cycle. The
replications are processed in fixed-size blocks; block ``b`` draws from the
counter-based stream ``Streams(seed).block(b)``, so an estimate depends only on
(seed, n_samples, sampler, target).
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .ideal import _log_acc_from_sq, _shrink_and_var
from .rng import Streams
from .targets import PRODUCT_NORMAL, UnsupportedTargetError
from .weights import BalancingFunction

_BLOCK_BUDGET = 1 << 21  # floats per candidate array
_MAX_BLOCK = 8192


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n_samples: int

    @classmethod
    def from_values(cls, values):
        values = np.asarray(values, dtype=np.float64)
        n = values.size
        if n < 1:
            raise ValueError("no samples")
        # a single sample reports a standard error of 0
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(values.mean()), se, int(n))

    def joint_se(self, other):
        return math.hypot(self.std_error, other.std_error)


def _seed_of(rng):
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63 - 1))
    return int(rng)


def block_rows(sampler, dim):
    n_cand = int(getattr(sampler, "n_candidates", 1))
    return int(max(1, min(_MAX_BLOCK, _BLOCK_BUDGET // (n_cand * dim))))


def _blocked(n_samples, rows, seed, fn):
    if int(n_samples) < 1:
        raise ValueError("n_samples must be >= 1")
    streams = Streams(seed)
    out = []
    left, b = int(n_samples), 0
    while left > 0:
        k = min(rows, left)
        out.append(fn(k, streams.block(b)))
        left -= k
        b += 1
    return np.concatenate(out)


def _require_exact(target):
    if not target.is_product:
        raise UnsupportedTargetError("stationary estimators need exact sampling from the target")


def expected_acceptance_at(x, sampler, target, n_samples, rng):
    """Mean acceptance probability of one cycle started at the fixed state ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (target.dim,):
        raise ValueError(f"state must have shape ({target.dim},)")
    lp_x = float(target.log_density_batch(x[None, :])[0])

    def block(k, gen):
        xs = np.broadcast_to(x, (k, target.dim))
        res = sampler.cycle(np.ascontiguousarray(xs), np.full(k, lp_x), target, gen)
        return res.acc_prob

    vals = _blocked(n_samples, block_rows(sampler, target.dim), _seed_of(rng), block)
    return EstimateWithError.from_values(vals)


def _stationary(sampler, target, n_samples, rng, reducer):
    _require_exact(target)

    def block(k, gen):
        xs = target.sample_exact(gen, k)
        lp = target.log_density_batch(xs)
        res = sampler.cycle(xs, lp, target, gen)
        return reducer(xs, res)

    vals = _blocked(n_samples, block_rows(sampler, target.dim), _seed_of(rng), block)
    return EstimateWithError.from_values(vals)


def stationary_acceptance_rate(sampler, target, n_samples, rng):
    """E[alpha(X, Y)] with X drawn exactly from the target."""
    return _stationary(sampler, target, n_samples, rng, lambda xs, res: res.acc_prob)


def esjd(sampler, target, n_samples, rng):
    """E[|Y_J - X|^2 alpha(X, Y_J)] with X drawn exactly from the target."""

    def jump(xs, res):
        return kernels.row_sq_norms(res.proposal - xs) * res.acc_prob

    return _stationary(sampler, target, n_samples, rng, jump)


def convergence_time(trace, threshold):
    """First m with |X(m)| <= threshold, or None when the chain never gets there.

    ``trace`` is a ``ChainTrace`` or an array of norms.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    norms = trace.norms if hasattr(trace, "norms") else np.asarray(trace, dtype=np.float64)
    if norms.size == 0:
        raise ValueError("empty trace")
    hit = np.flatnonzero(norms <= threshold)
    return int(hit[0]) if hit.size else None


def log_conditional_mean_weight(weight, x, sigma):
    """log E[w(x, Y) | x] for Y ~ N(x, sigma^2 I) under the normal product target."""
    weight = BalancingFunction.parse(weight)
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    d = x.shape[1]
    sq = kernels.row_sq_norms(x)
    s2 = sigma * sigma
    if weight is BalancingFunction.GB:
        return -0.5 * d * math.log1p(s2) + sq * s2 / (2.0 * (1.0 + s2))
    if weight is BalancingFunction.SQRT:
        return -0.5 * d * math.log1p(0.5 * s2) + sq * s2 / (4.0 * (2.0 + s2))
    raise ValueError(f"no closed-form conditional mean for weight {weight.value!r}")


def normalization_discrepancy_from_log_weights(lw, log_cond_mean):
    """|w_1 / mean_i(w_i) - w_1 / E[w | x]| per row of log weights ``lw`` (n, N)."""
    lw = np.atleast_2d(np.asarray(lw, dtype=np.float64))
    n_cand = lw.shape[1]
    log_mean = kernels.row_logsumexp(lw) - math.log(n_cand)
    first = lw[:, 0]
    return np.abs(np.exp(first - log_mean) - np.exp(first - np.asarray(log_cond_mean)))


def _require_normal(target):
    if target.kind != PRODUCT_NORMAL:
        raise UnsupportedTargetError("closed-form comparisons need the normal product target")


def weight_normalization_discrepancy(cfg, target, n_samples, rng):
    """E|w_1/((1/N) sum w_i) - w_1/E[w|X]| with X ~ pi, Y_i ~ N(X, sigma^2 I).

    The d^{2 tau} prefactor is left to the caller.
    """
    _require_normal(target)
    log_conditional_mean_weight(cfg.weight, np.zeros((1, target.dim)), cfg.scale)
    n_cand, sigma, code = int(cfg.n_candidates), cfg.scale, cfg.weight.code

    def block(k, gen):
        xs = target.sample_exact(gen, k)
        ys = xs[:, None, :] + sigma * gen.standard_normal((k, n_cand, target.dim))
        lp_x = target.log_density_batch(xs)
        lp_y = target.log_density_batch(ys)
        lw = kernels.log_g(code, lp_y - lp_x[:, None])
        return normalization_discrepancy_from_log_weights(
            lw, log_conditional_mean_weight(cfg.weight, xs, sigma)
        )

    vals = _blocked(n_samples, block_rows(cfg, target.dim), _seed_of(rng), block)
    return EstimateWithError.from_values(vals)


def proposal_mean_discrepancy(cfg, target, n_samples, rng, x=None):
    """E|E[Y_J | Y_{1:N}] - E_ideal[Y | X]| between MTM and the ideal proposal.

    The inner expectation is the selection-weighted candidate mean, which
    removes the selection noise; X ~ pi unless a fixed ``x`` is given.
    """
    _require_normal(target)
    shrink, _ = _shrink_and_var(cfg.weight, cfg.scale)
    n_cand, sigma, code = int(cfg.n_candidates), cfg.scale, cfg.weight.code
    d = target.dim

    def block(k, gen):
        if x is None:
            xs = target.sample_exact(gen, k)
        else:
            xs = np.broadcast_to(np.asarray(x, dtype=np.float64), (k, d)).copy()
        ys = xs[:, None, :] + sigma * gen.standard_normal((k, n_cand, d))
        lp_x = target.log_density_batch(xs)
        lw = kernels.log_g(code, target.log_density_batch(ys) - lp_x[:, None])
        p = np.exp(lw - kernels.row_logsumexp(lw)[:, None])
        mean = np.einsum("kn,knd->kd", p, ys)
        return np.sqrt(kernels.row_sq_norms(mean - shrink * xs))

    vals = _blocked(n_samples, block_rows(cfg, d), _seed_of(rng), block)
    return EstimateWithError.from_values(vals)


def acceptance_discrepancy(cfg, target, n_samples, rng):
    """E|alpha(X, Y_J) - alpha_ideal(X, Y_J)| with X ~ pi."""
    _require_normal(target)
    _shrink_and_var(cfg.weight, cfg.scale)

    def block(k, gen):
        xs = target.sample_exact(gen, k)
        res = cfg.cycle(xs, target.log_density_batch(xs), target, gen)
        la = _log_acc_from_sq(
            cfg.weight, kernels.row_sq_norms(xs), kernels.row_sq_norms(res.proposal), cfg.scale
        )
        return np.abs(res.acc_prob - np.exp(la))

    vals = _blocked(n_samples, block_rows(cfg, target.dim), _seed_of(rng), block)
    return EstimateWithError.from_values(vals)


def tail_state(d, kappa):
    """x = (d^{kappa - 1/2}, ...) so that |x| = d^kappa."""
    return np.full(int(d), float(d) ** (kappa - 0.5))


__all__ = [
    "EstimateWithError",
    "acceptance_discrepancy",
    "convergence_time",
    "esjd",
    "expected_acceptance_at",
    "log_conditional_mean_weight",
    "normalization_discrepancy_from_log_weights",
    "proposal_mean_discrepancy",
    "stationary_acceptance_rate",
    "tail_state",
    "weight_normalization_discrepancy",
]
