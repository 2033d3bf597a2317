"""Multiple-try Metropolis transitions and chain execution.

One MTM cycle from a current state x:

1. draw N candidates y_i ~ N(x, sigma^2 I);
2. pick y_j with probability proportional to w(x, y_j);
3. draw N - 1 shadow points z_i ~ N(y_j, sigma^2 I);
4. accept y_j with probability
   1 ^ [pi(y_j) w(y_j, x) / S_rev] / [pi(x) w(x, y_j) / S_fwd]
   where S_fwd = sum_i w(x, y_i) and S_rev = sum_i w(y_j, z_i) + w(y_j, x).

The Gaussian proposal is symmetric, so its densities cancel. Everything is
computed in log space. The cycle is vectorised over a leading batch axis so
that the same code drives a single chain step (batch of one) and the
i.i.d. Monte Carlo estimators in ``diagnostics``.

Random draws within a cycle are made in a fixed order from one generator:
candidate noise (n, N, d), selection uniforms (n,) when N > 1, shadow noise
(n, N - 1, d), acceptance uniforms (n,). Density evaluations may run on an
executor, but draws never depend on evaluation order.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import kernels
from .rng import Streams
from .weights import BalancingFunction


@dataclass
class CycleResult:
    """Batched output of one proposal/acceptance cycle (leading axis n)."""

    proposal: np.ndarray
    proposal_log_density: np.ndarray
    selected_index: np.ndarray
    acc_prob: np.ndarray
    accepted: np.ndarray
    candidate_log_weights: np.ndarray
    shadow_log_weights: np.ndarray
    candidates: Optional[np.ndarray] = None


def _empty_weights(n):
    return np.zeros((n, 0))


@dataclass(frozen=True)
class MtmConfig:
    """MTM sampler parameters.

    ``scale`` is sigma. When built with ``from_ell`` the pair (ell, tau) is kept
    so that sigma = ell / d**tau can be recomputed after adaptation.
    """

    n_candidates: int
    scale: float
    weight: BalancingFunction = BalancingFunction.GB
    parallel_workers: int = 1
    ell: Optional[float] = None
    tau: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "weight", BalancingFunction.parse(self.weight))
        if int(self.n_candidates) < 1:
            raise ValueError("n_candidates must be >= 1")
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise ValueError("scale must be positive and finite")
        if self.tau is not None and self.tau < 0:
            raise ValueError("tau must be >= 0")
        if int(self.parallel_workers) < 1:
            raise ValueError("parallel_workers must be >= 1")

    @classmethod
    def from_ell(cls, ell, dim, tau=0.5, **kwargs):
        return cls(scale=ell / dim**tau, ell=ell, tau=tau, **kwargs)

    def with_ell(self, ell, dim):
        tau = 0.5 if self.tau is None else self.tau
        return replace(self, scale=ell / dim**tau, ell=ell, tau=tau)

    @property
    def label(self):
        return f"mtm-{self.weight.value}"

    def cycle(self, x, lp_x, target, rng, executor=None, keep_candidates=False):
        n, d = x.shape
        N = int(self.n_candidates)
        sigma = self.scale
        code = self.weight.code

        cand = x[:, None, :] + sigma * rng.standard_normal((n, N, d))
        lp_cand = target.log_density_batch(cand, executor)
        if N > 1:
            u_sel = rng.random(n)
        else:
            u_sel = np.zeros(n)
        lw_fwd, j = kernels.forward_select(code, lp_x, lp_cand, u_sel)
        rows = np.arange(n)
        y = cand[rows, j]
        lp_y = lp_cand[rows, j]

        if N > 1:
            shadows = y[:, None, :] + sigma * rng.standard_normal((n, N - 1, d))
            lp_shadow = target.log_density_batch(shadows, executor)
        else:
            lp_shadow = np.zeros((n, 0))
        lw_rev, log_acc = kernels.reverse_accept(code, lp_x, lp_y, lp_shadow, lw_fwd, j)
        acc = np.exp(log_acc)
        accepted = rng.random(n) < acc
        return CycleResult(
            proposal=y,
            proposal_log_density=lp_y,
            selected_index=j,
            acc_prob=acc,
            accepted=accepted,
            candidate_log_weights=lw_fwd,
            shadow_log_weights=lw_rev,
            candidates=cand if keep_candidates else None,
        )


@dataclass(frozen=True)
class RwmConfig:
    """Plain random-walk Metropolis with N(x, sigma^2 I) proposals.

    Consumes the same random stream layout as ``MtmConfig`` with N = 1.
    """

    scale: float
    ell: Optional[float] = None
    tau: Optional[float] = None

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def from_ell(cls, ell, dim, tau=0.5):
        return cls(scale=ell / dim**tau, ell=ell, tau=tau)

    def with_ell(self, ell, dim):
        tau = 0.5 if self.tau is None else self.tau
        return replace(self, scale=ell / dim**tau, ell=ell, tau=tau)

    @property
    def label(self):
        return "rwm"

    def cycle(self, x, lp_x, target, rng, executor=None, keep_candidates=False):
        n, d = x.shape
        y = x[:, None, :] + self.scale * rng.standard_normal((n, 1, d))
        y = y[:, 0, :]
        lp_y = target.log_density_batch(y, executor)
        acc = np.exp(np.minimum(0.0, lp_y - lp_x))
        accepted = rng.random(n) < acc
        return CycleResult(
            proposal=y,
            proposal_log_density=lp_y,
            selected_index=np.zeros(n, dtype=np.int64),
            acc_prob=acc,
            accepted=accepted,
            candidate_log_weights=_empty_weights(n),
            shadow_log_weights=_empty_weights(n),
        )


@dataclass
class MtmStepOutcome:
    proposal: np.ndarray
    selected_index: int
    acc_prob: float
    accepted: bool
    next_state: np.ndarray
    candidate_log_weights: np.ndarray
    shadow_log_weights: np.ndarray
    next_log_density: float = float("nan")


def _outcome_from_cycle(x, lp_x, res):
    accepted = bool(res.accepted[0])
    y = res.proposal[0].copy()
    return MtmStepOutcome(
        proposal=y,
        selected_index=int(res.selected_index[0]),
        acc_prob=float(res.acc_prob[0]),
        accepted=accepted,
        next_state=y if accepted else x.copy(),
        candidate_log_weights=res.candidate_log_weights[0],
        shadow_log_weights=res.shadow_log_weights[0],
        next_log_density=float(res.proposal_log_density[0]) if accepted else lp_x,
    )


def _start(x, target):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != target.dim:
        raise ValueError(f"state must be a vector of length {target.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state contains non-finite entries")
    lp_x = float(target.log_density_batch(x[None, :])[0])
    if not math.isfinite(lp_x):
        raise ValueError("log-density at the current state is not finite")
    return x, lp_x


def mtm_step(x, cfg, target, rng, lp_x=None, executor=None):
    """One transition from ``x``; ``cfg`` may be any sampler config.

    Args:
        x: Current state, shape (d,).
        cfg: ``MtmConfig``, ``RwmConfig`` or an ideal-scheme config.
        target: The target distribution.
        rng: ``numpy.random.Generator`` supplying all draws of the step.
        lp_x: Cached log-density at ``x``; computed when omitted.
        executor: Optional executor for black-box density evaluations.
    """
    if lp_x is None:
        x, lp_x = _start(x, target)
    else:
        x = np.asarray(x, dtype=np.float64)
        if not math.isfinite(lp_x):
            raise ValueError("log-density at the current state is not finite")
    res = cfg.cycle(x[None, :], np.array([lp_x]), target, rng, executor)
    return _outcome_from_cycle(x, lp_x, res)


@dataclass
class ChainTrace:
    """States X(0..M) with per-step diagnostics.

    ``scale_history`` holds the ell (or sigma when no ell is defined) in force
    at each step, plus the final value, so it has length M + 1.
    """

    states: np.ndarray
    acc_probs: np.ndarray
    accepted_flags: np.ndarray
    scale_history: np.ndarray
    seed: int
    proposals: Optional[np.ndarray] = None

    @property
    def n_steps(self):
        return len(self.acc_probs)

    @property
    def norms(self):
        return np.sqrt(kernels.row_sq_norms(self.states))

    @property
    def acceptance_rate(self):
        return float(np.mean(self.accepted_flags)) if self.n_steps else float("nan")


def _scale_value(cfg):
    ell = getattr(cfg, "ell", None)
    return cfg.scale if ell is None else ell


def run_chain(init, cfg, target, n_steps, seed, adapter=None, keep_proposals=False):
    """Run ``n_steps`` transitions from ``init``.

    Iteration m draws from the counter-based stream ``Streams(seed).iteration(m)``
    so the trace depends only on (seed, cfg, target), never on worker count.
    When ``adapter`` is given, ell is updated after every step from the step's
    acceptance probability and sigma = ell / d**tau.
    """
    if int(n_steps) < 0:
        raise ValueError("n_steps must be >= 0")
    x, lp_x = _start(init, target)
    d = target.dim
    streams = Streams(int(seed))
    M = int(n_steps)

    if adapter is not None:
        cfg = cfg.with_ell(adapter.ell, d)

    states = np.empty((M + 1, d))
    states[0] = x
    acc = np.empty(M)
    flags = np.zeros(M, dtype=bool)
    scales = np.empty(M + 1)
    scales[0] = _scale_value(cfg)
    props = np.empty((M, d)) if keep_proposals else None

    workers = int(getattr(cfg, "parallel_workers", 1))
    pool = ThreadPoolExecutor(workers) if workers > 1 and not target.is_product else None
    try:
        for m in range(M):
            out = mtm_step(x, cfg, target, streams.iteration(m), lp_x=lp_x, executor=pool)
            acc[m] = out.acc_prob
            flags[m] = out.accepted
            if keep_proposals:
                props[m] = out.proposal
            x, lp_x = out.next_state, out.next_log_density
            states[m + 1] = x
            if adapter is not None:
                cfg = cfg.with_ell(adapter.update(out.acc_prob), d)
            scales[m + 1] = _scale_value(cfg)
    finally:
        if pool is not None:
            pool.shutdown()
    return ChainTrace(states, acc, flags, scales, int(seed), props)
