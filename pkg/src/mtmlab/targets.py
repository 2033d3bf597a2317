"""Target distributions.

Log-densities are returned up to an additive constant; downstream code only
ever uses differences. The two product targets are vectorised over leading
axes. ``BlackBox`` wraps an arbitrary scalar log-density and can emulate an
expensive likelihood with an artificial per-call delay.
"""
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import kernels

PRODUCT_NORMAL = "normal"
PRODUCT_LAPLACE = "laplace"
BLACKBOX = "blackbox"

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_2 = math.log(2.0)


class UnsupportedTargetError(ValueError):
    """Operation needs a capability the target does not have."""


@dataclass(frozen=True)
class Target:
    """A product target of dimension ``dim``, or a black-box density.

    Attributes:
        kind: ``"normal"``, ``"laplace"`` or ``"blackbox"``.
        dim: Dimension of the state space.
        evaluator: Scalar log-density for ``blackbox`` targets.
        cost: Artificial delay in seconds added to each black-box evaluation.
        offset: Constant added to every log-density. Only useful for
            checking that samplers depend on differences alone.
    """

    kind: str
    dim: int
    evaluator: Optional[Callable[[np.ndarray], float]] = None
    cost: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in (PRODUCT_NORMAL, PRODUCT_LAPLACE, BLACKBOX):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if int(self.dim) < 1:
            raise ValueError("dim must be a positive integer")
        if self.kind == BLACKBOX and self.evaluator is None:
            raise ValueError("blackbox target needs an evaluator")
        if self.cost < 0:
            raise ValueError("cost must be non-negative")

    @property
    def is_product(self):
        return self.kind != BLACKBOX

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise ValueError(
                f"state has trailing dimension {x.shape[-1] if x.ndim else 0}, "
                f"target expects {self.dim}"
            )
        return x

    def log_density(self, x):
        """log pi(x) for a single state (up to a fixed constant)."""
        x = self._check(x)
        if x.ndim != 1:
            raise ValueError("log_density takes a single state; use log_density_batch")
        if not np.all(np.isfinite(x)):
            raise ValueError("state contains non-finite entries")
        return float(self.log_density_batch(x[None, :])[0])

    def log_density_batch(self, xs, executor=None):
        """log pi for every state along the leading axes of ``xs``.

        ``executor`` (anything with ``map``) is used only for black-box
        targets; results come back in input order.
        """
        xs = self._check(xs)
        lead = xs.shape[:-1]
        flat = xs.reshape(-1, self.dim)
        if self.kind == PRODUCT_NORMAL:
            out = -0.5 * kernels.row_sq_norms(flat) - self.dim * _HALF_LOG_2PI
        elif self.kind == PRODUCT_LAPLACE:
            out = -kernels.row_abs_sums(flat) - self.dim * _LOG_2
        else:
            rows = list(flat)
            if executor is None:
                vals = [self._blackbox_one(r) for r in rows]
            else:
                vals = list(executor.map(self._blackbox_one, rows))
            out = np.asarray(vals, dtype=np.float64)
        if self.offset:
            out = out + self.offset
        return out.reshape(lead)

    def _blackbox_one(self, x):
        if self.cost > 0:
            time.sleep(self.cost)
        return float(self.evaluator(x))

    def sample_exact(self, rng, size=None):
        """Exact draw(s) from a product target.

        Returns shape ``(dim,)`` when ``size`` is None, else ``(size, dim)``.
        """
        shape = (self.dim,) if size is None else (int(size), self.dim)
        if self.kind == PRODUCT_NORMAL:
            return rng.standard_normal(shape)
        if self.kind == PRODUCT_LAPLACE:
            return rng.laplace(0.0, 1.0, shape)
        raise UnsupportedTargetError("exact sampling is not available for blackbox targets")

    def norm_percentile(self, p, n_mc=200_000, seed=20240101):
        """q such that P(||X|| <= q) = p under the target.

        Exact (chi-square quantile) for the normal product; Monte Carlo with
        ``n_mc`` draws for the Laplace product.
        """
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie strictly between 0 and 1")
        if self.kind == PRODUCT_NORMAL:
            return math.sqrt(stats.chi2.ppf(p, self.dim))
        if self.kind == PRODUCT_LAPLACE:
            rng = np.random.default_rng(seed)
            chunks = []
            left = int(n_mc)
            step = max(1, 2_000_000 // self.dim)
            while left > 0:
                k = min(step, left)
                chunks.append(kernels.row_sq_norms(rng.laplace(0.0, 1.0, (k, self.dim))))
                left -= k
            sq = np.concatenate(chunks)
            return float(np.sqrt(np.quantile(sq, p)))
        raise UnsupportedTargetError("norm percentile needs a product target")


def product_normal(dim):
    return Target(PRODUCT_NORMAL, int(dim))


def product_laplace(dim):
    return Target(PRODUCT_LAPLACE, int(dim))


def _std_normal_logpdf(x):
    x = np.asarray(x, dtype=np.float64)
    return float(-0.5 * np.dot(x, x) - x.size * _HALF_LOG_2PI)


def blackbox(dim, evaluator=None, cost=0.0):
    """Black-box target; defaults to a standard-normal log-density."""
    return Target(BLACKBOX, int(dim), evaluator or _std_normal_logpdf, float(cost))


def make_target(name, dim, cost=0.0):
    """Build a target from its config/CLI name."""
    name = name.strip().lower()
    if name in ("normal", "product-normal", "gaussian"):
        return product_normal(dim)
    if name in ("laplace", "product-laplace"):
        return product_laplace(dim)
    if name == "blackbox":
        return blackbox(dim, cost=cost)
    raise ValueError(f"unknown target {name!r}")
