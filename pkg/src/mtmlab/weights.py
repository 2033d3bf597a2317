"""Balancing functions in log space and categorical selection among candidates.

A weight ``w(x, y) = g(pi(y) / pi(x))`` is represented by ``log g(r)`` with
``r = log pi(y) - log pi(x)``.
"""
import math
from enum import Enum

import numpy as np

from . import kernels


class BalancingFunction(str, Enum):
    GB = "gb"
    SQRT = "sqrt"
    BARKER = "barker"

    @property
    def code(self):
        return kernels.WEIGHT_CODES[self.value]

    @property
    def locally_balanced(self):
        return self is not BalancingFunction.GB

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown weight {value!r}; expected one of gb, sqrt, barker"
            ) from None


def log_g(bf, r):
    """log g(e^r) for balancing function ``bf``.

    GB gives ``r``, Sqrt ``r/2`` and Barker ``r - softplus(r)``, the last one
    evaluated without overflow for any finite ``r``. Accepts scalars or arrays.
    """
    bf = BalancingFunction.parse(bf)
    arr = np.asarray(r, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError("log-ratio is NaN")
    return kernels.log_g(bf.code, arr)


def _check_log_weights(lw):
    lw = np.asarray(lw, dtype=np.float64)
    if lw.ndim != 1 or lw.size == 0:
        raise ValueError("log weights must be a non-empty 1-D vector")
    if np.isnan(lw).any() or np.isposinf(lw).any():
        raise ValueError("log weights must be finite or -inf")
    if not np.isfinite(lw).any():
        raise ValueError("all log weights are -inf")
    return lw


def select_candidate(lw, rng):
    """Index j drawn with probability exp(lw_j) / sum_i exp(lw_i).

    One uniform is consumed per call (inverse CDF after max-shifting).
    """
    lw = _check_log_weights(lw)
    u = np.array([rng.random()])
    return int(kernels.select_rows(lw[None, :], u)[0])


def selection_probabilities(lw):
    lw = _check_log_weights(lw)
    p = np.exp(lw - lw.max())
    return p / p.sum()


def log_mean_weight(lw):
    """log of (1/N) sum_i exp(lw_i), stable for entries of any magnitude."""
    lw = _check_log_weights(lw)
    return float(kernels.row_logsumexp(lw[None, :])[0]) - math.log(lw.size)
