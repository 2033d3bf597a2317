"""Closed-form scaling-limit quantities for the ideal schemes."""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .weights import BalancingFunction

CRITICAL_TAU = {BalancingFunction.GB: 0.5, BalancingFunction.SQRT: 1.0 / 6.0}
ND_SATURATION = 2**53
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def std_normal_cdf(z):
    """Phi(z) = erfc(-z / sqrt 2) / 2.

    Below z = -20 the value comes from exp(log Phi) instead, which stays
    positive (subnormal) down to z = -38 where erfc already flushes to 0.
    """
    z = np.asarray(z, dtype=np.float64)
    with np.errstate(under="ignore"):
        out = np.where(
            z > -20.0,
            0.5 * special.erfc(-z / math.sqrt(2.0)),
            np.exp(special.log_ndtr(np.minimum(z, -20.0))),
        )
    return float(out) if np.ndim(out) == 0 else out


def _weight_for_theory(weight):
    w = BalancingFunction.parse(weight)
    if w not in CRITICAL_TAU:
        raise ValueError(f"no scaling limit available for weight {w.value!r}")
    return w


def theta(weight, tau, ell):
    """Limiting acceptance rate of the ideal scheme with sigma = ell / d**tau.

    Only the critical tau (1/2 for GB, 1/6 for sqrt) and larger values have a
    limit; smaller tau raises.
    """
    w = _weight_for_theory(weight)
    crit = CRITICAL_TAU[w]
    if math.isclose(tau, crit, rel_tol=0.0, abs_tol=1e-12):
        arg = ell / 2.0 if w is BalancingFunction.GB else ell**3 / 8.0
        return 2.0 * std_normal_cdf(-np.asarray(arg, dtype=np.float64))
    if tau > crit:
        return np.ones_like(np.asarray(ell, dtype=np.float64)) if np.ndim(ell) else 1.0
    raise ValueError(
        f"tau={tau} is below the critical value {crit:.6g} for weight {w.value!r}"
    )


def speed(weight, tau, ell):
    """Speed measure ell^2 * theta."""
    ell = np.asarray(ell, dtype=np.float64)
    out = ell * ell * theta(weight, tau, ell)
    return float(out) if np.ndim(out) == 0 else out


def golden_section_max(f, lo, hi, tol=1e-6, max_iter=500):
    """Maximiser of a unimodal ``f`` on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def log_speed(weight, ell):
    """log of the speed at the critical tau; finite where the speed underflows."""
    w = _weight_for_theory(weight)
    arg = ell / 2.0 if w is BalancingFunction.GB else ell**3 / 8.0
    return math.log(2.0) + 2.0 * math.log(ell) + float(special.log_ndtr(-arg))


def optimize_speed(weight, lo=1e-3, hi=20.0, tol=1e-6):
    """(ell*, theta(ell*)) maximising the speed at the critical tau.

    The search runs on the log-speed, which is unimodal on (0, inf) and does
    not flatten to 0 for large ell.
    """
    w = _weight_for_theory(weight)
    ell = golden_section_max(lambda l: log_speed(w, l), lo, hi, tol)
    return ell, float(theta(w, CRITICAL_TAU[w], ell))


def prop2_bound(norm_x, sigma, d):
    """Upper bound on the expected GB ideal acceptance probability at x."""
    s2 = sigma * sigma
    a = 1.0 + s2
    expo = -(norm_x**2) * (s2 + s2 * s2) / (2.0 * a * (a * a - s2))
    return math.exp(expo - 0.5 * d * math.log1p(-s2 / (a * a)))


def nd_schedule(tau, d, rho=0.5, nu=0.1):
    """Number of candidates making MTM approach the ideal scheme.

    d^{4 tau (1 + rho)} when tau >= 1/2, else (1 + nu)^d; rounded up and
    capped at 2**53.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if tau >= 0.5:
        log_n = 4.0 * tau * (1.0 + rho) * math.log(d)
        if log_n >= 53 * math.log(2.0):
            return ND_SATURATION
        n = float(d) ** (4.0 * tau * (1.0 + rho))
    else:
        log_n = d * math.log1p(nu)
        if log_n >= 53 * math.log(2.0):
            return ND_SATURATION
        n = (1.0 + nu) ** d
    return min(ND_SATURATION, math.ceil(n))


@dataclass
class TheoryCurve:
    kind: str
    parameters: dict
    grid: np.ndarray
    values: np.ndarray


def theory_curve(kind, ell_grid):
    """Evaluate one of thetaGB, thetaLB, speedGB, speedLB, speedLB-half on a grid."""
    ell = np.asarray(ell_grid, dtype=np.float64)
    table = {
        "theta-gb": (lambda: theta("gb", 0.5, ell), {"weight": "gb", "tau": 0.5}),
        "theta-lb": (lambda: theta("sqrt", 1 / 6, ell), {"weight": "sqrt", "tau": 1 / 6}),
        "speed-gb": (lambda: speed("gb", 0.5, ell), {"weight": "gb", "tau": 0.5}),
        "speed-lb": (lambda: speed("sqrt", 1 / 6, ell), {"weight": "sqrt", "tau": 1 / 6}),
        "speed-lb-half": (lambda: speed("sqrt", 0.5, ell), {"weight": "sqrt", "tau": 0.5}),
    }
    if kind not in table:
        raise ValueError(f"unknown curve {kind!r}")
    fn, params = table[kind]
    return TheoryCurve(kind, params, ell, np.asarray(fn(), dtype=np.float64))
