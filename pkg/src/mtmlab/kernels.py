"""Hot inner loops of the samplers.

Every kernel exists twice: an ``@njit`` loop version and a vectorised numpy
version. ``_accel.HAS_NUMBA`` picks which one is exported. Both operate on
log-densities already evaluated by the target, so they are target-agnostic.

Weight kinds are passed as integer codes (see ``WEIGHT_CODES``).
"""
import math

import numpy as np

from ._accel import HAS_NUMBA, njit

GB, SQRT, BARKER = 0, 1, 2
WEIGHT_CODES = {"gb": GB, "sqrt": SQRT, "barker": BARKER}


# --------------------------------------------------------------------------
# numba loop versions
# --------------------------------------------------------------------------

@njit
def _log_g_scalar(kind, r):
    if kind == GB:
        return r
    if kind == SQRT:
        return 0.5 * r
    # r - softplus(r) == -softplus(-r); the log1p term is shared so that
    # log_g(r) - log_g(-r) == r holds exactly.
    return -(max(-r, 0.0) + math.log1p(math.exp(-abs(r))))


@njit
def _log_g_nb(kind, r):
    flat = r.ravel()
    out = np.empty(flat.size)
    for i in range(flat.size):
        out[i] = _log_g_scalar(kind, flat[i])
    return out.reshape(r.shape)


@njit
def _row_sq_norms_nb(a):
    m, d = a.shape
    out = np.empty(m)
    for i in range(m):
        s = 0.0
        for k in range(d):
            s += a[i, k] * a[i, k]
        out[i] = s
    return out


@njit
def _row_abs_sums_nb(a):
    m, d = a.shape
    out = np.empty(m)
    for i in range(m):
        s = 0.0
        for k in range(d):
            s += abs(a[i, k])
        out[i] = s
    return out


@njit
def _row_logsumexp_nb(a):
    n, m = a.shape
    out = np.empty(n)
    for i in range(n):
        mx = -np.inf
        for k in range(m):
            if a[i, k] > mx:
                mx = a[i, k]
        if mx == -np.inf:
            out[i] = -np.inf
            continue
        s = 0.0
        for k in range(m):
            s += math.exp(a[i, k] - mx)
        out[i] = mx + math.log(s)
    return out


@njit
def _select_rows_nb(lw, u):
    n, m = lw.shape
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        mx = -np.inf
        for k in range(m):
            if lw[i, k] > mx:
                mx = lw[i, k]
        total = 0.0
        for k in range(m):
            total += math.exp(lw[i, k] - mx)
        thresh = u[i] * total
        acc = 0.0
        pick = -1
        last_pos = 0
        for k in range(m):
            p = math.exp(lw[i, k] - mx)
            acc += p
            if p > 0.0:
                last_pos = k
            if acc > thresh:
                pick = k
                break
        if pick < 0:
            pick = last_pos
        out[i] = pick
    return out


@njit
def _forward_select_nb(kind, lp_x, lp_cand, u):
    n, m = lp_cand.shape
    lw = np.empty((n, m))
    for i in range(n):
        for k in range(m):
            lw[i, k] = _log_g_scalar(kind, lp_cand[i, k] - lp_x[i])
    return lw, _select_rows_nb(lw, u)


@njit
def _reverse_accept_nb(kind, lp_x, lp_y, lp_shadow, lw_fwd, j):
    n, m = lw_fwd.shape
    lw_rev = np.empty((n, m))
    log_acc = np.empty(n)
    lse_fwd = _row_logsumexp_nb(lw_fwd)
    for i in range(n):
        for k in range(m - 1):
            lw_rev[i, k] = _log_g_scalar(kind, lp_shadow[i, k] - lp_y[i])
        lw_rev[i, m - 1] = _log_g_scalar(kind, lp_x[i] - lp_y[i])
    lse_rev = _row_logsumexp_nb(lw_rev)
    for i in range(n):
        num = lw_rev[i, m - 1] - lse_rev[i]
        den = lw_fwd[i, j[i]] - lse_fwd[i]
        la = (lp_y[i] - lp_x[i]) + (num - den)
        log_acc[i] = min(0.0, la)
    return lw_rev, log_acc


# --------------------------------------------------------------------------
# numpy versions
# --------------------------------------------------------------------------

def _log_g_np(kind, r):
    r = np.asarray(r, dtype=float)
    if kind == GB:
        return r.copy()
    if kind == SQRT:
        return 0.5 * r
    return -(np.maximum(-r, 0.0) + np.log1p(np.exp(-np.abs(r))))


def _row_sq_norms_np(a):
    return np.einsum("ij,ij->i", a, a)


def _row_abs_sums_np(a):
    return np.abs(a).sum(axis=1)


def _row_logsumexp_np(a):
    mx = a.max(axis=1)
    safe = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        out = safe + np.log(np.exp(a - safe[:, None]).sum(axis=1))
    return np.where(mx == -np.inf, -np.inf, out)


def _select_rows_np(lw, u):
    mx = lw.max(axis=1, keepdims=True)
    p = np.exp(lw - mx)
    cum = np.cumsum(p, axis=1)
    thresh = u * cum[:, -1]
    hit = cum > thresh[:, None]
    pick = hit.argmax(axis=1)
    # rounding fallback: last candidate carrying positive mass
    missed = ~hit.any(axis=1)
    if missed.any():
        pos = p[missed] > 0.0
        m = lw.shape[1]
        pick[missed] = m - 1 - pos[:, ::-1].argmax(axis=1)
    return pick.astype(np.int64)


def _forward_select_np(kind, lp_x, lp_cand, u):
    lw = _log_g_np(kind, lp_cand - lp_x[:, None])
    return lw, _select_rows_np(lw, u)


def _reverse_accept_np(kind, lp_x, lp_y, lp_shadow, lw_fwd, j):
    n, m = lw_fwd.shape
    lw_rev = np.empty((n, m))
    lw_rev[:, : m - 1] = _log_g_np(kind, lp_shadow - lp_y[:, None])
    lw_rev[:, m - 1] = _log_g_np(kind, lp_x - lp_y)
    num = lw_rev[:, m - 1] - _row_logsumexp_np(lw_rev)
    den = lw_fwd[np.arange(n), j] - _row_logsumexp_np(lw_fwd)
    log_acc = np.minimum(0.0, (lp_y - lp_x) + (num - den))
    return lw_rev, log_acc


# --------------------------------------------------------------------------
# exported entry points
# --------------------------------------------------------------------------

NUMBA_IMPL = {
    "log_g": _log_g_nb,
    "row_sq_norms": _row_sq_norms_nb,
    "row_abs_sums": _row_abs_sums_nb,
    "row_logsumexp": _row_logsumexp_nb,
    "select_rows": _select_rows_nb,
    "forward_select": _forward_select_nb,
    "reverse_accept": _reverse_accept_nb,
} if HAS_NUMBA else None

NUMPY_IMPL = {
    "log_g": _log_g_np,
    "row_sq_norms": _row_sq_norms_np,
    "row_abs_sums": _row_abs_sums_np,
    "row_logsumexp": _row_logsumexp_np,
    "select_rows": _select_rows_np,
    "forward_select": _forward_select_np,
    "reverse_accept": _reverse_accept_np,
}

_impl = NUMBA_IMPL if HAS_NUMBA else NUMPY_IMPL


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def log_g(kind, r):
    """Elementwise log balancing function for weight code ``kind``."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim == 0:
        return float(_impl["log_g"](kind, r.reshape(1))[0])
    return _impl["log_g"](kind, _f64(r))


def row_sq_norms(a):
    """Squared Euclidean norm of each row of a 2-D array."""
    return _impl["row_sq_norms"](_f64(a))


def row_abs_sums(a):
    """L1 norm of each row of a 2-D array."""
    return _impl["row_abs_sums"](_f64(a))


def row_logsumexp(a):
    return _impl["row_logsumexp"](_f64(a))


def select_rows(lw, u):
    """Inverse-CDF categorical draw per row of log weights ``lw``."""
    return _impl["select_rows"](_f64(lw), _f64(u))


def forward_select(kind, lp_x, lp_cand, u):
    """Candidate log weights ``log g(lp_cand - lp_x)`` and the selected index.

    Shapes: ``lp_x`` (n,), ``lp_cand`` (n, N), ``u`` (n,) uniforms.
    """
    return _impl["forward_select"](kind, _f64(lp_x), _f64(lp_cand), _f64(u))


def reverse_accept(kind, lp_x, lp_y, lp_shadow, lw_fwd, j):
    """Reverse-move log weights and the MTM log acceptance probability.

    ``lw_rev[:, :N-1]`` holds ``log w(y, z_i)`` and ``lw_rev[:, N-1]`` holds
    ``log w(y, x)``. With N = 1 the weight terms cancel bitwise and the result
    is exactly ``min(0, lp_y - lp_x)``.
    """
    lp_shadow = np.asarray(lp_shadow, dtype=np.float64)
    if lp_shadow.ndim == 1:
        lp_shadow = lp_shadow.reshape(len(lp_x), -1)
    return _impl["reverse_accept"](
        kind, _f64(lp_x), _f64(lp_y), _f64(lp_shadow), _f64(lw_fwd),
        np.ascontiguousarray(j, dtype=np.int64),
    )
