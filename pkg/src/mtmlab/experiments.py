"""Scenario runners behind the ``mtmlab`` command.

Every runner takes a ``Settings`` object and returns ``(columns, rows)``. The
first three columns of every row are ``scenario, seed, n_samples``. Grid cells
are independent and seeded from (root seed, cell key), so results do not
depend on how cells are spread over workers.
"""
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import diagnostics, theory
from .adaptation import AdaptationConfig, ScaleAdapter
from .config import ConfigError
from .ideal import IdealConfig
from .mtm import MtmConfig, RwmConfig, run_chain
from .rng import Streams
from .targets import blackbox, make_target
from .weights import BalancingFunction

PROVENANCE = ["scenario", "seed", "n_samples"]

DESK = {"tail": 100_000, "acc-rate": 100_000, "esjd": 20_000, "replicates": 20, "mvi": 2_000}
FULL = {"tail": 1_000_000, "acc-rate": 1_000_000, "esjd": 100_000, "replicates": 100, "mvi": 20_000}


def cell_seed(seed, *keys):
    tag = zlib.crc32("|".join(str(k) for k in keys).encode())
    return Streams(int(seed)).child_seed(tag)


def map_cells(fn, cells, workers=1):
    """Apply ``fn`` to every cell, in order, optionally on a process pool."""
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, cells))
    return [fn(c) for c in cells]


def _weights(settings, default):
    names = settings.words("weight", default)
    try:
        return [BalancingFunction.parse(w).value for w in names]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _positive(name, values):
    if not values:
        raise ConfigError(f"{name} grid is empty")
    if any(v <= 0 for v in values):
        raise ConfigError(f"{name} values must be positive")
    return values


def _samples(settings, key, full_scale):
    n = FULL[key] if full_scale else settings.integer("n-samples", DESK[key])
    if n < 1:
        raise ConfigError("n-samples must be >= 1")
    return n


def _target(settings, dim):
    name = settings.word("target", "normal")
    try:
        return make_target(name, dim, cost=settings.num("cost", 0.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# --------------------------------------------------------------------------
# tail-acceptance
# --------------------------------------------------------------------------

def _tail_cell(c):
    target = make_target(c["target"], c["d"])
    sigma = c["ell"] / math.sqrt(c["d"])
    if c["sampler"] == "ideal":
        sampler = IdealConfig(c["weight"], sigma)
    else:
        sampler = MtmConfig(c["N"], sigma, c["weight"])
    x = diagnostics.tail_state(c["d"], c["kappa"])
    est = diagnostics.expected_acceptance_at(x, sampler, target, c["n"], c["seed"])
    return [c["sampler"], c["weight"], c["d"], c["N"], c["kappa"], c["ell"],
            est.value, est.std_error]


def run_tail_acceptance(settings, seed, workers=1, full_scale=False):
    n = _samples(settings, "tail", full_scale)
    d_grid = _positive("d", settings.ints("d-grid", [settings.integer("d", 50)]))
    n_grid = _positive("n", settings.ints("n-grid", [1, 5, 50, 500]))
    kappas = settings.nums("kappa-grid", [round(0.1 * i, 1) for i in range(13)])
    weights = _weights(settings, ["gb", "sqrt", "barker"])
    samplers = settings.words("sampler", ["mtm", "ideal"])
    ell = settings.num("ell", 2.38)
    tname = settings.word("target", "normal")
    if not kappas:
        raise ConfigError("kappa grid is empty")
    named = {"ideal-gb": "gb", "ideal-lb-sqrt": "sqrt"}
    cells = []
    for sampler in samplers:
        only = named.get(sampler)
        if only is not None:
            sampler = "ideal"
        elif sampler not in ("mtm", "ideal"):
            raise ConfigError(
                f"tail-acceptance sampler must be mtm, ideal, ideal-gb or ideal-lb-sqrt, not {sampler!r}"
            )
        for w in ([only] if only else weights):
            if sampler == "ideal" and w == "barker":
                continue
            if sampler == "ideal" and tname != "normal":
                raise ConfigError("ideal schemes require target = normal")
            for d in d_grid:
                for N in (n_grid if sampler == "mtm" else [0]):
                    # kappa is the swept axis: common random numbers along it
                    s = cell_seed(seed, "tail", sampler, w, d, N)
                    for k in kappas:
                        cells.append(dict(sampler=sampler, weight=w, d=d, N=N, kappa=k,
                                          ell=ell, n=n, seed=s, target=tname))
    cols = PROVENANCE + ["sampler", "weight", "d", "N", "kappa", "ell", "value", "std_error"]
    rows = [["tail-acceptance", seed, n] + r for r in map_cells(_tail_cell, cells, workers)]
    return cols, rows


# --------------------------------------------------------------------------
# adaptive-convergence
# --------------------------------------------------------------------------

def _adaptive_cell(c):
    target = make_target(c["target"], c["d"])
    x0 = np.full(c["d"], c["start"])
    adapter = None
    if c["adapt"]:
        acfg = AdaptationConfig.for_weight(
            c["weight"], c["target_rate"], learning_exponent=c["gamma_exp"],
            initial_ell=c["ell0"],
        )
        adapter = ScaleAdapter(acfg)
    cfg = MtmConfig.from_ell(c["ell0"], c["d"], 0.5, n_candidates=c["N"], weight=c["weight"])
    trace = run_chain(x0, cfg, target, c["n_steps"], c["seed"], adapter=adapter)
    t = diagnostics.convergence_time(trace, c["threshold"])
    return [c["target"], c["weight"], c["d"], c["N"], c["replicate"],
            int(t is not None), -1 if t is None else t, c["threshold"],
            float(trace.scale_history[-1]), trace.acceptance_rate]


def run_adaptive_convergence(settings, seed, workers=1, full_scale=False):
    d = settings.integer("d", 50)
    if d < 1:
        raise ConfigError("d must be >= 1")
    tname = settings.word("target", "normal")
    target = _target(settings, d)
    if not target.is_product:
        raise ConfigError("adaptive-convergence needs target = normal or laplace")
    reps = FULL["replicates"] if full_scale else settings.integer("replicates", DESK["replicates"])
    n_steps = settings.integer("n-steps", 10_000)
    if reps < 1 or n_steps < 1:
        raise ConfigError("replicates and n-steps must be >= 1")
    n_grid = _positive("n", settings.ints("n-grid", [1, 5, 50, 500]))
    weights = _weights(settings, ["gb", "sqrt", "barker"])
    p = settings.num("percentile", 0.95)
    if not 0 < p < 1:
        raise ConfigError("percentile must lie in (0, 1)")
    threshold = target.norm_percentile(p, n_mc=settings.integer("n-mc", 200_000))
    rate = settings.num("target-rate", None)
    if rate is not None and not 0 < rate < 1:
        raise ConfigError("target-rate must lie in (0, 1)")
    common = dict(
        target=tname, d=d, n_steps=n_steps, threshold=threshold,
        start=settings.num("start", 10.0), adapt=settings.flag("adapt", True),
        target_rate=rate, gamma_exp=settings.num("gamma-exp", 0.6),
        ell0=settings.num("ell0", 2.38),
    )
    if common["ell0"] <= 0 or common["gamma_exp"] <= 0:
        raise ConfigError("ell0 and gamma-exp must be positive")
    cells = []
    for w in weights:
        for N in n_grid:
            for r in range(reps):
                cells.append(dict(common, weight=w, N=N, replicate=r,
                                  seed=cell_seed(seed, "adaptive", tname, r)))
    cols = PROVENANCE + ["target", "weight", "d", "N", "replicate", "converged",
                         "convergence_time", "threshold", "final_ell", "acceptance_rate"]
    rows = [["adaptive-convergence", seed, n_steps] + r
            for r in map_cells(_adaptive_cell, cells, workers)]
    return cols, rows


def median_convergence_times(rows, columns):
    """Median convergence time per (target, weight, N); never-converged runs count as +inf."""
    idx = {c: i for i, c in enumerate(columns)}
    groups = {}
    for r in rows:
        key = (r[idx["target"]], r[idx["weight"]], int(r[idx["N"]]))
        t = float(r[idx["convergence_time"]]) if int(r[idx["converged"]]) else math.inf
        groups.setdefault(key, []).append(t)
    return {k: float(np.median(v)) for k, v in groups.items()}


# --------------------------------------------------------------------------
# acc-rate-vs-d
# --------------------------------------------------------------------------

_ACC_RATE_DEFAULTS = {
    "gb": ([0.4, 0.5, 0.6], 1.0),
    "sqrt": ([2 / 15, 1 / 6, 0.4], 2 ** (2 / 3)),
}


def _acc_rate_cell(c):
    target = make_target("normal", c["d"])
    sampler = IdealConfig.from_ell(c["weight"], c["ell"], c["d"], c["tau"])
    est = diagnostics.stationary_acceptance_rate(sampler, target, c["n"], c["seed"])
    return [c["weight"], c["tau"], c["d"], c["ell"], est.value, est.std_error, c["limit"]]


def run_acc_rate_vs_d(settings, seed, workers=1, full_scale=False):
    n = _samples(settings, "acc-rate", full_scale)
    d_grid = _positive("d", settings.ints("d-grid", [10, 100, 1000, 2000]))
    weights = _weights(settings, ["gb", "sqrt"])
    taus_cfg = settings.nums("tau", None)
    ell_cfg = settings.num("ell", None)
    if _target(settings, 1).kind != "normal":
        raise ConfigError("acc-rate-vs-d requires target = normal")
    limit = 2.0 * theory.std_normal_cdf(-0.5)
    cells = []
    for w in weights:
        if w not in _ACC_RATE_DEFAULTS:
            raise ConfigError("acc-rate-vs-d supports weights gb and sqrt")
        taus, ell = _ACC_RATE_DEFAULTS[w]
        taus = taus_cfg or taus
        ell = ell_cfg or ell
        for tau in taus:
            for d in d_grid:
                cells.append(dict(weight=w, tau=tau, d=d, ell=ell, n=n, limit=limit,
                                  seed=cell_seed(seed, "acc-rate", w, tau, d)))
    cols = PROVENANCE + ["weight", "tau", "d", "ell", "value", "std_error", "limit"]
    rows = [["acc-rate-vs-d", seed, n] + r for r in map_cells(_acc_rate_cell, cells, workers)]
    return cols, rows


# --------------------------------------------------------------------------
# esjd-sweep
# --------------------------------------------------------------------------

def _esjd_cell(c):
    target = make_target("normal", c["d"])
    cfg = MtmConfig.from_ell(c["ell"], c["d"], 0.5, n_candidates=c["N"], weight=c["weight"])
    est = diagnostics.esjd(cfg, target, c["n"], c["seed"])
    return [c["weight"], c["d"], c["N"], c["ell"], est.value, est.std_error]


def run_esjd_sweep(settings, seed, workers=1, full_scale=False):
    n = _samples(settings, "esjd", full_scale)
    d = settings.integer("d", 50)
    if d < 1:
        raise ConfigError("d must be >= 1")
    if _target(settings, d).kind != "normal":
        raise ConfigError("esjd-sweep requires target = normal")
    n_grid = _positive("n", settings.ints("n-grid", [1, 5, 50, 500]))
    ell_grid = _positive("ell", settings.nums("ell-grid", [round(1.0 + 0.2 * i, 1) for i in range(26)]))
    weights = _weights(settings, ["gb", "sqrt", "barker"])
    cells = []
    for w in weights:
        for N in n_grid:
            # ell is the swept axis: common random numbers along it
            s = cell_seed(seed, "esjd", w, N)
            for ell in ell_grid:
                cells.append(dict(weight=w, d=d, N=N, ell=ell, n=n, seed=s))
    cols = PROVENANCE + ["weight", "d", "N", "ell", "value", "std_error"]
    rows = [["esjd-sweep", seed, n] + r for r in map_cells(_esjd_cell, cells, workers)]
    return cols, rows


def esjd_argmax(rows, columns):
    """ell maximising ESJD per (weight, N)."""
    idx = {c: i for i, c in enumerate(columns)}
    best = {}
    for r in rows:
        key = (r[idx["weight"]], int(r[idx["N"]]))
        v = float(r[idx["value"]])
        if key not in best or v > best[key][1]:
            best[key] = (float(r[idx["ell"]]), v)
    return {k: v[0] for k, v in best.items()}


# --------------------------------------------------------------------------
# speed-curves / theory
# --------------------------------------------------------------------------

def run_speed_curves(settings, seed, workers=1, full_scale=False):
    ell_grid = _positive("ell", settings.nums("ell-grid", [round(0.05 * i, 2) for i in range(1, 121)]))
    kinds = settings.words("curves", ["theta-gb", "theta-lb", "speed-gb", "speed-lb", "speed-lb-half"])
    rows = []
    for kind in kinds:
        try:
            curve = theory.theory_curve(kind, ell_grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for ell, v in zip(curve.grid, curve.values):
            rows.append(["speed-curves", seed, 0, kind, float(ell), float(v)])
    cols = PROVENANCE + ["curve", "ell", "value"]
    return cols, rows


# --------------------------------------------------------------------------
# mtm-vs-ideal
# --------------------------------------------------------------------------

def _mvi_cell(c):
    target = make_target("normal", c["d"])
    sigma = c["sigma"]
    out = []
    if c["sampler"] == "rwm":
        est = diagnostics.stationary_acceptance_rate(RwmConfig(sigma), target, c["n"], c["seed"])
        return [["rwm", c["weight"], c["d"], 1, sigma, "stationary_acceptance",
                 est.value, est.std_error]]
    cfg = MtmConfig(c["N"], sigma, c["weight"])
    metrics = [
        ("stationary_acceptance", diagnostics.stationary_acceptance_rate),
        ("proposal_mean_discrepancy", diagnostics.proposal_mean_discrepancy),
        ("acceptance_discrepancy", diagnostics.acceptance_discrepancy),
        ("weight_normalization_discrepancy", diagnostics.weight_normalization_discrepancy),
    ]
    for name, fn in metrics:
        est = fn(cfg, target, c["n"], c["seed"])
        out.append(["mtm", c["weight"], c["d"], c["N"], sigma, name, est.value, est.std_error])
    return out


def run_mtm_vs_ideal(settings, seed, workers=1, full_scale=False):
    n = _samples(settings, "mvi", full_scale)
    weights = _weights(settings, ["gb", "sqrt"])
    if _target(settings, 1).kind != "normal":
        raise ConfigError("mtm-vs-ideal requires target = normal")
    for w in weights:
        if w == "barker":
            raise ConfigError("mtm-vs-ideal has no closed-form ideal scheme for barker")
    schedule = settings.word("schedule", "fixed")
    cells = []
    if schedule == "fixed":
        d = settings.integer("d", 2)
        sigma = settings.num("sigma", 0.5)
        n_grid = _positive("n", settings.ints("n-grid", [1, 10, 100, 1000, 10000]))
        plan = [(d, sigma, N) for N in n_grid]
    elif schedule == "nd":
        taus = settings.nums("tau", [0.5])
        tau = taus[0]
        ell = settings.num("ell", 1.0)
        rho, nu = settings.num("rho", 0.5), settings.num("nu", 0.1)
        d_grid = _positive("d", settings.ints("d-grid", [1, 2, 3, 4, 5]))
        plan = [(d, ell / d**tau, theory.nd_schedule(tau, d, rho, nu)) for d in d_grid]
        if max(p[2] for p in plan) > 10**6:
            raise ConfigError("N_d schedule exceeds 1e6 candidates; lower d-grid, rho or nu")
    else:
        raise ConfigError("schedule must be fixed or nd")
    if sigma_bad := [p for p in plan if p[1] <= 0]:
        raise ConfigError(f"non-positive sigma in {sigma_bad}")
    for w in weights:
        for d, sigma, N in plan:
            # the seed ignores the sampler so that the N = 1 row and the RWM row
            # see the same draws
            s = cell_seed(seed, "mvi", w, d, N)
            cells.append(dict(sampler="mtm", weight=w, d=d, N=N, sigma=sigma, n=n, seed=s))
            if N == 1:
                cells.append(dict(sampler="rwm", weight=w, d=d, N=1, sigma=sigma, n=n, seed=s))
    cols = PROVENANCE + ["sampler", "weight", "d", "N", "sigma", "metric", "value", "std_error"]
    rows = []
    for block in map_cells(_mvi_cell, cells, workers):
        rows.extend(["mtm-vs-ideal", seed, n] + r for r in block)
    return cols, rows


# --------------------------------------------------------------------------
# parallel-bench
# --------------------------------------------------------------------------

def run_parallel_bench(settings, seed, workers=1, full_scale=False):
    d = settings.integer("d", 10)
    N = settings.integer("n-grid", 20)
    cost = settings.num("cost", 0.01)
    steps = settings.integer("bench-steps", 5)
    grid = _positive("workers", settings.ints("workers-grid", [1, 2, 4, 8]))
    weight = _weights(settings, ["sqrt"])[0]
    ell = settings.num("ell", 2.38)
    if cost < 0 or steps < 1 or N < 1 or d < 1:
        raise ConfigError("cost must be >= 0 and bench-steps, N, d >= 1")
    target = blackbox(d, cost=cost)
    x0 = np.zeros(d)
    reference = None
    results = []
    for w in grid:
        cfg = MtmConfig.from_ell(ell, d, 0.5, n_candidates=N, weight=weight, parallel_workers=w)
        t0 = time.perf_counter()
        trace = run_chain(x0, cfg, target, steps, seed)
        elapsed = (time.perf_counter() - t0) / steps
        if reference is None:
            reference = (trace, elapsed)
        same = bool(
            np.array_equal(trace.states, reference[0].states)
            and np.array_equal(trace.acc_probs, reference[0].acc_probs)
        )
        results.append((w, elapsed, same))
    base = next(e for w, e, _ in results if w == grid[0])
    regime = "overhead-dominated" if cost == 0 else "cost-dominated"
    cols = PROVENANCE + ["workers", "cost", "N", "d", "seconds_per_iteration", "speedup",
                         "identical_trace", "regime"]
    rows = [["parallel-bench", seed, steps, w, cost, N, d, e, base / e, int(same), regime]
            for w, e, same in results]
    return cols, rows


SCENARIOS = {
    "tail-acceptance": run_tail_acceptance,
    "adaptive-convergence": run_adaptive_convergence,
    "acc-rate-vs-d": run_acc_rate_vs_d,
    "esjd-sweep": run_esjd_sweep,
    "speed-curves": run_speed_curves,
    "theory": run_speed_curves,
    "mtm-vs-ideal": run_mtm_vs_ideal,
    "parallel-bench": run_parallel_bench,
}
