"""Compare the numba and numpy kernel paths.

Part 1 times each hot kernel in-process on both implementations.
Part 2 times a full MC estimator end to end, once per backend, in a fresh
interpreter with MTMLAB_DISABLE_NUMBA toggled.

    python benchmarks/bench_kernels.py [--rows 8192] [--n-cand 50] [--repeat 20]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from mtmlab import kernels

END_TO_END = """
import time
from mtmlab import BACKEND, MtmConfig, product_normal
from mtmlab.diagnostics import stationary_acceptance_rate
cfg = MtmConfig.from_ell(2.38, 50, n_candidates={n_cand}, weight="sqrt")
t = product_normal(50)
stationary_acceptance_rate(cfg, t, 2000, 1)  # warm-up / jit
t0 = time.perf_counter()
est = stationary_acceptance_rate(cfg, t, {n_samples}, 2)
print(BACKEND, time.perf_counter() - t0, repr(est.value))
"""


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(rows, n_cand, rng):
    lp_x = rng.normal(size=rows)
    lp_cand = lp_x[:, None] + rng.normal(size=(rows, n_cand))
    u = rng.random(rows)
    lw, j = kernels.NUMPY_IMPL["forward_select"](kernels.SQRT, lp_x, lp_cand, u)
    lp_y = lp_cand[np.arange(rows), j]
    lp_sh = lp_y[:, None] + rng.normal(size=(rows, n_cand - 1))
    x = rng.normal(size=(rows, 50))
    return {
        "log_g": (kernels.BARKER, lp_cand.ravel()),
        "row_sq_norms": (x,),
        "row_logsumexp": (lp_cand,),
        "select_rows": (lw, u),
        "forward_select": (kernels.SQRT, lp_x, lp_cand, u),
        "reverse_accept": (kernels.SQRT, lp_x, lp_y, lp_sh, lw, j),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=8192)
    ap.add_argument("--n-cand", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n-samples", type=int, default=100_000)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)

    if kernels.NUMBA_IMPL is None:
        print("numba unavailable or disabled; only the numpy path can be timed")
    cases = kernel_cases(args.rows, args.n_cand, np.random.default_rng(0))
    print(f"kernels: rows={args.rows} N={args.n_cand} (best of {args.repeat})")
    print(f"{'kernel':<16}{'numpy ms':>12}{'numba ms':>12}{'ratio':>9}")
    for name, a in cases.items():
        t_np = best_of(lambda: kernels.NUMPY_IMPL[name](*a), args.repeat)
        if kernels.NUMBA_IMPL is not None:
            kernels.NUMBA_IMPL[name](*a)  # compile
            t_nb = best_of(lambda: kernels.NUMBA_IMPL[name](*a), args.repeat)
            print(f"{name:<16}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.2f}")
        else:
            print(f"{name:<16}{1e3 * t_np:>12.3f}{'-':>12}{'-':>9}")

    if args.skip_end_to_end:
        return 0
    print(f"\nend to end: stationary acceptance, d=50, N={args.n_cand}, n={args.n_samples}")
    code = END_TO_END.format(n_cand=args.n_cand, n_samples=args.n_samples)
    for flag in ("0", "1"):
        env = dict(os.environ, MTMLAB_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                             capture_output=True, text=True).stdout.split()
        print(f"  {out[0]:<6} {float(out[1]):8.3f} s   estimate {out[2]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
