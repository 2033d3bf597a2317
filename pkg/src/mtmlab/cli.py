"""``mtmlab`` command line: run one scenario and write a CSV.

Exit status: 0 on success, 2 on a configuration error, 3 on a runtime error.
"""
import argparse
import csv
import datetime
import io
import sys

from . import __version__
from .config import ConfigError, Settings, load
from .experiments import SCENARIOS

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def format_value(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "%.17g" % v
    if hasattr(v, "dtype"):
        return format_value(v.item())
    return str(v)


def render_csv(columns, rows, meta=None):
    buf = io.StringIO()
    if meta:
        buf.write(f"# {meta}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_value(v) for v in r])
    return buf.getvalue()


def build_parser():
    p = argparse.ArgumentParser(prog="mtmlab", description=__doc__.splitlines()[0])
    p.add_argument("scenario", choices=sorted(SCENARIOS))
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int, default=None, help="root seed (default: config seed or 0)")
    p.add_argument("--workers", type=int, default=1, help="processes for grid cells")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    p.add_argument("--paper-scale", action="store_true", help="use the full sample sizes")
    p.add_argument("--no-meta", action="store_true", help="omit the timestamp comment line")
    p.add_argument("--adapt", action=argparse.BooleanOptionalAction, default=None,
                   help="adapt ell during chains (adaptive-convergence)")
    p.add_argument("--target-rate", type=float, default=None)
    p.add_argument("--gamma-exp", type=float, default=None)
    p.add_argument("--ell0", type=float, default=None)
    return p


def run(args):
    raw = load(args.config) if args.config else {}
    overrides = {
        "adapt": None if args.adapt is None else str(args.adapt).lower(),
        "target-rate": args.target_rate,
        "gamma-exp": args.gamma_exp,
        "ell0": args.ell0,
    }
    settings = Settings(raw, overrides)
    seed = args.seed if args.seed is not None else settings.integer("seed", 0)
    if seed < 0:
        raise ConfigError("seed must be >= 0")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    columns, rows = SCENARIOS[args.scenario](settings, seed, args.workers, args.paper_scale)
    meta = None
    if not args.no_meta:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        meta = f"mtmlab {__version__} scenario={args.scenario} seed={seed} generated={stamp}"
    return render_csv(columns, rows, meta)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = run(args)
    except ConfigError as exc:
        print(f"mtmlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure maps to status 3
        print(f"mtmlab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        if args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"mtmlab: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
