"""Flat ``key = value`` experiment configuration files.

Format: one ``key = value`` per line, ``#`` starts a comment, list values are
comma separated, numbers may be written as fractions (``2/5``) and ranges as
``start:stop:step`` (stop inclusive). Keys are case-insensitive and ``_`` and
``-`` are interchangeable.

Recognised keys (all optional, defaults depend on the scenario):

    target        normal | laplace | blackbox
    d             dimension
    d-grid        list of dimensions
    weight        list of gb, sqrt, barker
    sampler       list of mtm, ideal, rwm
    n-grid        list of candidate counts N
    ell           scale ell (sigma = ell / d**tau)
    ell-grid      list of ell values
    sigma         fixed sigma (mtm-vs-ideal)
    kappa-grid    list of tail exponents kappa
    tau           list of tau values
    n-samples     Monte Carlo sample size per cell
    replicates    chains per (weight, N) cell
    n-steps       chain length
    start         starting coordinate value for chains
    percentile    norm percentile defining convergence
    adapt         true | false
    target-rate   adaptation target acceptance rate (default per weight)
    gamma-exp     adaptation learning-rate exponent
    ell0          initial ell of adaptive chains
    n-mc          Monte Carlo draws for the Laplace norm percentile
    schedule      fixed | nd (mtm-vs-ideal: N from the N_d schedule)
    rho, nu       schedule constants
    cost          artificial seconds per black-box evaluation
    workers-grid  worker counts benchmarked by parallel-bench
    bench-steps   iterations timed per worker count
    curves        speed-curves kinds
"""
from fractions import Fraction


class ConfigError(ValueError):
    """Invalid configuration; the CLI exits with status 2."""


KNOWN_KEYS = {
    "target", "d", "d-grid", "weight", "sampler", "n-grid", "ell", "ell-grid",
    "sigma", "kappa-grid", "tau", "n-samples", "replicates", "n-steps", "start",
    "percentile", "adapt", "target-rate", "gamma-exp", "ell0", "n-mc",
    "schedule", "rho", "nu", "cost", "workers-grid", "bench-steps", "curves",
    "seed",
}


def normalize_key(key):
    return key.strip().lower().replace("_", "-")


def parse_text(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def number(text):
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def _range(text):
    parts = [number(p) for p in text.split(":")]
    if len(parts) != 3 or parts[2] <= 0:
        raise ConfigError(f"bad range {text!r}; expected start:stop:step")
    start, stop, step = parts
    n = int(round((stop - start) / step))
    return [round(start + i * step, 12) for i in range(n + 1) if start + i * step <= stop + 1e-9]


def number_list(text):
    text = text.strip()
    if ":" in text and "," not in text:
        values = _range(text)
    else:
        values = [number(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ConfigError("empty list")
    return values


def int_list(text):
    values = number_list(text)
    if any(v != int(v) for v in values):
        raise ConfigError(f"expected integers: {text!r}")
    return [int(v) for v in values]


def word_list(text):
    values = [p.strip().lower() for p in text.split(",") if p.strip()]
    if not values:
        raise ConfigError("empty list")
    return values


def boolean(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


class Settings:
    """Typed access to a parsed config with per-scenario defaults."""

    def __init__(self, raw=None, overrides=None):
        self.raw = dict(raw or {})
        for k, v in (overrides or {}).items():
            if v is not None:
                self.raw[normalize_key(k)] = str(v)
        self.used = set()

    def _get(self, key, default, conv):
        self.used.add(key)
        if key not in self.raw:
            return default
        try:
            return conv(self.raw[key])
        except ConfigError as exc:
            raise ConfigError(f"{key}: {exc}") from None

    def num(self, key, default):
        return self._get(key, default, number)

    def integer(self, key, default):
        return self._get(key, default, lambda t: int_list(t)[0])

    def nums(self, key, default):
        return self._get(key, default, number_list)

    def ints(self, key, default):
        return self._get(key, default, int_list)

    def words(self, key, default):
        return self._get(key, default, word_list)

    def word(self, key, default):
        return self._get(key, default, lambda t: t.strip().lower())

    def flag(self, key, default):
        return self._get(key, default, boolean)
