"""Flat ``key = value`` run configuration.

Lines starting with ``#`` (and anything after a ``#``) are comments.  Keys
``n``, ``rho_exponent`` and ``beta_delta`` accept comma-separated lists; the
experiment iterates over them.  ``None`` for an optional field means "use the
experiment's default".
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "EXPERIMENTS"]

EXPERIMENTS = ("sbm-edgeworth", "bootstrap-eee", "bias-mse", "fig1-toy", "expansion-check")
NOISE_KINDS = ("discrete", "exponential", "bernoulli")


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "sbm-edgeworth"
    kind: str | None = None
    n: tuple = (80,)
    rho: float | None = None
    rho_exponent: tuple | None = None
    a: float = 3.0
    b: float = 1.0
    delta: float | None = None
    beta_delta: tuple = (0.25,)
    sigmas: tuple = (10.0,)
    p_scale: float = 1.0
    q_scale: float = 0.5
    seed: int = 0
    nmc: int = 200_000
    nboot: int = 2000
    repeats: int = 100
    replicates: int = 200
    threads: int = 1
    tau: float = 1.0
    i: int = 0
    k: int = 0
    bias: str = "population"
    grid_lo: float = -4.0
    grid_hi: float = 4.0
    grid_points: int = 401

    def __post_init__(self):
        _validate(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v, tuple) else v)
                for f in dataclasses.fields(self) for v in [getattr(self, f.name)]}


def _int(s: str) -> int:
    return int(s)


def _float(s: str) -> float:
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _opt_float(s: str):
    return None if s.lower() == "none" else _float(s)


def _opt_str(s: str):
    return None if s.lower() == "none" else s


def _list(conv):
    def parse(s: str) -> tuple:
        items = [t.strip() for t in s.split(",") if t.strip()]
        if not items:
            raise ValueError("empty list")
        return tuple(conv(t) for t in items)
    return parse


def _opt_list(conv):
    inner = _list(conv)
    return lambda s: None if s.lower() == "none" else inner(s)


_PARSERS = {
    "experiment": str, "kind": _opt_str, "n": _list(_int), "rho": _opt_float,
    "rho_exponent": _opt_list(_float), "a": _float, "b": _float, "delta": _opt_float,
    "beta_delta": _list(_float), "sigmas": _list(_float), "p_scale": _float, "q_scale": _float,
    "seed": _int, "nmc": _int, "nboot": _int, "repeats": _int, "replicates": _int,
    "threads": _int, "tau": _float, "i": _int, "k": _int, "bias": str,
    "grid_lo": _float, "grid_hi": _float, "grid_points": _int,
}


def _fail(key: str, msg: str):
    raise ConfigError(f"{key}: {msg}")


def _validate(c: RunConfig) -> None:
    if c.experiment not in EXPERIMENTS:
        _fail("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    if c.kind is not None and c.kind not in NOISE_KINDS:
        _fail("kind", f"must be one of {', '.join(NOISE_KINDS)}")
    if any(n < 2 for n in c.n):
        _fail("n", "must be >= 2")
    if c.rho is not None and not 0 < c.rho <= 1:
        _fail("rho", "must lie in (0, 1]")
    if c.rho_exponent is not None and any(not -1 <= e < 0 for e in c.rho_exponent):
        _fail("rho_exponent", "must lie in [-1, 0)")
    if c.a <= 0 or c.b <= 0:
        _fail("a" if c.a <= 0 else "b", "must be > 0")
    if c.delta is not None and c.delta <= 0:
        _fail("delta", "must be > 0")
    if any(not 0 < bd <= 0.5 for bd in c.beta_delta):
        _fail("beta_delta", "must lie in (0, 0.5]")
    if any(s <= 0 for s in c.sigmas):
        _fail("sigmas", "must be > 0")
    if not (0 < c.p_scale <= 1 and 0 < c.q_scale <= 1):
        _fail("p_scale" if not 0 < c.p_scale <= 1 else "q_scale", "must lie in (0, 1]")
    if c.nmc < 100:
        _fail("nmc", "must be >= 100")
    for key in ("nboot", "repeats", "replicates", "threads"):
        if getattr(c, key) < 1:
            _fail(key, "must be >= 1")
    if c.tau < 0:
        _fail("tau", "must be >= 0")
    if c.i < 0 or c.k < 0:
        _fail("i" if c.i < 0 else "k", "must be >= 0")
    if c.bias not in ("population", "plugin"):
        _fail("bias", "must be 'population' or 'plugin'")
    if not c.grid_lo < c.grid_hi:
        _fail("grid_lo", "must be < grid_hi")
    if c.grid_points < 2:
        _fail("grid_points", "must be >= 2")


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines into a validated :class:`RunConfig`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {val!r} ({exc})") from None
    return RunConfig(**values)
