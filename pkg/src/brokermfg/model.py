"""Parameter and grid containers, validation, and the permanent-impact bound.

Everything here is immutable after construction and safe to share across
workers.  Time-dependent quantities live on a shared uniform grid; curves
interpolate linearly between nodes and kernels bilinearly, matching the
trapezoidal quadrature order used throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BAboveBound, ConfigParse, MomentInconsistency, NonPositiveParameter

DEFAULT_N_STEPS = 800


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discretization of [0, T] with n_steps intervals."""

    T: float
    n_steps: int

    def __post_init__(self):
        if self.T <= 0.0:
            raise NonPositiveParameter("horizon T must be positive")
        if self.n_steps < 1:
            raise NonPositiveParameter("n_steps must be a positive integer")

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def ts(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_steps + 1)

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.T, self.n_steps * factor)

    def node_of(self, t: float) -> int:
        """Index of the last node <= t."""
        k = int(np.floor(t / self.dt + 1e-12))
        return min(max(k, 0), self.n_steps)


@dataclass(frozen=True)
class ScalarCurve:
    """A real function of time sampled on the grid nodes."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n_nodes,):
            raise ValueError(f"curve length {v.shape} != grid nodes {self.grid.n_nodes}")

    def __call__(self, t):
        return np.interp(t, self.grid.ts, self.values)

    @property
    def at_end(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class KernelSurface:
    """A real function of (s, t) sampled on the grid; values[s_index, t_index]."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        n = self.grid.n_nodes
        if v.shape != (n, n):
            raise ValueError(f"kernel shape {v.shape} != ({n}, {n})")
        if not np.all(np.isfinite(v)):
            raise ValueError("kernel contains non-finite entries")

    def __call__(self, s, t):
        ts = self.grid.ts
        dt = self.grid.dt
        s = np.clip(s, 0.0, self.grid.T)
        t = np.clip(t, 0.0, self.grid.T)
        i = np.minimum((np.asarray(s) / dt).astype(int), self.grid.n_steps - 1)
        j = np.minimum((np.asarray(t) / dt).astype(int), self.grid.n_steps - 1)
        fs = (s - ts[i]) / dt
        ft = (t - ts[j]) / dt
        v = self.values
        return ((1 - fs) * (1 - ft) * v[i, j] + fs * (1 - ft) * v[i + 1, j]
                + (1 - fs) * ft * v[i, j + 1] + fs * ft * v[i + 1, j + 1])

    def column(self, t: float) -> np.ndarray:
        """Kernel slice s -> K(s, t) with t interpolated between node columns."""
        dt = self.grid.dt
        t = float(np.clip(t, 0.0, self.grid.T))
        j = min(int(t / dt), self.grid.n_steps - 1)
        ft = (t - self.grid.ts[j]) / dt
        return (1 - ft) * self.values[:, j] + ft * self.values[:, j + 1]


@dataclass(frozen=True)
class ModelParams:
    """Market and preference parameters plus the drift/inventory moments.

    Cost parameters follow the usual sign conventions: `a` and `a_B` are the
    terminal inventory aversions, `eta`/`eta_B` the quadratic trading costs,
    `phi`/`phi_B` the running inventory penalties, and `b` the linear
    permanent impact of the traders' average rate on the price drift.
    """

    a: float
    eta: float
    phi: float
    b: float
    a_B: float
    eta_B: float
    phi_B: float
    T: float
    Q0_B: float = 0.0
    mu_mean: float = 0.0
    mu_second_moment: float = 0.0
    mu_realized: float = 0.0
    q0_mean: float = 0.0
    q0_second_moment: float = 0.0
    q0_sampler_spec: str = "gaussian"

    @property
    def q0_variance(self) -> float:
        return self.q0_second_moment - self.q0_mean**2

    @property
    def q0_std(self) -> float:
        return math.sqrt(max(self.q0_variance, 0.0))

    @property
    def mu_variance(self) -> float:
        return self.mu_second_moment - self.mu_mean**2

    def with_b(self, b: float) -> "ModelParams":
        return replace(self, b=b)


def validate(params: ModelParams) -> ModelParams:
    """Check type invariants; returns the params unchanged when they hold."""
    for name in ("a", "eta", "phi", "a_B", "eta_B", "phi_B", "T"):
        if getattr(params, name) <= 0.0:
            raise NonPositiveParameter(f"{name} must be strictly positive")
    if params.b < 0.0:
        raise NonPositiveParameter("b must be nonnegative")
    if params.mu_second_moment < params.mu_mean**2:
        raise MomentInconsistency(
            f"mu_second_moment={params.mu_second_moment} below mu_mean^2={params.mu_mean**2}")
    if params.q0_second_moment < params.q0_mean**2:
        raise MomentInconsistency(
            f"q0_second_moment={params.q0_second_moment} below q0_mean^2={params.q0_mean**2}")
    if not math.isfinite(params.q0_second_moment):
        raise MomentInconsistency("q0_second_moment must be finite")
    return params


def b_admissibility_bound(params: ModelParams) -> float:
    """Largest permanent impact for which the equilibrium series converge.

    Callers must reject b >= this value before running the mean-field solve.
    """
    rate = max(params.a, math.sqrt(params.eta * params.phi)) / params.eta
    cap = min(params.eta**2 / params.a,
              params.eta**1.5 / math.sqrt(params.phi),
              params.eta)
    return math.exp(-2.0 * params.T * rate) * cap / (params.T**2 + params.T)


def require_admissible_b(params: ModelParams) -> float:
    """Raise BAboveBound when b is at or past the admissibility bound."""
    bound = b_admissibility_bound(params)
    if params.b >= bound:
        raise BAboveBound(
            f"b={params.b:g} is not below the admissibility bound {bound:.6g}")
    return bound


# Configuration files are flat key = value (or key: value) text; keys mirror
# the parameter symbols.  Unknown keys are rejected to catch typos early.
CONFIG_KEYS = ("a", "eta", "phi", "b", "a_B", "eta_B", "phi_B", "T", "Q0_B",
               "mu_mean", "mu_second_moment", "mu_realized",
               "q0_mean", "q0_std", "n_steps", "seed")
_INT_KEYS = {"n_steps", "seed"}


def parse_config_text(text: str) -> dict:
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, _, value = line.partition(sep)
                break
        else:
            raise ConfigParse(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigParse(f"line {lineno}: unknown key {key!r}")
        try:
            cfg[key] = int(value) if key in _INT_KEYS else float(value)
        except ValueError as exc:
            raise ConfigParse(f"line {lineno}: bad value for {key!r}: {value!r}") from exc
    return cfg


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigParse(f"cannot read config {path}: {exc}") from exc


def params_from_config(cfg: dict) -> ModelParams:
    required = ("a", "eta", "phi", "T")
    missing = [k for k in required if k not in cfg]
    if missing:
        raise ConfigParse(f"missing required keys: {', '.join(missing)}")
    q0_mean = float(cfg.get("q0_mean", 0.0))
    q0_std = float(cfg.get("q0_std", 0.0))
    params = ModelParams(
        a=float(cfg["a"]),
        eta=float(cfg["eta"]),
        phi=float(cfg["phi"]),
        b=float(cfg.get("b", 0.0)),
        a_B=float(cfg.get("a_B", cfg["a"])),
        eta_B=float(cfg.get("eta_B", cfg["eta"])),
        phi_B=float(cfg.get("phi_B", cfg["phi"])),
        T=float(cfg["T"]),
        Q0_B=float(cfg.get("Q0_B", 0.0)),
        mu_mean=float(cfg.get("mu_mean", 0.0)),
        mu_second_moment=float(cfg.get("mu_second_moment", cfg.get("mu_mean", 0.0) ** 2)),
        mu_realized=float(cfg.get("mu_realized", cfg.get("mu_mean", 0.0))),
        q0_mean=q0_mean,
        q0_second_moment=q0_mean**2 + q0_std**2,
    )
    return validate(params)
