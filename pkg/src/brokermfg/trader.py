"""Trader-side equilibrium coefficients, controls, and conditional moments.

The representative trader's optimal rate is affine in the own initial
inventory and in the population-mean initial inventory, plus a drift
functional of the broker-revealed estimate path.  Drift estimates follow a
two-valued step path: the prior mean before the revelation time, the
realized value after.  Every time integral of a curve with that step is
computed with the revelation instant treated as an inserted node, so the
kink never costs quadrature order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MomentInconsistency
from .model import KernelSurface, ModelParams, ScalarCurve, TimeGrid
from .operators import BaseKernels, KernelPair, build_base_kernels, lhat_series, neumann_resolve
from .quadrature import prefix_trapz, prefix_to, suffix_trapz
from .riccati import RiccatiSolution, solve_gamma


@dataclass(frozen=True)
class MuPath:
    """Step path of the traders' drift estimate.

    The estimate equals `mu_mean` for t <= t_reveal and `mu_realized`
    afterwards; `t_reveal=None` means the estimate never moves.
    """

    mu_mean: float
    mu_realized: float
    t_reveal: float | None = None

    @property
    def reveals(self) -> bool:
        return self.t_reveal is not None

    def reveal_time(self, grid: TimeGrid) -> float:
        """Revelation instant clamped to the horizon; T+ when never revealed."""
        if self.t_reveal is None:
            return grid.T
        return float(np.clip(self.t_reveal, 0.0, grid.T))

    def values_on(self, grid: TimeGrid) -> np.ndarray:
        if self.t_reveal is None:
            return np.full(grid.n_nodes, self.mu_mean)
        t_c = self.reveal_time(grid)
        return np.where(grid.ts <= t_c + 1e-15, self.mu_mean, self.mu_realized)


@dataclass(frozen=True)
class TraderCoefficients:
    """Equilibrium coefficient curves of the representative trader."""

    params: ModelParams
    riccati: RiccatiSolution
    kernels: BaseKernels
    beta1: ScalarCurve
    beta2: KernelSurface
    beta3: ScalarCurve
    abar: ScalarCurve
    bbar: ScalarCurve
    cbar: KernelSurface
    dbar: ScalarCurve
    z: ScalarCurve

    @property
    def grid(self) -> TimeGrid:
        return self.z.grid


@dataclass(frozen=True)
class TraderPath:
    control: ScalarCurve
    inventory: ScalarCurve


def _z_curve(ric: RiccatiSolution) -> np.ndarray:
    return (ric.gamma.values - 2.0 * ric.a) / (2.0 * ric.eta) * ric.exp_g


def compute_beta_coefficients(params: ModelParams, ric: RiccatiSolution,
                              kernels: BaseKernels):
    """First-order feedback coefficients of the equilibrium fixed point.

    Returns (beta1 curve, beta2 two-time kernel, beta3 curve, per-order pair
    list, summed pair).  beta2 keeps its full two-time structure: the first
    slot is the drift time, the second the evaluation time.
    """
    grid = kernels.grid
    dt = grid.dt
    b = params.b
    eg = kernels.exp_g
    emg = kernels.exp_neg_g

    z = ScalarCurve(grid, _z_curve(ric))
    resolved_z = neumann_resolve(z, b, kernels)
    beta1 = b * eg * suffix_trapz(emg * resolved_z.values, dt)

    seed = KernelPair(kernels.c2, kernels.d1)
    summed, orders = lhat_series(seed, b, kernels)

    beta2 = np.zeros((grid.n_nodes, grid.n_nodes))
    beta3 = kernels.i1.copy()
    weight = b
    for pair in orders:
        e_k = pair.e.values
        f_k = pair.f.values
        beta2 += weight * eg[None, :] * suffix_trapz(emg[None, :] * e_k, dt, axis=1)
        pt = prefix_trapz(e_k, dt, axis=0)
        diag_pt = np.diagonal(pt).copy()
        m2 = suffix_trapz(emg[None, :] * pt, dt, axis=1)
        beta3 += weight * eg * (suffix_trapz(emg * (diag_pt + f_k), dt) - np.diagonal(m2))
        weight *= b

    return (ScalarCurve(grid, beta1), KernelSurface(grid, beta2),
            ScalarCurve(grid, beta3), orders, summed)


def compute_trader_coefficients(params: ModelParams, betas, ric: RiccatiSolution,
                                kernels: BaseKernels | None = None) -> TraderCoefficients:
    """Assemble the affine control coefficients from the feedback triple."""
    beta1, beta2, beta3 = betas[0], betas[1], betas[2]
    grid = ric.grid
    dt = grid.dt
    eg = ric.exp_g
    emg = ric.exp_neg_g
    c = (ric.gamma.values - 2.0 * ric.a) / (4.0 * ric.eta**2)
    z = _z_curve(ric)

    abar = beta1.values / (2.0 * ric.eta) + c * eg * prefix_trapz(emg * beta1.values, dt)
    # pb[s, t] = integral_s^t Gamma(r, t) beta2[s, r] dr
    pb = prefix_trapz(emg[None, :] * beta2.values, dt, axis=1)
    cbar = (c[None, :] * (eg[None, :] * (pb - np.diagonal(pb)[:, None])
                          + ric.kernel.values * beta3.values[:, None])
            + beta2.values / (2.0 * ric.eta))
    dbar = beta3.values / (2.0 * ric.eta)

    return TraderCoefficients(
        params=params, riccati=ric,
        kernels=kernels or build_base_kernels(ric, ric.a, ric.eta),
        beta1=beta1, beta2=beta2, beta3=beta3,
        abar=ScalarCurve(grid, abar),
        bbar=ScalarCurve(grid, z.copy()),
        cbar=KernelSurface(grid, cbar),
        dbar=ScalarCurve(grid, dbar),
        z=ScalarCurve(grid, z),
    )


def solve_trader(params: ModelParams, grid: TimeGrid) -> TraderCoefficients:
    """Riccati solve, kernel build, and coefficient assembly in one call."""
    ric = solve_gamma(params.a, params.eta, params.phi, grid)
    kernels = build_base_kernels(ric, params.a, params.eta)
    beta1, beta2, beta3, _, _ = compute_beta_coefficients(params, ric, kernels)
    return compute_trader_coefficients(params, (beta1, beta2, beta3), ric, kernels=kernels)


# Step-drift evaluation helpers.  Shared by the broker module, which has the
# same affine structure with its own kernel and weight curves.

def drift_integral(kernel: KernelSurface, mu_path: MuPath, grid: TimeGrid) -> np.ndarray:
    """Node values of t -> integral_0^t K(s, t) mu_s ds for the step path."""
    dt = grid.dt
    col_prefix = prefix_trapz(kernel.values, dt, axis=0)
    full = np.diagonal(col_prefix).copy()
    if not mu_path.reveals:
        return mu_path.mu_mean * full
    t_c = mu_path.reveal_time(grid)
    head = prefix_to(col_prefix, kernel.values, grid.ts, t_c, axis=0)
    post = mu_path.mu_mean * head + mu_path.mu_realized * (full - head)
    pre = mu_path.mu_mean * full
    return np.where(grid.ts <= t_c + 1e-15, pre, post)


def drift_slope(kernel: KernelSurface, d_curve: ScalarCurve, mu_path: MuPath,
                grid: TimeGrid) -> np.ndarray:
    """Sensitivity of the control to the realized drift after revelation.

    Zero before the revelation instant; integral_{t_c}^t K(s, t) ds + D_t after.
    """
    if not mu_path.reveals:
        return np.zeros(grid.n_nodes)
    dt = grid.dt
    t_c = mu_path.reveal_time(grid)
    col_prefix = prefix_trapz(kernel.values, dt, axis=0)
    full = np.diagonal(col_prefix).copy()
    head = prefix_to(col_prefix, kernel.values, grid.ts, t_c, axis=0)
    slope = full - head + d_curve.values
    return np.where(grid.ts <= t_c + 1e-15, 0.0, slope)


@dataclass(frozen=True)
class StepCurve:
    """A curve with one branch switch at the revelation instant.

    Both branches are smooth extensions sampled on all nodes; the realized
    path takes `pre` for t <= t_reveal and `post` after.  Keeping both
    branches makes jump-aware quadrature exact to trapezoid order.
    """

    grid: TimeGrid
    t_reveal: float | None
    pre: np.ndarray
    post: np.ndarray

    # keep ndarray operands from hijacking the arithmetic operators
    __array_ufunc__ = None

    @classmethod
    def smooth(cls, grid: TimeGrid, values: np.ndarray, t_reveal=None) -> "StepCurve":
        return cls(grid, t_reveal, values, values)

    def node_values(self) -> np.ndarray:
        if self.t_reveal is None:
            return self.pre
        return np.where(self.grid.ts <= self.t_reveal + 1e-15, self.pre, self.post)

    def _interp(self, branch: np.ndarray, t: float) -> float:
        return float(np.interp(t, self.grid.ts, branch))

    def integral(self) -> float:
        """Time integral over [0, T] with the switch cell split at t_reveal."""
        dt = self.grid.dt
        if self.t_reveal is None or self.t_reveal >= self.grid.T:
            return float(np.sum(0.5 * dt * (self.pre[:-1] + self.pre[1:])))
        t_c = max(self.t_reveal, 0.0)
        k = self.grid.node_of(t_c)
        k = min(k, self.grid.n_steps - 1)
        pre_part = float(np.sum(0.5 * dt * (self.pre[:k] + self.pre[1:k + 1])))
        pre_part += 0.5 * (t_c - self.grid.ts[k]) * (self.pre[k] + self._interp(self.pre, t_c))
        j = k + 1
        post_part = 0.5 * (self.grid.ts[j] - t_c) * (self._interp(self.post, t_c) + self.post[j])
        post_part += float(np.sum(0.5 * dt * (self.post[j:-1] + self.post[j + 1:])))
        return pre_part + post_part

    def cumulative(self) -> "StepCurve":
        """Running integral from 0; continuous across the switch."""
        dt = self.grid.dt
        cum_pre = prefix_trapz(self.pre, dt)
        if self.t_reveal is None or self.t_reveal >= self.grid.T:
            return StepCurve(self.grid, self.t_reveal, cum_pre, cum_pre.copy())
        t_c = max(self.t_reveal, 0.0)
        at_switch = float(prefix_to(cum_pre, self.pre, self.grid.ts, t_c, axis=0))
        cum_post_raw = prefix_trapz(self.post, dt)
        post_from_switch = float(prefix_to(cum_post_raw, self.post, self.grid.ts, t_c, axis=0))
        cum_post = at_switch + cum_post_raw - post_from_switch
        return StepCurve(self.grid, self.t_reveal, cum_pre, cum_post)

    def __add__(self, other):
        o = self._coerce(other)
        return StepCurve(self.grid, self.t_reveal, self.pre + o[0], self.post + o[1])

    def __sub__(self, other):
        o = self._coerce(other)
        return StepCurve(self.grid, self.t_reveal, self.pre - o[0], self.post - o[1])

    def __mul__(self, other):
        o = self._coerce(other)
        return StepCurve(self.grid, self.t_reveal, self.pre * o[0], self.post * o[1])

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, StepCurve):
            return other.pre, other.post
        arr = np.asarray(other, dtype=float)
        return arr, arr


def step_drift_curve(kernel: KernelSurface, d_curve: ScalarCurve, mu_path: MuPath,
                     grid: TimeGrid) -> StepCurve:
    """Two-branch form of t -> integral_0^t K mu ds + mu_t D_t."""
    dt = grid.dt
    col_prefix = prefix_trapz(kernel.values, dt, axis=0)
    full = np.diagonal(col_prefix).copy()
    pre = mu_path.mu_mean * (full + d_curve.values)
    if not mu_path.reveals:
        return StepCurve(grid, None, pre, pre.copy())
    t_c = mu_path.reveal_time(grid)
    head = prefix_to(col_prefix, kernel.values, grid.ts, t_c, axis=0)
    post = mu_path.mu_mean * head + mu_path.mu_realized * (full - head + d_curve.values)
    return StepCurve(grid, t_c, pre, post)


def evaluate_trader_control(coeffs: TraderCoefficients, q0: float, q0_mean: float,
                            mu_path: MuPath, grid: TimeGrid | None = None) -> TraderPath:
    """Control and inventory path of one trader with initial inventory q0."""
    grid = grid or coeffs.grid
    base = coeffs.abar.values * q0_mean + coeffs.bbar.values * q0
    drift = step_drift_curve(coeffs.cbar, coeffs.dbar, mu_path, grid)
    control = StepCurve.smooth(grid, base, drift.t_reveal) + drift
    inventory = control.cumulative()
    return TraderPath(
        control=ScalarCurve(grid, control.node_values()),
        inventory=ScalarCurve(grid, q0 + inventory.node_values()),
    )


def conditional_moments(coeffs: TraderCoefficients, mu_path: MuPath, q0_mean: float,
                        q0_second_moment: float) -> tuple[ScalarCurve, ScalarCurve]:
    """First and second conditional moments of the equilibrium control.

    The postcondition identity m2 - m1^2 = bbar^2 * Var(Q0) holds exactly by
    construction of the second moment.
    """
    if q0_second_moment < q0_mean**2:
        raise MomentInconsistency("q0 second moment below squared mean")
    grid = coeffs.grid
    a_ = coeffs.abar.values
    b_ = coeffs.bbar.values
    drift = step_drift_curve(coeffs.cbar, coeffs.dbar, mu_path, grid).node_values()
    nu_bar = (a_ + b_) * q0_mean + drift
    m_bar = ((a_**2 + 2.0 * a_ * b_) * q0_mean**2 + b_**2 * q0_second_moment
             + 2.0 * (a_ + b_) * drift * q0_mean + drift**2)
    return ScalarCurve(grid, nu_bar), ScalarCurve(grid, m_bar)
