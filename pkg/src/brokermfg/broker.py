"""Broker-side coefficients, revelation timing, optimal control, and payoffs.

The broker's reduced problem weighs the second moment of the traders' drift
estimate by a deterministic density; its antiderivative (zero at the horizon)
is the information-value curve whose negative minimum locates the optimal
revelation time.  Controls before that time are deterministic; afterwards
they are affine in the realized drift, which discloses it completely.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import KernelSurface, ModelParams, ScalarCurve, TimeGrid
from .quadrature import prefix_trapz, suffix_trapz
from .riccati import RiccatiSolution, solve_gamma_broker
from .trader import (MuPath, StepCurve, TraderCoefficients, drift_slope,
                     step_drift_curve)


@dataclass(frozen=True)
class BrokerCoefficients:
    """Feedback curves of the broker's value function and optimal control."""

    params: ModelParams
    riccati: RiccatiSolution
    abar_b: ScalarCurve
    cbar_b: KernelSurface
    dbar_b: ScalarCurve
    ahat_b: ScalarCurve
    bhat_b: ScalarCurve
    chat_b: KernelSurface
    dhat_b: ScalarCurve

    @property
    def grid(self) -> TimeGrid:
        return self.abar_b.grid


@dataclass(frozen=True)
class RevelationPolicy:
    """Revelation decision together with the curve that produced it.

    `t_reveal` is None when secrecy is (weakly) optimal over the whole
    horizon; otherwise it is the earliest minimizer of the information-value
    curve, refined inside its bracketing cell.
    """

    t_reveal: float | None
    a_curve: ScalarCurve
    a_prime: ScalarCurve
    a_min: float

    @property
    def reveals(self) -> bool:
        return self.t_reveal is not None

    def mu_path(self, params: ModelParams) -> MuPath:
        return MuPath(params.mu_mean, params.mu_realized, self.t_reveal)

    def label(self) -> str:
        return "never" if self.t_reveal is None else f"{self.t_reveal:.6f}"


def compute_broker_beta_coefficients(params: ModelParams, trader: TraderCoefficients,
                                     ric_b: RiccatiSolution):
    """Drift-feedback curves of the broker's value function."""
    grid = ric_b.grid
    dt = grid.dt
    eg = ric_b.exp_g
    emg = ric_b.exp_neg_g
    w = params.b + 2.0 * params.a_B - ric_b.gamma.values

    abar_b = eg * suffix_trapz(emg * w * (trader.abar.values + trader.bbar.values), dt)
    cbar_b = eg[None, :] * suffix_trapz((emg * w)[None, :] * trader.cbar.values, dt, axis=1)
    col_prefix = prefix_trapz(trader.cbar.values, dt, axis=0)
    diag_cp = np.diagonal(col_prefix).copy()
    m2 = suffix_trapz((emg * w)[None, :] * col_prefix, dt, axis=1)
    dbar_b = eg * (suffix_trapz(emg * w * (diag_cp + trader.dbar.values), dt)
                   - np.diagonal(m2) + suffix_trapz(emg, dt))
    return (ScalarCurve(grid, abar_b), KernelSurface(grid, cbar_b),
            ScalarCurve(grid, dbar_b))


def compute_broker_control_coefficients(params: ModelParams, broker_betas,
                                        trader: TraderCoefficients,
                                        ric_b: RiccatiSolution) -> BrokerCoefficients:
    abar_b, cbar_b, dbar_b = broker_betas
    grid = ric_b.grid
    dt = grid.dt
    eta_b2 = 2.0 * params.eta_B
    eg = ric_b.exp_g
    emg = ric_b.exp_neg_g
    c_b = (ric_b.gamma.values - 2.0 * params.a_B) / eta_b2

    ahat_b = (abar_b.values / eta_b2
              + c_b * eg * prefix_trapz(
                  emg * (abar_b.values / eta_b2 - trader.abar.values - trader.bbar.values), dt))
    bhat_b = c_b * eg
    px = prefix_trapz(emg[None, :] * (cbar_b.values / eta_b2 - trader.cbar.values), dt, axis=1)
    chat_b = (cbar_b.values / eta_b2
              + c_b[None, :] * (eg[None, :] * (px - np.diagonal(px)[:, None])
                                + ric_b.kernel.values
                                * (dbar_b.values / eta_b2 - trader.dbar.values)[:, None]))
    dhat_b = dbar_b.values / eta_b2
    return BrokerCoefficients(
        params=params, riccati=ric_b,
        abar_b=abar_b, cbar_b=cbar_b, dbar_b=dbar_b,
        ahat_b=ScalarCurve(grid, ahat_b),
        bhat_b=ScalarCurve(grid, bhat_b),
        chat_b=KernelSurface(grid, chat_b),
        dhat_b=ScalarCurve(grid, dhat_b),
    )


def _a_prime_terms(params: ModelParams, trader: TraderCoefficients, broker_betas) -> dict:
    """The seven groups of the information-value density, kept separate for tests."""
    _, cbar_b, dbar_b = broker_betas
    grid = trader.grid
    dt = grid.dt
    eta = params.eta
    eta_b = params.eta_B
    c_ = trader.cbar.values
    d_ = trader.dbar.values
    cb = cbar_b.values
    db = dbar_b.values

    def tail_diag(weight: np.ndarray, kernel: np.ndarray) -> np.ndarray:
        # s -> integral_s^T weight_r * kernel[s, r] dr
        return np.diagonal(suffix_trapz(weight[None, :] * kernel, dt, axis=1)).copy()

    def double(inner: np.ndarray, outer: np.ndarray) -> np.ndarray:
        # s -> integral_s^T outer[s, u] * (integral_s^u inner[r, u] dr) du
        pt = prefix_trapz(inner, dt, axis=0)
        band = np.diagonal(pt)[None, :] - pt
        return np.diagonal(suffix_trapz(outer * band, dt, axis=1)).copy()

    return {
        "dd_squares": eta * d_**2 - d_ * db + db**2 / (4.0 * eta_b),
        "dc_own": 2.0 * eta * tail_diag(d_, c_),
        "dc_cross": -(tail_diag(d_, cb) + tail_diag(db, c_)),
        "dc_broker": tail_diag(db, cb) / (2.0 * eta_b),
        "cc_own": 2.0 * eta * double(c_, c_),
        "cc_cross": -(double(c_, cb) + double(cb, c_)),
        "cc_broker": double(cb, cb) / (2.0 * eta_b),
    }


def compute_A_prime(params: ModelParams, trader: TraderCoefficients, broker_betas,
                    term_overrides: dict | None = None) -> ScalarCurve:
    """Density weighing the second moment of the drift estimate.

    `term_overrides` replaces named term groups; it exists for negative
    controls in the verification suite.
    """
    terms = _a_prime_terms(params, trader, broker_betas)
    if term_overrides:
        terms.update(term_overrides)
    total = sum(terms.values())
    return ScalarCurve(trader.grid, total)


def compute_A(a_prime: ScalarCurve) -> ScalarCurve:
    """Antiderivative vanishing at the horizon: A_t = -integral_t^T A'_s ds."""
    grid = a_prime.grid
    return ScalarCurve(grid, -suffix_trapz(a_prime.values, grid.dt))


def critical_time(a_curve: ScalarCurve, a_prime: ScalarCurve | None = None) -> RevelationPolicy:
    """Earliest minimizer of the information-value curve, when negative.

    A minimum of exactly zero counts as never-reveal: zero information value
    makes secrecy weakly optimal.  The grid minimizer is refined by parabolic
    interpolation inside its bracketing cell.
    """
    grid = a_curve.grid
    values = a_curve.values
    if a_prime is None:
        a_prime = ScalarCurve(grid, np.zeros(grid.n_nodes))
    k = int(np.argmin(values))
    a_min = float(values[k])
    if a_min >= 0.0:
        return RevelationPolicy(None, a_curve, a_prime, a_min)
    t_c = grid.ts[k]
    if 0 < k < grid.n_steps:
        y0, y1, y2 = values[k - 1], values[k], values[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom > 0.0:
            shift = 0.5 * (y0 - y2) / denom
            shift = float(np.clip(shift, -1.0, 1.0))
            t_c = grid.ts[k] + shift * grid.dt
            a_min = float(y1 - 0.25 * (y0 - y2) * shift)
    return RevelationPolicy(float(t_c), a_curve, a_prime, a_min)


def solve_broker(params: ModelParams, trader: TraderCoefficients
                 ) -> tuple[BrokerCoefficients, RevelationPolicy]:
    """Full broker solve: coefficients, information value, revelation policy."""
    ric_b = solve_gamma_broker(params.a_B, params.eta_B, params.phi_B, trader.grid)
    betas = compute_broker_beta_coefficients(params, trader, ric_b)
    coeffs = compute_broker_control_coefficients(params, betas, trader, ric_b)
    a_prime = compute_A_prime(params, trader, betas)
    a_curve = compute_A(a_prime)
    policy = critical_time(a_curve, a_prime)
    return coeffs, policy


def broker_control_curve(coeffs: BrokerCoefficients, mu_path: MuPath, q0_b: float,
                         q0_mean: float) -> StepCurve:
    """Two-branch optimal control; deterministic before revelation."""
    grid = coeffs.grid
    base = coeffs.ahat_b.values * q0_mean + coeffs.bhat_b.values * q0_b
    drift = step_drift_curve(coeffs.chat_b, coeffs.dhat_b, mu_path, grid)
    return StepCurve.smooth(grid, base, drift.t_reveal) + drift


def evaluate_broker_control(coeffs: BrokerCoefficients, policy: RevelationPolicy,
                            q0_b: float, q0_mean: float, mu_mean: float,
                            mu_realized: float, grid: TimeGrid | None = None,
                            nu_bar: StepCurve | None = None):
    """Optimal control path; the inventory companion needs the trader mean rate.

    Returns (control curve, inventory curve or None).  The inventory solves
    dQ = (control - mean trader rate) dt from q0_b.
    """
    grid = grid or coeffs.grid
    mu_path = MuPath(mu_mean, mu_realized, policy.t_reveal)
    control = broker_control_curve(coeffs, mu_path, q0_b, q0_mean)
    inventory = None
    if nu_bar is not None:
        flow = control - nu_bar
        inventory = ScalarCurve(grid, q0_b + flow.cumulative().node_values())
    return ScalarCurve(grid, control.node_values()), inventory


def broker_objective_reduced(t_reveal: float | None, a_curve: ScalarCurve,
                             mu_mean: float, mu_second_moment: float) -> float:
    """Filtration-dependent part of the broker's expected payoff.

    Revealing at the horizon equals never revealing because the curve
    vanishes there.
    """
    base = -mu_mean**2 * float(a_curve.values[0])
    if t_reveal is None:
        return base
    variance = mu_second_moment - mu_mean**2
    return base - variance * float(a_curve(t_reveal))


def policy_objective(policy: RevelationPolicy, mu_mean: float,
                     mu_second_moment: float) -> float:
    """Reduced objective achieved by the policy, using the refined minimum.

    Chord interpolation of the curve at an off-grid reveal time lies above
    the parabolic vertex estimate, so the policy carries its own value.
    """
    base = -mu_mean**2 * float(policy.a_curve.values[0])
    if not policy.reveals:
        return base
    return base - (mu_second_moment - mu_mean**2) * policy.a_min


def trader_moment_curves(trader: TraderCoefficients, mu_path: MuPath, q0_mean: float,
                         q0_second_moment: float) -> tuple[StepCurve, StepCurve]:
    """Two-branch versions of the conditional moment curves."""
    grid = trader.grid
    a_ = trader.abar.values
    b_ = trader.bbar.values
    drift = step_drift_curve(trader.cbar, trader.dbar, mu_path, grid)
    smooth = StepCurve.smooth(grid, (a_ + b_) * q0_mean, drift.t_reveal)
    nu_bar = smooth + drift
    quad_const = (a_**2 + 2.0 * a_ * b_) * q0_mean**2 + b_**2 * q0_second_moment
    lin = 2.0 * (a_ + b_) * q0_mean
    m_bar = StepCurve.smooth(grid, quad_const, drift.t_reveal) + lin * drift + drift * drift
    return nu_bar, m_bar


def broker_payoff_for_drift(policy: RevelationPolicy, trader: TraderCoefficients,
                            coeffs: BrokerCoefficients, params: ModelParams,
                            mu_value: float) -> float:
    """Realized-path payoff integral for one drift value.

    Every curve is carried in two-branch form, so the revelation jump is
    integrated exactly to trapezoid order.
    """
    grid = trader.grid
    mu_path = MuPath(params.mu_mean, mu_value, policy.t_reveal)
    nu_bar, m_bar = trader_moment_curves(trader, mu_path, params.q0_mean,
                                         params.q0_second_moment)
    control = broker_control_curve(coeffs, mu_path, params.Q0_B, params.q0_mean)
    flow = control - nu_bar
    inventory = StepCurve.smooth(grid, np.full(grid.n_nodes, params.Q0_B),
                                 flow.t_reveal) + flow.cumulative()
    integrand = (inventory * (params.b * nu_bar + mu_value)
                 + params.eta * m_bar
                 - params.eta_B * (control * control)
                 - 2.0 * params.a_B * (inventory * flow)
                 - params.phi_B * (inventory * inventory))
    return integrand.integral()


def _two_point_sampler(mu_mean: float, mu_second_moment: float):
    spread = np.sqrt(max(mu_second_moment - mu_mean**2, 0.0))

    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        signs = rng.choice((-1.0, 1.0), size=size)
        return mu_mean + spread * signs

    return sample


def broker_payoff_monte_carlo(policy: RevelationPolicy, trader: TraderCoefficients,
                              coeffs: BrokerCoefficients, params: ModelParams,
                              n_samples: int, seed: int, sampler=None
                              ) -> tuple[float, float]:
    """Monte Carlo estimate of the expected payoff under a revelation policy.

    The payoff is exactly quadratic in the realized drift (all curves are
    affine in it and the integrand quadratic), so each sample is evaluated
    through the fitted quadratic; the three support evaluations are full
    quadratures.  Default drift sampler: symmetric two-point law matching
    the first two moments.
    """
    p_zero = broker_payoff_for_drift(policy, trader, coeffs, params, 0.0)
    p_plus = broker_payoff_for_drift(policy, trader, coeffs, params, 1.0)
    p_minus = broker_payoff_for_drift(policy, trader, coeffs, params, -1.0)
    lin = 0.5 * (p_plus - p_minus)
    quad = 0.5 * (p_plus + p_minus) - p_zero

    rng = np.random.default_rng(seed)
    draw = sampler or _two_point_sampler(params.mu_mean, params.mu_second_moment)
    mus = np.asarray(draw(rng, n_samples), dtype=float)
    payoffs = p_zero + lin * mus + quad * mus**2
    estimate = float(np.mean(payoffs))
    stderr = float(np.std(payoffs, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return estimate, stderr


def post_reveal_drift_slope(coeffs: BrokerCoefficients, policy: RevelationPolicy
                            ) -> ScalarCurve:
    """Affine sensitivity of the post-revelation control to the realized drift."""
    grid = coeffs.grid
    mu_path = MuPath(0.0, 1.0, policy.t_reveal)
    return ScalarCurve(grid, drift_slope(coeffs.chat_b, coeffs.dhat_b, mu_path, grid))
