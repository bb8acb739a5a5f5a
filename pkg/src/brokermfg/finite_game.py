"""Nash equilibrium of finitely many traders and convergence measurements.

The N-trader equilibrium reuses the mean-field quadrature engine with two
changes: the terminal aversion shifts by b/(2N) (each trader's own
contribution to the average flow), and the curve operator picks up an
(N-1)/N prefactor.  Controls stay affine in the own initial inventory, so
population averages over sampled inventories reduce to first and second
sample moments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NTooSmall
from .model import KernelSurface, ModelParams, ScalarCurve, TimeGrid
from .operators import BaseKernels, KernelPair, build_base_kernels, lhat_series, neumann_resolve
from .riccati import RiccatiSolution, solve_gamma_N
from .trader import MuPath, TraderCoefficients, step_drift_curve


@dataclass(frozen=True)
class FiniteCoefficients:
    """Per-trader Nash control coefficients for a fixed trader count."""

    params: ModelParams
    n_traders: int
    riccati: RiccatiSolution
    kernels: BaseKernels
    z: ScalarCurve
    abar: ScalarCurve
    bbar: ScalarCurve
    cbar: KernelSurface
    dbar: ScalarCurve

    @property
    def grid(self) -> TimeGrid:
        return self.z.grid

    @property
    def operator_scale(self) -> float:
        return (self.n_traders - 1) / self.n_traders


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-N error records against the mean-field moments, with fitted decay rates."""

    ns: tuple
    rows: tuple  # (N, repeat, e1, e2)
    e1_by_n: dict
    e2_by_n: dict
    slope_e1: float
    slope_e2: float


def compute_finite_coefficients(params: ModelParams, n_traders: int, grid: TimeGrid
                                ) -> FiniteCoefficients:
    if n_traders < 1:
        raise NTooSmall("need at least one trader")
    if n_traders == 1 and params.b > 0.0:
        raise NTooSmall("single-trader game is degenerate for positive permanent impact")
    ric = solve_gamma_N(params, n_traders, grid)
    a_n = ric.a
    kernels = build_base_kernels(ric, a_n, params.eta)
    scale = (n_traders - 1) / n_traders
    z = ScalarCurve(grid, (ric.gamma.values - 2.0 * a_n) / (2.0 * params.eta) * ric.exp_g)
    w = neumann_resolve(z, params.b, kernels, scale=scale)
    summed, _ = lhat_series(KernelPair(kernels.c2, kernels.d1), params.b, kernels, scale=scale)
    return FiniteCoefficients(
        params=params, n_traders=n_traders, riccati=ric, kernels=kernels,
        z=z,
        abar=ScalarCurve(grid, w.values - z.values),
        bbar=z,
        cbar=summed.e,
        dbar=summed.f,
    )


def nash_control_matrix(fin: FiniteCoefficients, inventories: np.ndarray,
                        mu_path: MuPath) -> np.ndarray:
    """Control paths of all traders, one row per trader."""
    inventories = np.asarray(inventories, dtype=float)
    if inventories.shape != (fin.n_traders,):
        raise LengthMismatch(
            f"expected {fin.n_traders} inventories, got {inventories.shape}")
    grid = fin.grid
    drift = step_drift_curve(fin.cbar, fin.dbar, mu_path, grid).node_values()
    shared = fin.abar.values * fin.params.q0_mean + drift
    return shared[None, :] + inventories[:, None] * fin.bbar.values[None, :]


def evaluate_nash_controls(fin: FiniteCoefficients, inventories, mu_path: MuPath
                           ) -> list[ScalarCurve]:
    matrix = nash_control_matrix(fin, np.asarray(inventories, dtype=float), mu_path)
    return [ScalarCurve(fin.grid, row) for row in matrix]


def _population_gap(fin: FiniteCoefficients, nu_bar: np.ndarray, m_bar: np.ndarray,
                    q_mean: float, q_sq_mean: float, drift: np.ndarray) -> tuple[float, float]:
    """Sup-norm gaps of the empirical first/second control moments.

    Controls are affine in the own inventory, so the cross-sectional moments
    depend on the sample only through its first two moments.
    """
    shared = fin.abar.values * fin.params.q0_mean + drift
    avg = shared + fin.bbar.values * q_mean
    sq_avg = shared**2 + 2.0 * shared * fin.bbar.values * q_mean + fin.bbar.values**2 * q_sq_mean
    e1 = float(np.max(np.abs(avg - nu_bar)) ** 2)
    e2 = float(np.max(np.abs(sq_avg - m_bar)))
    return e1, e2


def convergence_study(params: ModelParams, trader: TraderCoefficients,
                      mu_path: MuPath, ns, n_repeats: int, seed: int
                      ) -> ConvergenceReport:
    """Monte Carlo decay rates of the finite-game moment errors.

    e1(N) averages the squared sup-gap between the empirical mean control and
    the mean-field first moment; e2(N) the sup-gap of second moments.  The
    initial inventory law needs a finite fourth moment for the second-moment
    rate; the Gaussian sampler used here has all moments.
    """
    grid = trader.grid
    a_ = trader.abar.values
    b_ = trader.bbar.values
    drift_mf = step_drift_curve(trader.cbar, trader.dbar, mu_path, grid).node_values()
    nu_bar = (a_ + b_) * params.q0_mean + drift_mf
    m_bar = ((a_**2 + 2.0 * a_ * b_) * params.q0_mean**2 + b_**2 * params.q0_second_moment
             + 2.0 * (a_ + b_) * drift_mf * params.q0_mean + drift_mf**2)

    rng = np.random.default_rng(seed)
    rows = []
    e1_by_n: dict = {}
    e2_by_n: dict = {}
    for n_traders in ns:
        fin = compute_finite_coefficients(params, int(n_traders), grid)
        drift_n = step_drift_curve(fin.cbar, fin.dbar, mu_path, grid).node_values()
        e1_list = []
        e2_list = []
        for rep in range(n_repeats):
            q = rng.normal(params.q0_mean, params.q0_std, size=int(n_traders))
            e1, e2 = _population_gap(fin, nu_bar, m_bar,
                                     float(np.mean(q)), float(np.mean(q**2)), drift_n)
            rows.append((int(n_traders), rep, e1, e2))
            e1_list.append(e1)
            e2_list.append(e2)
        e1_by_n[int(n_traders)] = float(np.mean(e1_list))
        e2_by_n[int(n_traders)] = float(np.mean(e2_list))

    log_n = np.log(np.array([float(n) for n in ns]))
    slope_e1 = float(np.polyfit(log_n, np.log([e1_by_n[int(n)] for n in ns]), 1)[0])
    slope_e2 = float(np.polyfit(log_n, np.log([e2_by_n[int(n)] for n in ns]), 1)[0])
    return ConvergenceReport(
        ns=tuple(int(n) for n in ns), rows=tuple(rows),
        e1_by_n=e1_by_n, e2_by_n=e2_by_n,
        slope_e1=slope_e1, slope_e2=slope_e2,
    )
