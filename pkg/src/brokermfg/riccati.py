"""Scalar Riccati terminal-value problems and their exponential kernels.

Each solve integrates backwards from a zero terminal condition with classic
fixed-step RK4 on the shared grid, then builds the two-time kernel from the
cumulative trapezoid of the exponent, never from per-step factor products, so
the multiplicative property holds to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NTooSmall, RiccatiBlowup
from .model import KernelSurface, ModelParams, ScalarCurve, TimeGrid
from .quadrature import prefix_trapz

_BLOWUP_LIMIT = 1e12


@dataclass(frozen=True)
class RiccatiSolution:
    """Backward solution together with its propagation kernel.

    `log_kernel` holds G_t = integral over [0, t] of (gamma - 2a)/(2 eta);
    the kernel is exp(G_t - G_s) evaluated with the signed convention, so
    entries with s > t are the reciprocals of the forward values.
    """

    a: float
    eta: float
    gamma: ScalarCurve
    log_kernel: ScalarCurve
    kernel: KernelSurface

    @property
    def grid(self) -> TimeGrid:
        return self.gamma.grid

    @property
    def exp_g(self) -> np.ndarray:
        return np.exp(self.log_kernel.values)

    @property
    def exp_neg_g(self) -> np.ndarray:
        return np.exp(-self.log_kernel.values)


def _integrate_backward(rhs, grid: TimeGrid) -> np.ndarray:
    out = np.empty(grid.n_nodes)
    out[-1] = 0.0
    h = -grid.dt
    y = 0.0
    for k in range(grid.n_steps, 0, -1):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(y) or abs(y) > _BLOWUP_LIMIT:
            raise RiccatiBlowup(f"gamma diverged near t={grid.ts[k - 1]:.6g}")
        out[k - 1] = y
    return out


def _finish(gamma: np.ndarray, a: float, eta: float, grid: TimeGrid) -> RiccatiSolution:
    g = (gamma - 2.0 * a) / (2.0 * eta)
    G = prefix_trapz(g, grid.dt)
    kernel = np.exp(G[None, :] - G[:, None])
    return RiccatiSolution(
        a=a, eta=eta,
        gamma=ScalarCurve(grid, gamma),
        log_kernel=ScalarCurve(grid, G),
        kernel=KernelSurface(grid, kernel),
    )


def solve_gamma(a: float, eta: float, phi: float, grid: TimeGrid) -> RiccatiSolution:
    """Trader-side solve: gamma' = phi - a^2/eta + (2a/eta) gamma - gamma^2/(2 eta)."""
    const = phi - a * a / eta

    def rhs(y):
        return const + (2.0 * a / eta) * y - y * y / (2.0 * eta)

    return _finish(_integrate_backward(rhs, grid), a, eta, grid)


def solve_gamma_broker(a_B: float, eta_B: float, phi_B: float, grid: TimeGrid) -> RiccatiSolution:
    """Broker-side solve; the constant term is doubled relative to the trader's."""
    const = 2.0 * (phi_B - a_B * a_B / eta_B)

    def rhs(y):
        return const + (2.0 * a_B / eta_B) * y - y * y / (2.0 * eta_B)

    return _finish(_integrate_backward(rhs, grid), a_B, eta_B, grid)


def solve_gamma_N(params: ModelParams, n_traders: int, grid: TimeGrid) -> RiccatiSolution:
    """Finite-game solve with the effective aversion a - b/(2N)."""
    if n_traders <= params.b / params.a:
        raise NTooSmall(f"need N > b/a = {params.b / params.a:g}, got {n_traders}")
    a_N = params.a - params.b / (2.0 * n_traders)
    return solve_gamma(a_N, params.eta, params.phi, grid)
