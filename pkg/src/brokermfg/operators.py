"""Discretized integral operators on curves and on two-time kernel pairs.

The curve operator acts on deterministic paths, where every conditional
expectation collapses to the identity.  Drift dependence is never pushed
through the curve operator; it travels through the kernel-pair transform,
whose two displayed components propagate the coefficient pair (E, F) of a
drift functional  t -> integral_0^t E(s,t) mu_s ds + mu_t F(t).

All kernels factor through exp(G_t - G_s), so a curve application costs O(n)
and a kernel-pair application O(n^2) via cumulative trapezoid passes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SeriesDiverging, TruncationLimit
from .model import KernelSurface, ScalarCurve, TimeGrid
from .quadrature import prefix_trapz, suffix_trapz
from .riccati import RiccatiSolution

SERIES_RTOL = 1e-12
SERIES_MAX_TERMS = 200


@dataclass(frozen=True)
class BaseKernels:
    """Kernels of the curve operator and the drift transform.

    The three-index kernel is stored in its exact separated form:
    a_outer[s, t] = (gamma_t - 2a)/(4 eta^2) * Gamma(s, t) and
    a_inner[r, s] = Gamma(r, s).
    """

    a: float
    eta: float
    a_outer: KernelSurface
    a_inner: KernelSurface
    b2: KernelSurface
    c2: KernelSurface
    d1: ScalarCurve
    # prefactor (gamma - 2a)/(4 eta^2) and exponent arrays for fast paths
    c_curve: ScalarCurve
    log_g: ScalarCurve

    @property
    def grid(self) -> TimeGrid:
        return self.d1.grid

    @property
    def exp_g(self) -> np.ndarray:
        return np.exp(self.log_g.values)

    @property
    def exp_neg_g(self) -> np.ndarray:
        return np.exp(-self.log_g.values)

    @property
    def i1(self) -> np.ndarray:
        """Forward-weighted tail integral: i1[s] = integral_s^T Gamma(r, s) dr."""
        return 2.0 * self.eta * self.d1.values


@dataclass(frozen=True)
class KernelPair:
    """Coefficients (E, F) of a drift functional; acted on by the pair transform."""

    e: KernelSurface
    f: ScalarCurve

    @property
    def grid(self) -> TimeGrid:
        return self.f.grid

    def sup_norm(self) -> float:
        return max(float(np.max(np.abs(self.e.values))), float(np.max(np.abs(self.f.values))))


def build_base_kernels(ric: RiccatiSolution, a: float, eta: float) -> BaseKernels:
    grid = ric.grid
    dt = grid.dt
    gamma = ric.gamma.values
    G = ric.log_kernel.values
    eg = np.exp(G)
    emg = np.exp(-G)
    c = (gamma - 2.0 * a) / (4.0 * eta * eta)
    gam = ric.kernel.values
    i1 = eg * suffix_trapz(emg, dt)
    c2 = c[None, :] * gam * i1[:, None]
    d1 = i1 / (2.0 * eta)
    return BaseKernels(
        a=a, eta=eta,
        a_outer=KernelSurface(grid, c[None, :] * gam),
        a_inner=KernelSurface(grid, gam),
        b2=KernelSurface(grid, gam / (2.0 * eta)),
        c2=KernelSurface(grid, c2),
        d1=ScalarCurve(grid, d1),
        c_curve=ScalarCurve(grid, c),
        log_g=ScalarCurve(grid, G),
    )


def apply_L(curve: ScalarCurve, kernels: BaseKernels, scale: float = 1.0) -> ScalarCurve:
    """Curve operator on a deterministic path (conditional expectations drop)."""
    grid = kernels.grid
    dt = grid.dt
    eg = kernels.exp_g
    emg = kernels.exp_neg_g
    c = kernels.c_curve.values
    xi = curve.values
    # tail[s] = integral_s^T Gamma(r, s) xi_r dr, up to the exp(G_s) factor
    tail = suffix_trapz(emg * xi, dt)
    term1 = c * eg * prefix_trapz(tail, dt)
    term2 = eg * tail / (2.0 * kernels.eta)
    return ScalarCurve(grid, scale * (term1 + term2))


def neumann_resolve(curve: ScalarCurve, b: float, kernels: BaseKernels,
                    scale: float = 1.0, rtol: float = SERIES_RTOL,
                    max_terms: int = SERIES_MAX_TERMS) -> ScalarCurve:
    """Resolvent sum y = curve + b L curve + b^2 L^2 curve + ...

    The returned y satisfies y - b L y = curve up to the truncation tail.
    """
    total = curve.values.copy()
    term = curve.values
    prev_sup = float(np.max(np.abs(term)))
    for _ in range(max_terms):
        term = apply_L(ScalarCurve(kernels.grid, term), kernels, scale=scale).values * b
        sup = float(np.max(np.abs(term)))
        if sup <= rtol * (1.0 + float(np.max(np.abs(total)))):
            total = total + term
            return ScalarCurve(kernels.grid, total)
        if sup >= prev_sup and prev_sup > 0.0:
            raise SeriesDiverging(
                f"increment grew from {prev_sup:.3g} to {sup:.3g}; b too large")
        total = total + term
        prev_sup = sup
    raise TruncationLimit(f"no convergence after {max_terms} terms")


def apply_Lhat(pair: KernelPair, kernels: BaseKernels, scale: float = 1.0) -> KernelPair:
    """One application of the kernel-pair transform (both displayed components)."""
    grid = kernels.grid
    dt = grid.dt
    eg = kernels.exp_g
    emg = kernels.exp_neg_g
    c = kernels.c_curve.values
    E = pair.e.values
    F = pair.f.values

    # tail_r[s, u] = integral_u^T exp(-G_r) E[s, r] dr
    tail_r = suffix_trapz(emg[None, :] * E, dt, axis=1)
    # first component, term 1: c_t e^{G_t} * integral_s^t tail_r[s, u] du
    q = prefix_trapz(tail_r, dt, axis=1)
    term1 = (c * eg)[None, :] * (q - np.diagonal(q)[:, None])
    # pt[u, r] = integral_0^u E[u', r] du'
    pt = prefix_trapz(E, dt, axis=0)
    diag_pt = np.diagonal(pt).copy()
    # m2[s, r0] = integral_{r0}^T exp(-G_r) pt[s, r] dr; the diagonal closes
    # integral_s^r E[u, r] du = pt[r, r] - pt[s, r] under the outer r-integral
    m2 = suffix_trapz(emg[None, :] * pt, dt, axis=1)
    band = suffix_trapz(emg * (diag_pt + F), dt) - np.diagonal(m2)
    term2 = (c * eg)[None, :] * band[:, None]
    term3 = eg[None, :] * tail_r / (2.0 * kernels.eta)
    e_new = scale * (term1 + term2 + term3)

    f_new = scale * eg * band / (2.0 * kernels.eta)
    return KernelPair(KernelSurface(grid, e_new), ScalarCurve(grid, f_new))


def lhat_series(seed: KernelPair, b: float, kernels: BaseKernels, scale: float = 1.0,
                rtol: float = SERIES_RTOL, max_terms: int = SERIES_MAX_TERMS
                ) -> tuple[KernelPair, list[KernelPair]]:
    """Sum of b^k * transform^k applied to the seed pair, plus the per-order terms.

    The per-order list is needed downstream, where the third coefficient sums
    the orders with weight b^(k+1) under an extra propagation integral.
    """
    orders = [seed]
    e_sum = seed.e.values.copy()
    f_sum = seed.f.values.copy()
    weight = 1.0
    pair = seed
    prev_sup = pair.sup_norm()
    for _ in range(max_terms):
        pair = apply_Lhat(pair, kernels, scale=scale)
        weight *= b
        sup = weight * pair.sup_norm()
        partial_sup = max(float(np.max(np.abs(e_sum))), float(np.max(np.abs(f_sum))))
        if sup <= rtol * (1.0 + partial_sup):
            break
        if sup >= prev_sup and prev_sup > 0.0 and b > 0.0:
            raise SeriesDiverging(
                f"pair-series increment grew from {prev_sup:.3g} to {sup:.3g}")
        orders.append(pair)
        e_sum += weight * pair.e.values
        f_sum += weight * pair.f.values
        prev_sup = sup
    else:
        raise TruncationLimit(f"pair series did not settle in {max_terms} terms")
    grid = kernels.grid
    summed = KernelPair(KernelSurface(grid, e_sum), ScalarCurve(grid, f_sum))
    return summed, orders


# Dense assembly and norm bounds, used by the verification suite.

def l_matrix(kernels: BaseKernels, scale: float = 1.0) -> np.ndarray:
    """Dense matrix of the discretized curve operator (column-by-column)."""
    n = kernels.grid.n_nodes
    mat = np.empty((n, n))
    basis = np.zeros(n)
    for j in range(n):
        basis[j] = 1.0
        mat[:, j] = apply_L(ScalarCurve(kernels.grid, basis), kernels, scale=scale).values
        basis[j] = 0.0
    return mat


def l_norm_bound(a: float, eta: float, phi: float, T: float) -> float:
    """Closed-form bound on the curve-operator norm."""
    rate = max(a, math.sqrt(eta * phi)) / eta
    return math.exp(2.0 * T * rate) * math.sqrt(
        max(a * a, eta * phi) * T**4 / (4.0 * eta**4) + T * T / (eta * eta))


def lhat_norm_bound(a: float, eta: float, phi: float, T: float) -> float:
    """Closed-form bound on the kernel-pair transform norm."""
    rate = max(a, math.sqrt(eta * phi)) / eta
    top = max(a, math.sqrt(eta * phi))
    return math.exp(2.0 * T * rate) * max(
        T * T / (4.0 * eta) + T / (2.0 * eta),
        top / (2.0 * eta * eta) * (T * T + T) + T / (2.0 * eta))


def lhat_discrete_majorant(kernels: BaseKernels) -> float:
    """Discrete norm majorant: pair transform with absolute kernels on (1, 1).

    Dominates |transform of (E, F)| / max(sup|E|, sup|F|) entrywise, so it is
    comparable against the closed-form bound.
    """
    grid = kernels.grid
    dt = grid.dt
    n = grid.n_nodes
    ones = np.ones((n, n))
    eg = kernels.exp_g
    emg = kernels.exp_neg_g
    c_abs = np.abs(kernels.c_curve.values)
    tail_abs = suffix_trapz(emg[None, :] * ones, dt, axis=1)
    q_abs = prefix_trapz(tail_abs, dt, axis=1)
    t1 = (c_abs * eg)[None, :] * np.abs(q_abs - np.diagonal(q_abs)[:, None])
    pt = prefix_trapz(ones, dt, axis=0)
    diag_pt = np.diagonal(pt).copy()
    m2 = suffix_trapz(emg[None, :] * pt, dt, axis=1)
    band = suffix_trapz(emg * (diag_pt + 1.0), dt) - np.diagonal(m2)
    t2 = (c_abs * eg)[None, :] * np.abs(band)[:, None]
    t3 = eg[None, :] * tail_abs / (2.0 * kernels.eta)
    e_maj = float(np.max(t1 + t2 + t3))
    f_maj = float(np.max(np.abs(eg * band) / (2.0 * kernels.eta)))
    return max(e_maj, f_maj)
