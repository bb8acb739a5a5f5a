import numpy as np
import pytest
from scipy.integrate import solve_ivp

from brokermfg.errors import NTooSmall
from brokermfg.model import ModelParams, TimeGrid
from brokermfg.riccati import solve_gamma, solve_gamma_broker, solve_gamma_N

GRID = TimeGrid(2.0, 800)


def reference_gamma(const: float, a: float, eta: float, grid: TimeGrid) -> np.ndarray:
    """Independent high-order adaptive integration of the backward equation."""

    def rhs(t, y):
        return const + (2.0 * a / eta) * y - y**2 / (2.0 * eta)

    sol = solve_ivp(rhs, (grid.T, 0.0), [0.0], t_eval=grid.ts[::-1],
                    method="DOP853", rtol=1e-12, atol=1e-14)
    return sol.y[0][::-1]


@pytest.mark.parametrize("phi", [0.5e-2, 1e-2, 2e-2])
def test_trader_solution_matches_reference(phi):
    a, eta = 1e-2, 1e-2
    ric = solve_gamma(a, eta, phi, GRID)
    ref = reference_gamma(phi - a * a / eta, a, eta, GRID)
    assert np.max(np.abs(ric.gamma.values - ref)) < 1e-8


def test_broker_solution_matches_reference():
    a_b, eta_b, phi_b = 1e-2, 5e-3, 1.5e-2
    ric = solve_gamma_broker(a_b, eta_b, phi_b, GRID)
    ref = reference_gamma(2.0 * (phi_b - a_b * a_b / eta_b), a_b, eta_b, GRID)
    assert np.max(np.abs(ric.gamma.values - ref)) < 1e-8


def test_vanishing_curvature_trader():
    ric = solve_gamma(1e-2, 1e-2, 1e-2, GRID)
    assert np.max(np.abs(ric.gamma.values)) == 0.0


def test_vanishing_curvature_broker():
    ric = solve_gamma_broker(1e-2, 5e-3, 2e-2, GRID)
    assert np.max(np.abs(ric.gamma.values)) == 0.0


def test_terminal_condition_exact():
    for ric in (solve_gamma(1e-2, 1e-2, 2e-2, GRID),
                solve_gamma_broker(1e-2, 5e-3, 1.5e-2, GRID)):
        assert ric.gamma.values[-1] == 0.0


def test_kernel_closed_form_when_curvature_vanishes():
    # exponent (gamma - 2a)/(2 eta) is the constant -1 here
    ric = solve_gamma(1e-2, 1e-2, 1e-2, GRID)
    ts = GRID.ts
    expected = np.exp(-(ts[None, :] - ts[:, None]))
    assert np.max(np.abs(ric.kernel.values - expected)) < 1e-12
    assert ric.kernel.values[0, -1] == pytest.approx(np.exp(-2.0), rel=1e-12)


def test_broker_kernel_closed_form():
    ric = solve_gamma_broker(1e-2, 5e-3, 2e-2, GRID)
    ts = GRID.ts
    expected = np.exp(-2.0 * (ts[None, :] - ts[:, None]))
    assert np.max(np.abs(ric.kernel.values - expected) / expected) < 1e-12


def test_kernel_diagonal_and_multiplicativity():
    ric = solve_gamma(1e-2, 1e-2, 2e-2, GRID)
    kernel = ric.kernel.values
    assert np.max(np.abs(np.diagonal(kernel) - 1.0)) == 0.0
    # multiplicativity is exact by construction from the shared log kernel
    idx = np.array([0, 100, 400, 799])
    for r in idx:
        for s in idx:
            prod = kernel[r, s] * kernel[s, idx]
            assert np.max(np.abs(prod - kernel[r, idx])) < 1e-10 * np.max(np.abs(kernel[r, idx]))


def test_residual_of_backward_equation():
    a, eta, phi = 1e-2, 1e-2, 2e-2
    ric = solve_gamma(a, eta, phi, GRID)
    g = ric.gamma.values
    dt = GRID.dt
    deriv = (g[2:] - g[:-2]) / (2.0 * dt)
    rhs = phi - a * a / eta + (2.0 * a / eta) * g[1:-1] - g[1:-1]**2 / (2.0 * eta)
    assert np.max(np.abs(deriv - rhs)) < 1e-6


def test_finite_game_reduces_to_trader_without_impact(ex_params):
    ric_inf = solve_gamma(ex_params.a, ex_params.eta, ex_params.phi, GRID)
    ric_n = solve_gamma_N(ex_params, 7, GRID)
    assert np.array_equal(ric_inf.gamma.values, ric_n.gamma.values)


def test_finite_game_gap_scales_inversely_with_count(generic_params):
    ric_inf = solve_gamma(generic_params.a, generic_params.eta, generic_params.phi, GRID)

    def gap(n):
        ric_n = solve_gamma_N(generic_params, n, GRID)
        return np.max(np.abs(ric_n.gamma.values - ric_inf.gamma.values))

    ratio = gap(64) / gap(128)
    assert 1.5 < ratio < 2.5


def test_finite_game_curvature_stays_small_at_vanishing_point(ex_params):
    params = ex_params.with_b(1.5e-5)
    n = 100
    ric_n = solve_gamma_N(params, n, GRID)
    a_n = params.a - params.b / (2 * n)
    ref = reference_gamma(params.phi - a_n * a_n / params.eta, a_n, params.eta, GRID)
    assert np.max(np.abs(ric_n.gamma.values - ref)) < 1e-8
    # the shift perturbs the vanishing solution by O(b/N)
    assert 0.0 < np.max(np.abs(ric_n.gamma.values)) < 10.0 * params.b / n


def test_count_below_threshold_rejected():
    params = ModelParams(a=1e-2, eta=1e-2, phi=1e-2, b=5e-2, a_B=1e-2, eta_B=5e-3,
                         phi_B=2e-2, T=2.0, q0_second_moment=1.0)
    with pytest.raises(NTooSmall):
        solve_gamma_N(params, 3, GRID)
