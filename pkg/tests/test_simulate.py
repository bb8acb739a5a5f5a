import numpy as np
import pytest

from brokermfg.errors import MissingSigma
from brokermfg.model import ScalarCurve, TimeGrid
from brokermfg.simulate import (SimulationConfig, simulate_broker_path, simulate_population,
                                simulate_price)
from brokermfg.trader import conditional_moments


@pytest.fixture(scope="module")
def sim(ex_solve, ex_params):
    config = SimulationConfig(n_paths=10_000, seed=7)
    return simulate_population(ex_solve.trader, ex_solve.policy, ex_params, config)


def test_population_mean_shifts_then_reverts(sim, ex_solve):
    grid = ex_solve.grid
    mean_inv = sim.mean_inventory()
    after = grid.ts > ex_solve.policy.t_reveal
    assert np.all(mean_inv[after] > 0.0)
    peak = np.max(mean_inv[after])
    assert mean_inv[-1] < peak


def test_population_std_nonincreasing(sim):
    stds = [snap.std for snap in sim.snapshots]
    assert all(later <= earlier * 1.0001 for earlier, later in zip(stds, stds[1:]))


def test_snapshot_mass_matches_path_count(sim):
    for snap in sim.snapshots:
        assert int(np.sum(snap.counts)) == 10_000


def test_zero_variance_population_collapses(ex_solve, ex_params):
    config = SimulationConfig(n_paths=200, seed=3, q0_mean=0.0, q0_std=0.0)
    result = simulate_population(ex_solve.trader, ex_solve.policy, ex_params, config)
    inventories = result.inventory_at_node(400)
    assert np.max(inventories) == np.min(inventories)   # all paths identical
    for snap in result.snapshots:
        assert snap.std <= 1e-12 * max(1.0, abs(snap.mean))   # zero up to mean-rounding


def test_population_reproducible_bit_for_bit(ex_solve, ex_params):
    config = SimulationConfig(n_paths=500, seed=99)
    a = simulate_population(ex_solve.trader, ex_solve.policy, ex_params, config)
    b = simulate_population(ex_solve.trader, ex_solve.policy, ex_params, config)
    assert np.array_equal(a.q0_samples, b.q0_samples)
    assert np.array_equal(a.inventory_offset, b.inventory_offset)
    for sa, sb in zip(a.snapshots, b.snapshots):
        assert np.array_equal(sa.counts, sb.counts)
        assert sa.mean == sb.mean and sa.std == sb.std


def test_broker_path_flat_before_revelation(ex_solve, ex_params):
    control, inventory = simulate_broker_path(ex_solve.broker, ex_solve.policy,
                                              ex_solve.trader, ex_solve.params)
    before = ex_solve.grid.ts <= ex_solve.policy.t_reveal
    assert np.max(np.abs(control.values[before])) == 0.0
    assert np.max(np.abs(inventory.values[before])) == 0.0


def test_broker_inventory_peak_location(ex_solve):
    _, inventory = simulate_broker_path(ex_solve.broker, ex_solve.policy,
                                        ex_solve.trader, ex_solve.params)
    peak_t = float(ex_solve.grid.ts[int(np.argmax(inventory.values))])
    assert 0.70 <= peak_t <= 0.80
    assert inventory.values[-1] < np.max(inventory.values)


def test_broker_inventory_step_refinement(ex_solve, ex_params):
    """Halving the integration step leaves terminal inventories unchanged.

    Off-grid values are defined by linear interpolation, and the trapezoid
    rule is exact on linear pieces, so refining the integration grid of a
    fixed control curve must not move the inventory.
    """
    from brokermfg.broker import broker_control_curve
    from brokermfg.trader import StepCurve, step_drift_curve
    grid = ex_solve.grid
    params = ex_solve.params
    mu_path = ex_solve.policy.mu_path(params)
    control = broker_control_curve(ex_solve.broker, mu_path, params.Q0_B, params.q0_mean)
    drift = step_drift_curve(ex_solve.trader.cbar, ex_solve.trader.dbar, mu_path, grid)
    nu_bar = StepCurve.smooth(
        grid, (ex_solve.trader.abar.values + ex_solve.trader.bbar.values) * params.q0_mean,
        drift.t_reveal) + drift
    flow = control - nu_bar
    coarse_terminal = flow.cumulative().node_values()[-1]
    fine_grid = TimeGrid(grid.T, 2 * grid.n_steps)
    refined = StepCurve(fine_grid, flow.t_reveal,
                        np.interp(fine_grid.ts, grid.ts, flow.pre),
                        np.interp(fine_grid.ts, grid.ts, flow.post))
    fine_terminal = refined.cumulative().node_values()[-1]
    assert abs(fine_terminal - coarse_terminal) / abs(coarse_terminal) < 1e-6


def test_price_deterministic_line(ex_solve, ex_params):
    grid = ex_solve.grid
    nu_bar = ScalarCurve(grid, np.zeros(grid.n_nodes))
    path = simulate_price(nu_bar, ex_params, sigma=0.0, seed=1)
    assert np.max(np.abs(path.values - 5.0 * grid.ts)) < 1e-12


def test_price_requires_sigma(ex_solve, ex_params):
    nu_bar = ScalarCurve(ex_solve.grid, np.zeros(ex_solve.grid.n_nodes))
    with pytest.raises(MissingSigma):
        simulate_price(nu_bar, ex_params, sigma=None, seed=1)


def test_price_mean_and_variance(ex_solve, ex_params):
    grid = ex_solve.grid
    mu_path = ex_solve.policy.mu_path(ex_params)
    nu_bar, _ = conditional_moments(ex_solve.trader, mu_path, 0.0, 0.25)
    sigma = 0.3
    n_paths = 2_000
    terminal = np.empty(n_paths)
    for i in range(n_paths):
        terminal[i] = simulate_price(nu_bar, ex_params, sigma, seed=1000 + i).values[-1]
    # with b = 0 the drift integrates to mu * T exactly
    expected_mean = ex_params.mu_realized * grid.T
    se = np.std(terminal) / np.sqrt(n_paths)
    assert abs(np.mean(terminal) - expected_mean) <= 3.0 * se
    var = np.var(terminal)
    # chi-square spread of the sample variance at this path count
    assert abs(var - sigma**2 * grid.T) <= 5.0 * sigma**2 * grid.T * np.sqrt(2.0 / n_paths)


def test_price_reproducible(ex_solve, ex_params):
    nu_bar = ScalarCurve(ex_solve.grid, np.ones(ex_solve.grid.n_nodes))
    a = simulate_price(nu_bar, ex_params, 0.5, seed=42)
    b = simulate_price(nu_bar, ex_params, 0.5, seed=42)
    assert np.array_equal(a.values, b.values)
