import numpy as np
import pytest

from brokermfg import baselines
from brokermfg.broker import (broker_control_curve, broker_objective_reduced,
                              broker_payoff_for_drift, broker_payoff_monte_carlo,
                              compute_A, critical_time, evaluate_broker_control,
                              post_reveal_drift_slope, trader_moment_curves)
from brokermfg.model import ScalarCurve, TimeGrid
from brokermfg.trader import MuPath, StepCurve

from conftest import sup_gap


def test_broker_coefficient_closed_forms(ex_solve, grid800):
    ts = grid800.ts
    cbar_b = ex_solve.broker.cbar_b.values
    dbar_b = ex_solve.broker.dbar_b.values
    assert sup_gap(cbar_b, baselines.cbar_broker_exact(ts)) < 1e-5
    assert sup_gap(dbar_b, baselines.dbar_broker_exact(ts)) < 1e-5
    # spot values
    assert cbar_b[0, 0] == pytest.approx(-np.exp(4) + 2 * np.exp(2) - 1, rel=1e-5)
    assert dbar_b[0] == pytest.approx(0.5 * np.exp(4) - 3 * np.exp(2) + 0.5, rel=1e-5)


def test_broker_terminal_conditions(ex_solve):
    broker = ex_solve.broker
    assert broker.abar_b.values[-1] == 0.0
    assert broker.dbar_b.values[-1] == 0.0
    assert np.max(np.abs(broker.cbar_b.values[:, -1])) == 0.0
    assert broker.dhat_b.values[-1] == 0.0


def test_broker_control_coefficient_spot_values(ex_solve):
    broker = ex_solve.broker
    assert broker.bhat_b.values[0] == pytest.approx(-2.0, rel=1e-12)
    assert broker.dhat_b.values[0] == pytest.approx(
        (0.5 * np.exp(4) - 3 * np.exp(2) + 0.5) / 0.01, rel=1e-5)


def test_information_value_density_closed_form(ex_solve, grid800):
    a_prime = ex_solve.policy.a_prime.values
    exact = baselines.a_prime_exact(grid800.ts)
    assert sup_gap(a_prime, exact) < 1e-4   # 800-step grid; the fine grid meets 1e-5
    assert a_prime[-1] == 0.0


def test_information_value_density_grid_convergence(ex_params):
    from brokermfg.pipeline import solve_pipeline
    gaps = []
    for n in (400, 800):
        result = solve_pipeline(ex_params, TimeGrid(ex_params.T, n))
        gaps.append(sup_gap(result.policy.a_prime.values,
                            baselines.a_prime_exact(result.grid.ts)))
    assert 3.0 < gaps[0] / gaps[1] < 5.0   # second-order quadrature


def test_antiderivative_consistency(ex_solve, grid800):
    a_curve = ex_solve.policy.a_curve.values
    a_prime = ex_solve.policy.a_prime.values
    assert a_curve[-1] == 0.0
    dt = grid800.dt
    deriv = (a_curve[2:] - a_curve[:-2]) / (2.0 * dt)
    gap = np.max(np.abs(deriv - a_prime[1:-1])) / np.max(np.abs(a_prime))
    assert gap < 100.0 * dt**2   # second-order consistency


def test_zero_density_gives_zero_curve(grid800):
    zero = ScalarCurve(grid800, np.zeros(grid800.n_nodes))
    assert np.max(np.abs(compute_A(zero).values)) == 0.0


def test_critical_time_in_window(ex_solve):
    policy = ex_solve.policy
    assert policy.reveals
    assert 0.31 <= policy.t_reveal <= 0.33
    assert policy.a_min < 0.0
    # parabolic vertex sits at or below the chord interpolant, one cell-curvature away
    assert policy.a_min <= float(np.min(policy.a_curve.values)) + 1e-12
    assert policy.a_min == pytest.approx(float(policy.a_curve(policy.t_reveal)), rel=1e-4)


def test_positive_curve_means_never_reveal(grid800):
    policy = critical_time(ScalarCurve(grid800, np.ones(grid800.n_nodes)))
    assert not policy.reveals


def test_zero_minimum_counts_as_never(grid800):
    values = (grid800.ts - 1.0) ** 2
    policy = critical_time(ScalarCurve(grid800, values))
    assert not policy.reveals


def test_equal_minima_take_earliest(grid800):
    ts = grid800.ts
    values = -np.sin(np.pi * ts) ** 2   # equal minima at t = 0.5 and t = 1.5
    policy = critical_time(ScalarCurve(grid800, values))
    assert policy.t_reveal == pytest.approx(0.5, abs=1e-6)


def test_parabolic_refinement_recovers_offgrid_vertex():
    grid = TimeGrid(2.0, 50)   # vertex at 0.77 is off this coarse grid
    vertex = 0.77
    policy = critical_time(ScalarCurve(grid, (grid.ts - vertex) ** 2 - 0.5))
    assert policy.t_reveal == pytest.approx(vertex, abs=1e-12)
    assert policy.a_min == pytest.approx(-0.5, abs=1e-12)


def test_reduced_objective_horizon_equals_never(ex_solve):
    policy = ex_solve.policy
    at_horizon = broker_objective_reduced(ex_solve.grid.T, policy.a_curve, 0.0, 25.0)
    never = broker_objective_reduced(None, policy.a_curve, 0.0, 25.0)
    assert at_horizon == never == 0.0


def test_reduced_objective_flat_for_degenerate_drift(ex_solve):
    policy = ex_solve.policy
    values = [broker_objective_reduced(t, policy.a_curve, 3.0, 9.0)
              for t in (None, 0.0, 0.5, 1.7)]
    assert np.ptp(values) == 0.0


def test_reduced_objective_maximized_at_critical_time(ex_solve, ex_params):
    from brokermfg.broker import policy_objective
    policy = ex_solve.policy
    best = policy_objective(policy, ex_params.mu_mean, ex_params.mu_second_moment)
    sweep = np.array([broker_objective_reduced(t, policy.a_curve, ex_params.mu_mean,
                                               ex_params.mu_second_moment)
                      for t in ex_solve.grid.ts])
    assert best >= float(np.max(sweep))
    # the grid sweep peaks inside the cell holding the refined reveal time
    k_star = int(np.argmax(sweep))
    assert abs(ex_solve.grid.ts[k_star] - policy.t_reveal) <= ex_solve.grid.dt
    assert best > broker_objective_reduced(None, policy.a_curve,
                                           ex_params.mu_mean, ex_params.mu_second_moment)


def test_broker_inactive_before_revelation_with_zero_means(ex_solve, ex_params):
    control, inventory = evaluate_broker_control(
        ex_solve.broker, ex_solve.policy, 0.0, 0.0,
        ex_params.mu_mean, ex_params.mu_realized)
    before = ex_solve.grid.ts <= ex_solve.policy.t_reveal
    assert np.max(np.abs(control.values[before])) == 0.0
    assert inventory is None


def test_broker_control_jump_at_revelation(ex_solve, ex_params):
    grid = ex_solve.grid
    k = 128                       # node at t = 0.32 on the 800-step grid
    t_c = float(grid.ts[k])
    mu_path = MuPath(ex_params.mu_mean, ex_params.mu_realized, t_c)
    curve = broker_control_curve(ex_solve.broker, mu_path, 0.0, 0.0)
    jump = curve.post[k] - curve.pre[k]
    expected = ex_solve.broker.dhat_b.values[k] * (ex_params.mu_realized - ex_params.mu_mean)
    assert jump == pytest.approx(expected, rel=1e-10)
    # off-grid reveal: the same identity holds to quadrature order
    t_off = t_c + 0.4 * grid.dt
    curve = broker_control_curve(ex_solve.broker,
                                 MuPath(ex_params.mu_mean, ex_params.mu_realized, t_off),
                                 0.0, 0.0)
    jump = (np.interp(t_off, grid.ts, curve.post) - np.interp(t_off, grid.ts, curve.pre))
    expected = float(ex_solve.broker.dhat_b(t_off)) * (ex_params.mu_realized - ex_params.mu_mean)
    assert jump == pytest.approx(expected, rel=1e-4)


def test_broker_secrecy_and_affine_disclosure(ex_solve):
    policy = ex_solve.policy
    grid = ex_solve.grid
    lo, _ = evaluate_broker_control(ex_solve.broker, policy, 0.0, 0.0, 0.0, 2.0)
    hi, _ = evaluate_broker_control(ex_solve.broker, policy, 0.0, 0.0, 0.0, 7.0)
    before = grid.ts <= policy.t_reveal
    assert np.array_equal(lo.values[before], hi.values[before])
    after = ~before
    observed = (hi.values[after] - lo.values[after]) / 5.0
    predicted = post_reveal_drift_slope(ex_solve.broker, policy).values[after]
    assert np.max(np.abs(observed - predicted)) < 1e-8 * max(1.0, np.max(np.abs(predicted)))
    assert np.min(np.abs(predicted)) > 0.0   # realized drift recoverable from the path


def test_broker_buys_and_unwinds_after_revelation(ex_solve, ex_params):
    from brokermfg.simulate import simulate_broker_path
    control, inventory = simulate_broker_path(ex_solve.broker, ex_solve.policy,
                                              ex_solve.trader, ex_solve.params)
    after = ex_solve.grid.ts > ex_solve.policy.t_reveal
    assert np.max(inventory.values[after]) > 0.0
    peak = int(np.argmax(inventory.values))
    assert inventory.values[-1] < inventory.values[peak]
    assert control.values[peak + 40] > 0.0   # still buying just past the peak


def test_payoff_quadratic_in_realized_drift(ex_solve):
    p0 = broker_payoff_for_drift(ex_solve.policy, ex_solve.trader, ex_solve.broker,
                                 ex_solve.params, 0.0)
    p1 = broker_payoff_for_drift(ex_solve.policy, ex_solve.trader, ex_solve.broker,
                                 ex_solve.params, 1.0)
    pm1 = broker_payoff_for_drift(ex_solve.policy, ex_solve.trader, ex_solve.broker,
                                  ex_solve.params, -1.0)
    lin = 0.5 * (p1 - pm1)
    quad = 0.5 * (p1 + pm1) - p0
    direct = broker_payoff_for_drift(ex_solve.policy, ex_solve.trader, ex_solve.broker,
                                     ex_solve.params, 3.0)
    assert direct == pytest.approx(p0 + 3.0 * lin + 9.0 * quad, rel=1e-9)


def test_payoff_estimate_degenerate_drift(ex_solve):
    from dataclasses import replace
    params = replace(ex_solve.params, mu_mean=2.0, mu_second_moment=4.0, mu_realized=2.0)
    estimate, stderr = broker_payoff_monte_carlo(
        ex_solve.policy, ex_solve.trader, ex_solve.broker, params, 500, seed=3)
    assert stderr <= 1e-12 * max(1.0, abs(estimate))   # zero up to mean-rounding
    direct = broker_payoff_for_drift(ex_solve.policy, ex_solve.trader, ex_solve.broker,
                                     params, 2.0)
    assert estimate == pytest.approx(direct, rel=1e-12)


def test_payoff_estimator_matches_two_point_expectation(ex_solve, ex_params):
    estimate, stderr = broker_payoff_monte_carlo(
        ex_solve.policy, ex_solve.trader, ex_solve.broker, ex_params, 40_000, seed=9)
    p0 = broker_payoff_for_drift(ex_solve.policy, ex_solve.trader, ex_solve.broker,
                                 ex_solve.params, 0.0)
    p5 = broker_payoff_for_drift(ex_solve.policy, ex_solve.trader, ex_solve.broker,
                                 ex_solve.params, 5.0)
    pm5 = broker_payoff_for_drift(ex_solve.policy, ex_solve.trader, ex_solve.broker,
                                  ex_solve.params, -5.0)
    expectation = 0.5 * (p5 + pm5)
    assert abs(estimate - expectation) <= max(3.0 * stderr, 1e-9 * abs(expectation))


def value_route_objective(result, t_reveal) -> float:
    """Independent route to the filtration value via the backward feedback curve.

    Integrates eta*M - m1*betaB + betaB^2/(4 etaB) over time and averages over
    the symmetric two-point drift; matches the reduced objective up to a
    policy-independent constant.
    """
    params = result.params
    grid = result.grid
    total = 0.0
    for mu, weight in ((5.0, 0.5), (-5.0, 0.5)):
        mu_path = MuPath(params.mu_mean, mu, t_reveal)
        nu_bar, m_bar = trader_moment_curves(result.trader, mu_path, params.q0_mean,
                                             params.q0_second_moment)
        from brokermfg.trader import step_drift_curve
        drift = step_drift_curve(result.broker.cbar_b, result.broker.dbar_b, mu_path, grid)
        beta_b = StepCurve.smooth(grid, result.broker.abar_b.values * params.q0_mean,
                                  drift.t_reveal) + drift
        integrand = (params.eta * m_bar - nu_bar * beta_b
                     + (1.0 / (4.0 * params.eta_B)) * (beta_b * beta_b))
        total += weight * integrand.integral()
    return total


def test_reduced_objective_matches_value_route(ex_solve, ex_params):
    """The information-value curve reproduces value differences computed
    directly from the coefficient curves."""
    policy = ex_solve.policy
    pairs = [(policy.t_reveal, 0.0), (policy.t_reveal, None), (1.0, 0.5)]
    for t_a, t_b in pairs:
        reduced_diff = (broker_objective_reduced(t_a, policy.a_curve, ex_params.mu_mean,
                                                 ex_params.mu_second_moment)
                        - broker_objective_reduced(t_b, policy.a_curve, ex_params.mu_mean,
                                                   ex_params.mu_second_moment))
        value_diff = value_route_objective(ex_solve, t_a) - value_route_objective(ex_solve, t_b)
        assert value_diff == pytest.approx(reduced_diff, rel=2e-3, abs=1e-6)
