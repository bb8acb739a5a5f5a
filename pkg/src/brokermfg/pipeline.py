"""End-to-end solve orchestration, example verification, and run-directory output.

A run directory holds one manifest plus CSV files, one per figure-style
output; every CSV starts with a comment line naming the quantity each column
carries.  The manifest is written last so its file list is complete.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .broker import (BrokerCoefficients, RevelationPolicy, broker_objective_reduced,
                     compute_A, compute_A_prime, compute_broker_beta_coefficients,
                     compute_broker_control_coefficients, critical_time, policy_objective)
from .model import ModelParams, TimeGrid, require_admissible_b, validate
from .riccati import solve_gamma_broker
from .simulate import SimulationConfig, simulate_broker_path, simulate_population
from .trader import TraderCoefficients, evaluate_trader_control, solve_trader

EXAMPLE_CHECK_TOL = 1e-5
EXAMPLE_N_STEPS = 2400
CRITICAL_TIME_WINDOW = (0.31, 0.33)
BROKER_PEAK_WINDOW = (0.70, 0.80)


def example_params() -> ModelParams:
    """Bundled example parameter set; both curvature curves vanish and b = 0."""
    a = baselines.EXAMPLE_A
    eta = baselines.EXAMPLE_ETA
    a_b = baselines.EXAMPLE_A_B
    eta_b = baselines.EXAMPLE_ETA_B
    return validate(ModelParams(
        a=a, eta=eta, phi=a * a / eta, b=0.0,
        a_B=a_b, eta_B=eta_b, phi_B=a_b * a_b / eta_b,
        T=baselines.EXAMPLE_T, Q0_B=0.0,
        mu_mean=0.0,
        mu_second_moment=baselines.EXAMPLE_MU_SECOND_MOMENT,
        mu_realized=baselines.EXAMPLE_MU_REALIZED,
        q0_mean=0.0, q0_second_moment=0.25,
    ))


@dataclass(frozen=True)
class SolveResult:
    params: ModelParams
    grid: TimeGrid
    trader: TraderCoefficients
    broker: BrokerCoefficients
    broker_betas: tuple
    policy: RevelationPolicy
    objective: float
    objective_never: float
    elapsed: float


def solve_pipeline(params: ModelParams, grid: TimeGrid,
                   a_prime_overrides: dict | None = None) -> SolveResult:
    """Trader coefficients, broker coefficients, and the revelation policy."""
    validate(params)
    if params.b > 0.0:
        require_admissible_b(params)
    start = time.perf_counter()
    trader = solve_trader(params, grid)
    ric_b = solve_gamma_broker(params.a_B, params.eta_B, params.phi_B, grid)
    betas = compute_broker_beta_coefficients(params, trader, ric_b)
    coeffs = compute_broker_control_coefficients(params, betas, trader, ric_b)
    a_prime = compute_A_prime(params, trader, betas, term_overrides=a_prime_overrides)
    a_curve = compute_A(a_prime)
    policy = critical_time(a_curve, a_prime)
    objective = policy_objective(policy, params.mu_mean, params.mu_second_moment)
    objective_never = broker_objective_reduced(None, a_curve,
                                               params.mu_mean, params.mu_second_moment)
    return SolveResult(
        params=params, grid=grid, trader=trader, broker=coeffs, broker_betas=betas,
        policy=policy, objective=objective, objective_never=objective_never,
        elapsed=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    detail: str


def run_example_checks(n_steps: int = EXAMPLE_N_STEPS, tol: float = EXAMPLE_CHECK_TOL,
                       a_prime_overrides: dict | None = None,
                       n_paths: int = 10_000, seed: int = 7
                       ) -> tuple[list[CheckOutcome], SolveResult]:
    """All example-reproduction checks; failures are recorded, never raised."""
    params = example_params()
    grid = TimeGrid(params.T, n_steps)
    result = solve_pipeline(params, grid, a_prime_overrides=a_prime_overrides)
    ts = grid.ts
    trader = result.trader
    gap = baselines.relative_sup_gap
    checks: list[CheckOutcome] = []

    def record(name: str, passed: bool, detail: str):
        checks.append(CheckOutcome(name, bool(passed), detail))

    g = gap(trader.beta3.values, baselines.beta3_exact(ts))
    record("beta3_closed_form", g < tol, f"rel sup gap {g:.3e} (tol {tol:g})")
    g = gap(trader.cbar.values, baselines.cbar_exact(ts))
    record("cbar_closed_form", g < tol, f"rel sup gap {g:.3e} (tol {tol:g})")
    g = gap(trader.dbar.values, baselines.dbar_exact(ts))
    record("dbar_closed_form", g < tol, f"rel sup gap {g:.3e} (tol {tol:g})")
    g = gap(result.broker.cbar_b.values, baselines.cbar_broker_exact(ts))
    record("cbar_broker_closed_form", g < tol, f"rel sup gap {g:.3e} (tol {tol:g})")
    g = gap(result.broker.dbar_b.values, baselines.dbar_broker_exact(ts))
    record("dbar_broker_closed_form", g < tol, f"rel sup gap {g:.3e} (tol {tol:g})")
    g = gap(result.policy.a_prime.values, baselines.a_prime_exact(ts))
    record("information_value_density_closed_form", g < tol,
           f"rel sup gap {g:.3e} (tol {tol:g})")

    lo, hi = CRITICAL_TIME_WINDOW
    t_c = result.policy.t_reveal
    record("critical_time_window", t_c is not None and lo <= t_c <= hi,
           f"t_c = {result.policy.label()} (window [{lo}, {hi}])")

    sim = simulate_population(trader, result.policy, params,
                              SimulationConfig(n_paths=n_paths, seed=seed))
    mean_inv = sim.mean_inventory()
    k_c = grid.node_of(t_c if t_c is not None else grid.T)
    after = mean_inv[k_c + 1:]
    peak_idx = int(np.argmax(after))
    positive_after = bool(np.all(after > 0.0))
    decreasing_tail = bool(mean_inv[-1] < after[peak_idx])
    record("population_mean_positive_then_reverting", positive_after and decreasing_tail,
           f"min after reveal {after.min():.4g}, peak {after[peak_idx]:.4g}, "
           f"terminal {mean_inv[-1]:.4g}")

    std_checkpoints = [s.std for s in sim.snapshots]
    slack = 1.05  # sampling error allowance on 10k paths
    nonincreasing = all(b2 <= a2 * slack for a2, b2 in zip(std_checkpoints, std_checkpoints[1:]))
    record("population_std_nonincreasing", nonincreasing,
           f"stds {['%.4f' % s for s in std_checkpoints]}")

    _, broker_inventory = simulate_broker_path(result.broker, result.policy, trader, params)
    peak_t = float(ts[int(np.argmax(broker_inventory.values))])
    lo_p, hi_p = BROKER_PEAK_WINDOW
    record("broker_inventory_peak", lo_p <= peak_t <= hi_p,
           f"peak at t = {peak_t:.4f} (window [{lo_p}, {hi_p}])")

    return checks, result


# --- run-directory output ---------------------------------------------------

def _write_csv(path, comment: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


@dataclass
class RunWriter:
    """Collects emitted files and writes the manifest last."""

    directory: object  # pathlib.Path
    seed: int
    config_echo: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    records: dict = field(default_factory=dict)

    def path(self, name: str):
        return self.directory / name

    def csv(self, name: str, comment: str, header: list[str], rows) -> None:
        _write_csv(self.path(name), comment, header, rows)
        self.files.append(name)

    def manifest(self) -> None:
        self.files.append("manifest.json")
        payload = {
            "config": self.config_echo,
            "seed": self.seed,
            "outputs": self.files,
            "timings_seconds": self.timings,
            "tolerances": {
                "series_rtol": 1e-12,
                "example_check_tol": EXAMPLE_CHECK_TOL,
            },
            **self.records,
        }
        with open(self.path("manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)


def write_solve_outputs(writer: RunWriter, result: SolveResult) -> None:
    ts = result.grid.ts
    trader = result.trader
    broker = result.broker
    writer.csv(
        "trader_coefficients.csv",
        "trader equilibrium coefficient curves: Abar_t, Bbar_t, Dbar_t, beta1_t, beta3_t",
        ["t", "abar", "bbar", "dbar", "beta1", "beta3"],
        zip(ts, trader.abar.values, trader.bbar.values, trader.dbar.values,
            trader.beta1.values, trader.beta3.values),
    )
    writer.csv(
        "broker_coefficients.csv",
        "broker coefficient curves: Abar^B_t, Dbar^B_t, Ahat^B_t, Bhat^B_t, Dhat^B_t",
        ["t", "abar_B", "dbar_B", "ahat_B", "bhat_B", "dhat_B"],
        zip(ts, broker.abar_b.values, broker.dbar_b.values, broker.ahat_b.values,
            broker.bhat_b.values, broker.dhat_b.values),
    )
    writer.csv(
        "fig1.csv",
        "information-value density A'_t and its antiderivative A_t (zero at horizon)",
        ["t", "a_prime", "a"],
        zip(ts, result.policy.a_prime.values, result.policy.a_curve.values),
    )
    degenerate = result.params.mu_variance == 0.0
    writer.csv(
        "policy.csv",
        "revelation policy: reveal time (or 'never'), reduced objective, curve minimum",
        ["t_reveal", "objective_reduced", "objective_never", "a_min", "note"],
        [(result.policy.label(), result.objective, result.objective_never,
          result.policy.a_min,
          "degenerate: objective flat in reveal time" if degenerate else "")],
    )
    writer.records["policy"] = {
        "t_reveal": result.policy.t_reveal,
        "objective_reduced": result.objective,
        "objective_never": result.objective_never,
        "a_min": result.policy.a_min,
        "degenerate": degenerate,
    }
    writer.timings["solve"] = result.elapsed


def write_simulation_outputs(writer: RunWriter, result: SolveResult,
                             config: SimulationConfig) -> None:
    params = result.params
    trader = result.trader
    mu_path = result.policy.mu_path(params)
    start = time.perf_counter()
    for name, q0 in (("fig2.csv", 0.0), ("fig3.csv", 200.0)):
        path = evaluate_trader_control(trader, q0, params.q0_mean, mu_path)
        writer.csv(
            name,
            f"representative trader with initial inventory {q0:g}: rate nu_hat_t and inventory Q_t",
            ["t", "control", "inventory", "sample_id"],
            zip(result.grid.ts, path.control.values, path.inventory.values,
                [0] * result.grid.n_nodes),
        )
    population = simulate_population(trader, result.policy, params, config)
    rows = []
    for snap in population.snapshots:
        rows.append((snap.time, "stats", "", "", "", snap.mean, snap.std))
        for left, right, count in zip(snap.bin_edges[:-1], snap.bin_edges[1:], snap.counts):
            rows.append((snap.time, "bin", left, right, int(count), "", ""))
    writer.csv(
        "fig4.csv",
        "population inventory snapshots: histogram bins and mean/std rows per checkpoint",
        ["time", "kind", "left", "right", "count", "mean", "std"],
        rows,
    )
    control, inventory = simulate_broker_path(result.broker, result.policy, trader, params)
    writer.csv(
        "fig5.csv",
        "broker path for the realized drift: rate nu_hat^B_t and inventory Q^B_t",
        ["t", "control", "inventory"],
        zip(result.grid.ts, control.values, inventory.values),
    )
    writer.timings["simulate"] = time.perf_counter() - start


def write_check_outputs(writer: RunWriter, checks: list[CheckOutcome]) -> None:
    writer.csv(
        "checks.csv",
        "example-reproduction verification table",
        ["name", "passed", "detail"],
        [(c.name, "pass" if c.passed else "FAIL", c.detail) for c in checks],
    )
    writer.records["checks"] = {c.name: c.passed for c in checks}
