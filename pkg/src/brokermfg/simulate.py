"""Trajectory generation: trader population, broker path, optional price path.

Population paths are affine in the sampled initial inventory, so the whole
cross-section is two curves plus the sample vector; snapshots and CSV rows
are derived from that decomposition.  All randomness flows through a single
seeded generator, making byte-identical reruns trivial.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .broker import BrokerCoefficients, RevelationPolicy, broker_control_curve
from .errors import MissingSigma, NonPositiveParameter
from .model import ModelParams, ScalarCurve, TimeGrid
from .trader import StepCurve, TraderCoefficients, step_drift_curve


@dataclass(frozen=True)
class SimulationConfig:
    n_paths: int = 10_000
    seed: int = 7
    q0_mean: float = 0.0
    q0_std: float = 0.5
    sigma: float | None = None
    checkpoints: tuple = (0.0, 0.25, 0.5, 1.0, 1.5, 2.0)
    n_bins: int = 40

    def __post_init__(self):
        if self.n_paths < 1:
            raise NonPositiveParameter("n_paths must be >= 1")


@dataclass(frozen=True)
class PopulationSnapshot:
    time: float
    mean: float
    std: float
    bin_edges: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class PopulationResult:
    """Affine decomposition of all paths plus distribution snapshots.

    Inventory of path j at node k is  offset[k] + loading[k] * q0[j].
    """

    grid: TimeGrid
    q0_samples: np.ndarray
    control_offset: np.ndarray
    control_loading: np.ndarray
    inventory_offset: np.ndarray
    inventory_loading: np.ndarray
    snapshots: list[PopulationSnapshot] = field(default_factory=list)

    def inventory_at_node(self, k: int) -> np.ndarray:
        return self.inventory_offset[k] + self.inventory_loading[k] * self.q0_samples

    def mean_inventory(self) -> np.ndarray:
        qm = float(np.mean(self.q0_samples))
        return self.inventory_offset + self.inventory_loading * qm

    def std_inventory(self) -> np.ndarray:
        qs = float(np.std(self.q0_samples))
        return np.abs(self.inventory_loading) * qs


def simulate_population(trader: TraderCoefficients, policy: RevelationPolicy,
                        params: ModelParams, config: SimulationConfig) -> PopulationResult:
    grid = trader.grid
    mu_path = policy.mu_path(params)
    drift = step_drift_curve(trader.cbar, trader.dbar, mu_path, grid)
    base = StepCurve.smooth(grid, trader.abar.values * params.q0_mean, drift.t_reveal) + drift
    control_offset = base.node_values()
    control_loading = trader.bbar.values
    inventory_offset = base.cumulative().node_values()
    # loading curves are smooth; the kink sits entirely in the offset
    inventory_loading = 1.0 + StepCurve.smooth(grid, control_loading).cumulative().node_values()

    rng = np.random.default_rng(config.seed)
    q0 = rng.normal(config.q0_mean, config.q0_std, size=config.n_paths)

    snapshots = []
    for t in config.checkpoints:
        k = grid.node_of(float(t))
        inventories = inventory_offset[k] + inventory_loading[k] * q0
        counts, edges = np.histogram(inventories, bins=config.n_bins)
        snapshots.append(PopulationSnapshot(
            time=float(grid.ts[k]),
            mean=float(np.mean(inventories)),
            std=float(np.std(inventories)),
            bin_edges=edges,
            counts=counts,
        ))
    return PopulationResult(
        grid=grid, q0_samples=q0,
        control_offset=control_offset, control_loading=control_loading,
        inventory_offset=inventory_offset, inventory_loading=inventory_loading,
        snapshots=snapshots,
    )


def simulate_broker_path(coeffs: BrokerCoefficients, policy: RevelationPolicy,
                         trader: TraderCoefficients, params: ModelParams
                         ) -> tuple[ScalarCurve, ScalarCurve]:
    """Deterministic control and inventory of the broker for the realized drift."""
    grid = coeffs.grid
    mu_path = policy.mu_path(params)
    control = broker_control_curve(coeffs, mu_path, params.Q0_B, params.q0_mean)
    drift = step_drift_curve(trader.cbar, trader.dbar, mu_path, grid)
    nu_bar = StepCurve.smooth(
        grid, (trader.abar.values + trader.bbar.values) * params.q0_mean,
        drift.t_reveal) + drift
    inventory = (control - nu_bar).cumulative()
    return (ScalarCurve(grid, control.node_values()),
            ScalarCurve(grid, params.Q0_B + inventory.node_values()))


def simulate_price(nu_bar: ScalarCurve, params: ModelParams, sigma: float | None,
                   seed: int, s0: float = 0.0) -> ScalarCurve:
    """Euler path of the price; the drift carries the realized value throughout."""
    if sigma is None:
        raise MissingSigma("price simulation needs a volatility")
    grid = nu_bar.grid
    rng = np.random.default_rng(seed)
    shocks = rng.standard_normal(grid.n_steps)
    drift = params.b * nu_bar.values + params.mu_realized
    prices = np.empty(grid.n_nodes)
    prices[0] = s0
    dt = grid.dt
    root_dt = np.sqrt(dt)
    for k in range(grid.n_steps):
        prices[k + 1] = prices[k] + drift[k] * dt + sigma * root_dt * shocks[k]
    return ScalarCurve(grid, prices)
