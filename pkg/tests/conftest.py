import numpy as np
import pytest

from brokermfg.model import ModelParams, TimeGrid, validate
from brokermfg.pipeline import example_params, run_example_checks, solve_pipeline


@pytest.fixture(scope="session")
def ex_params() -> ModelParams:
    """Bundled example set: vanishing curvature, zero impact, drift 0 -> 5."""
    return example_params()


@pytest.fixture(scope="session")
def generic_params() -> ModelParams:
    """A parameter set with nonvanishing curvature and positive impact."""
    return validate(ModelParams(
        a=1e-2, eta=1e-2, phi=2e-2, b=2e-6,
        a_B=1e-2, eta_B=5e-3, phi_B=1.5e-2,
        T=2.0, Q0_B=10.0,
        mu_mean=2.0, mu_second_moment=25.0, mu_realized=5.0,
        q0_mean=1.0, q0_second_moment=1.25,
    ))


@pytest.fixture(scope="session")
def grid800(ex_params) -> TimeGrid:
    return TimeGrid(ex_params.T, 800)


@pytest.fixture(scope="session")
def ex_solve(ex_params, grid800):
    """Full pipeline solve of the example set on the 800-step grid."""
    return solve_pipeline(ex_params, grid800)


@pytest.fixture(scope="session")
def fine_example_checks():
    """Example verification at the fine default grid (shared: it is the slow one)."""
    return run_example_checks()


def sup_gap(numeric: np.ndarray, reference: np.ndarray) -> float:
    """Sup-norm gap normalized by the reference scale (1 when reference is tiny)."""
    scale = max(float(np.max(np.abs(reference))), 1.0)
    return float(np.max(np.abs(np.asarray(numeric) - np.asarray(reference)))) / scale
