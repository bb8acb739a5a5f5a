"""Analytic baselines for the bundled example parameter set.

Valid exactly when eta*phi = a^2 and eta_B*phi_B = a_B^2 (both backward
curvature curves vanish), permanent impact is zero, and the cost levels are
a = eta = 1e-2, a_B = 1e-2, eta_B = 5e-3.  The verification suite and the
example-reproduction command compare solver output against these curves.
"""
from __future__ import annotations

import numpy as np

EXAMPLE_A = 1e-2
EXAMPLE_ETA = 1e-2
EXAMPLE_A_B = 1e-2
EXAMPLE_ETA_B = 5e-3
EXAMPLE_T = 2.0
EXAMPLE_MU_REALIZED = 5.0
EXAMPLE_MU_SECOND_MOMENT = 25.0


def beta3_exact(ts: np.ndarray, T: float = EXAMPLE_T) -> np.ndarray:
    return np.exp(T - ts) - 1.0


def dbar_exact(ts: np.ndarray, T: float = EXAMPLE_T) -> np.ndarray:
    return 50.0 * (np.exp(T - ts) - 1.0)


def cbar_exact(ts: np.ndarray, T: float = EXAMPLE_T) -> np.ndarray:
    s, t = np.meshgrid(ts, ts, indexing="ij")
    return 50.0 * (np.exp(s - t) - np.exp(T - t))


def cbar_broker_exact(ts: np.ndarray, T: float = EXAMPLE_T) -> np.ndarray:
    s, t = np.meshgrid(ts, ts, indexing="ij")
    return -np.exp(2 * T - 2 * t) + np.exp(T + s - 2 * t) + np.exp(T - t) - np.exp(s - t)


def dbar_broker_exact(ts: np.ndarray, T: float = EXAMPLE_T) -> np.ndarray:
    return (-T + ts + 2.5) * np.exp(2 * T - 2 * ts) - 3.0 * np.exp(T - ts) + 0.5


def a_prime_exact(ts: np.ndarray, T: float = EXAMPLE_T) -> np.ndarray:
    th = T - ts
    return (50.0 * (th - 2.5) * (th - 2.0) * np.exp(4 * th)
            + 275.0 * (th - 13.0 / 6.0) * np.exp(3 * th)
            - 50.0 * (th - 107.0 / 12.0) * np.exp(2 * th)
            - 112.5 * np.exp(th)
            - 50.0 * (th - 17.0 / 12.0)
            + 50.0 * (th - 13.0 / 6.0) * np.exp(-th)
            + 50.0 * np.exp(-2 * th))


def relative_sup_gap(numeric: np.ndarray, exact: np.ndarray) -> float:
    """Sup-norm gap scaled by the baseline's own sup norm.

    Pointwise relative error is meaningless near the baselines' zero
    crossings, so comparisons are normalized by the curve scale.
    """
    scale = float(np.max(np.abs(exact)))
    if scale == 0.0:
        return float(np.max(np.abs(numeric)))
    return float(np.max(np.abs(numeric - exact))) / scale
