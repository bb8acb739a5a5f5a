"""Composite-trapezoid primitives on uniform grids.

All nested integrals in the solver reduce to prefix/suffix cumulative sums of
these two helpers, which keeps every operator application O(n) or O(n^2).
"""
from __future__ import annotations

import numpy as np


def prefix_trapz(values: np.ndarray, dt: float, axis: int = -1) -> np.ndarray:
    """Cumulative integral from the left edge: out[k] = integral over [t_0, t_k]."""
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    lo = np.take(values, range(0, n - 1), axis=axis)
    hi = np.take(values, range(1, n), axis=axis)
    inc = 0.5 * dt * (lo + hi)
    zero = np.zeros_like(np.take(values, [0], axis=axis))
    return np.concatenate([zero, np.cumsum(inc, axis=axis)], axis=axis)


def suffix_trapz(values: np.ndarray, dt: float, axis: int = -1) -> np.ndarray:
    """Cumulative integral to the right edge: out[k] = integral over [t_k, t_n]."""
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    lo = np.take(values, range(0, n - 1), axis=axis)
    hi = np.take(values, range(1, n), axis=axis)
    inc = 0.5 * dt * (lo + hi)
    rev = np.flip(np.cumsum(np.flip(inc, axis=axis), axis=axis), axis=axis)
    zero = np.zeros_like(np.take(values, [0], axis=axis))
    return np.concatenate([rev, zero], axis=axis)


def trapz(values: np.ndarray, dt: float, axis: int = -1) -> np.ndarray:
    """Plain composite trapezoid over the whole axis."""
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    lo = np.take(values, range(0, n - 1), axis=axis)
    hi = np.take(values, range(1, n), axis=axis)
    return np.sum(0.5 * dt * (lo + hi), axis=axis)


def prefix_to(prefix: np.ndarray, values: np.ndarray, ts: np.ndarray, t_stop: float,
              axis: int = 0) -> np.ndarray:
    """Integral from t_0 up to an off-grid t_stop along `axis`.

    `prefix` must be prefix_trapz(values) along the same axis.  The partial
    cell [t_k, t_stop] is closed with a trapezoid against the linear
    interpolant of `values`, which is exactly the insert-a-node rule.
    """
    ts = np.asarray(ts)
    t_stop = float(np.clip(t_stop, ts[0], ts[-1]))
    k = int(np.searchsorted(ts, t_stop, side="right") - 1)
    k = min(k, len(ts) - 2)
    base = np.take(prefix, k, axis=axis)
    frac = t_stop - ts[k]
    if frac <= 0.0:
        return base
    lo = np.take(values, k, axis=axis)
    hi = np.take(values, k + 1, axis=axis)
    at_stop = lo + (hi - lo) * (frac / (ts[k + 1] - ts[k]))
    return base + 0.5 * frac * (lo + at_stop)
