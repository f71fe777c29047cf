#!/usr/bin/env python3
"""
Linear shift interpolation for semi-Lagrangian steps

Both routines evaluate each row of ``values`` at the departure points
``x_j - s * h`` where ``s`` is the per-row shift measured in grid cells.
"""

import numpy as np


def _split_shift(values: np.ndarray, shifts: np.ndarray):
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"Expected a 2D array, got shape {values.shape}")
    shifts = np.broadcast_to(np.asarray(shifts, dtype=float), (values.shape[0],))
    whole = np.floor(shifts)
    frac = (shifts - whole)[:, None]
    nodes = np.arange(values.shape[1])[None, :]
    upper = nodes - whole.astype(np.int64)[:, None]
    return values, frac, upper


def periodic_shift(values: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Shift rows of a periodic field by ``shifts`` cells with linear interpolation

    Every output value is a convex combination of two inputs, so row sums
    are preserved exactly up to round-off.
    """
    values, frac, upper = _split_shift(values, shifts)
    n = values.shape[1]
    right = np.take_along_axis(values, upper % n, axis=1)
    left = np.take_along_axis(values, (upper - 1) % n, axis=1)
    return (1.0 - frac) * right + frac * left


def zero_inflow_shift(values: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Shift rows of a bounded field by ``shifts`` cells; departure points
    outside the grid contribute zero"""
    values, frac, upper = _split_shift(values, shifts)
    n = values.shape[1]
    lower = upper - 1
    right = np.where((upper >= 0) & (upper < n),
                     np.take_along_axis(values, np.clip(upper, 0, n - 1), axis=1), 0.0)
    left = np.where((lower >= 0) & (lower < n),
                    np.take_along_axis(values, np.clip(lower, 0, n - 1), axis=1), 0.0)
    return (1.0 - frac) * right + frac * left
