#!/usr/bin/env python3
"""
Diagnostics

Kinetic perturbation J(t) = ½‖f − μ‖², electric energy ½∫E² dx, moment misfit
½Σ_n‖m_n − m̄_n‖², the near-equilibrium reconstruction
    f_N = μ + Σ_n (m_n − m̄_n)·𝓗_n(v)
and the L² bound ‖f_N − μ‖² ≤ Σ_n‖m_n − m̄_n‖² connecting them.

All norms use the solver grids: rectangle rule in x, the trapezoid velocity
quadrature in v.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ArgumentError
from .field import Grid1D
from .hermite import Equilibrium, hermite_function_table
from .kinetic import PhaseSpaceField
from .msolver import MomentField, equilibrium_moments


@dataclass(frozen=True)
class TimeSeriesRecord:
    time: float
    J: float
    E_energy: float
    moment_misfit: float

    def __post_init__(self):
        for name in ("J", "E_energy", "moment_misfit"):
            value = getattr(self, name)
            if not value >= 0:
                raise ArgumentError(f"Diagnostic {name} must be non-negative, got {value}")

    def as_row(self):
        return [self.time, self.J, self.E_energy, self.moment_misfit]


SERIES_HEADER = ["t", "J", "E_energy", "moment_misfit"]


def kinetic_perturbation(state: PhaseSpaceField, mu: Equilibrium) -> float:
    """J = ½ Σ_{j,l} (f − μ)²·Δx·Δv"""
    return state.half_squared_distance(mu(state.grid.v))


def electric_energy(E, grid: Grid1D) -> float:
    """½ Σ_j E(x_j)²·Δx"""
    E = np.asarray(E, dtype=float)
    return 0.5 * float(np.sum(E * E)) * grid.dx


def moment_misfit(moments: MomentField, m_bar, dx: float) -> float:
    """½ Σ_n Σ_j (m_n(x_j) − m̄_n)²·Δx"""
    m_bar = np.asarray(m_bar, dtype=float)
    if m_bar.shape != (moments.values.shape[0],):
        raise ArgumentError(f"Equilibrium moments have shape {m_bar.shape}, "
                            f"expected ({moments.values.shape[0]},)")
    diff = moments.values - m_bar[:, None]
    return 0.5 * float(np.sum(diff * diff)) * dx


def reconstruct_fN(moments: MomentField, mu: Equilibrium, grid: Grid1D,
                   m_bar: Optional[np.ndarray] = None) -> PhaseSpaceField:
    """Evaluate f_N = μ + Σ_n (m_n − m̄_n)·𝓗_n on the phase-space grid

    m̄ defaults to the grid projection of μ.
    """
    if m_bar is None:
        m_bar = equilibrium_moments(mu, moments.N, grid)
    diff = moments.values - np.asarray(m_bar, dtype=float)[:, None]
    functions = hermite_function_table(moments.N, grid.v)
    values = mu(grid.v)[None, :] + diff.T @ functions
    return PhaseSpaceField(values, grid, moments.time)


def l2_bound_check(moments: MomentField, mu: Equilibrium, grid: Grid1D,
                   m_bar: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """(‖f_N − μ‖²_{L²(x,v)}, Σ_n‖m_n − m̄_n‖²_{L²(x)}); lhs ≤ rhs up to quadrature"""
    if m_bar is None:
        m_bar = equilibrium_moments(mu, moments.N, grid)
    diff = moments.values - np.asarray(m_bar, dtype=float)[:, None]
    functions = hermite_function_table(moments.N, grid.v)
    perturbation = diff.T @ functions
    weights = grid.velocity_quadrature().weights
    lhs = float(np.sum((perturbation * perturbation) @ weights)) * grid.dx
    rhs = float(np.sum(diff * diff)) * grid.dx
    return lhs, rhs
