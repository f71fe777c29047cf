#!/usr/bin/env python3
"""
Reference Vlasov–Poisson solver

    ∂_t f + v ∂_x f + (E + H) ∂_v f = 0,   ∂_x E = ∫ f dv − ρ_ion

Strang splitting on the phase-space grid: half x-advection per velocity row
(periodic, linear), Poisson solve on the mid-step density, full v-advection
per spatial column (linear, zero inflow), half x-advection.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from tqdm import tqdm

from .errors import ArgumentError, NumericError
from .field import (QUADRATURE_NEUTRALITY_TOL, ControlParams, FieldState, Grid1D, eval_control,
                    solve_poisson)
from .hermite import Equilibrium, project_moments
from .interp import periodic_shift, zero_inflow_shift
from .msolver import MomentField, time_steps
from .optim import finite_difference_gradient


DEFAULT_DT = 0.1


@dataclass(frozen=True)
class PhaseSpaceField:
    """Distribution samples f(x_j, v_l) of shape (nx, nv)"""
    values: np.ndarray
    grid: Grid1D
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.nx, self.grid.nv):
            raise ArgumentError(f"Phase-space field has shape {values.shape}, "
                                f"expected ({self.grid.nx}, {self.grid.nv})")
        object.__setattr__(self, "values", values)

    def density(self) -> np.ndarray:
        """ρ(x_j) = ∫ f dv with trapezoid weights"""
        return self.values @ self.grid.velocity_quadrature().weights

    def mass(self) -> float:
        """Σ_{j,l} f·Δx·Δv"""
        return float(self.values.sum() * self.grid.dx * self.grid.dv)

    def half_squared_distance(self, profile) -> float:
        """½ Σ_{j,l} (f − g)²·Δx·Δv for g(v) or g(x, v) broadcast onto the grid"""
        diff = self.values - np.asarray(profile, dtype=float)
        return 0.5 * float(np.sum(diff * diff)) * self.grid.dx * self.grid.dv


def perturbation_profile(shape: str, wavenumber: float, amplitude: float, x) -> np.ndarray:
    """1 + ε·cos(k·x) or 1 + ε·sin(k·x)"""
    x = np.asarray(x, dtype=float)
    if shape == "cos":
        return 1.0 + amplitude * np.cos(wavenumber * x)
    if shape == "sin":
        return 1.0 + amplitude * np.sin(wavenumber * x)
    raise ArgumentError(f"Unknown perturbation shape: {shape}")


def initial_phase_space(equilibrium: Equilibrium, grid: Grid1D, shape: str = "cos",
                        wavenumber: float = 0.2, amplitude: float = 1e-3) -> PhaseSpaceField:
    """f_0(x, v) = (1 + ε·shape(k·x))·μ(v) on the grid"""
    if amplitude < 0:
        raise ArgumentError(f"Perturbation amplitude must be >= 0, got {amplitude}")
    profile = perturbation_profile(shape, wavenumber, amplitude, grid.x)
    return PhaseSpaceField(np.outer(profile, equilibrium(grid.v)), grid, 0.0)


def moments_of(state: PhaseSpaceField, N: int) -> MomentField:
    """Hermite moments of f at every spatial node"""
    quad = state.grid.velocity_quadrature()
    return MomentField(project_moments(state.values, quad, N), state.time)


def field_of(state: PhaseSpaceField, rho_ion: float,
             neutrality_tol: float = QUADRATURE_NEUTRALITY_TOL) -> FieldState:
    """Self-consistent field of a phase-space state"""
    return solve_poisson(state.density(), rho_ion, state.grid, neutrality_tol=neutrality_tol)


def _advect_x(values: np.ndarray, grid: Grid1D, dt: float) -> np.ndarray:
    # Rows are velocities, shifted by v·dt along x
    shifted = periodic_shift(values.T, grid.v * dt / grid.dx)
    return shifted.T


def vp_step(state: PhaseSpaceField, H, dt: float, rho_ion: float = 1.0, step: Optional[int] = None,
            neutrality_tol: float = QUADRATURE_NEUTRALITY_TOL) -> PhaseSpaceField:
    """Advance f by dt with Strang splitting

    Raises:
        ArgumentError: dt <= 0
        NumericError: Non-finite values after the step
    """
    if dt <= 0:
        raise ArgumentError(f"Time step must be positive, got {dt}")
    grid = state.grid
    H = np.broadcast_to(np.asarray(H, dtype=float), (grid.nx,))

    f = _advect_x(state.values, grid, 0.5 * dt)
    rho = f @ grid.velocity_quadrature().weights
    E = solve_poisson(rho, rho_ion, grid, neutrality_tol=neutrality_tol).E
    f = zero_inflow_shift(f, (E + H) * dt / grid.dv)
    f = _advect_x(f, grid, 0.5 * dt)

    if not np.all(np.isfinite(f)):
        raise NumericError("Non-finite values in Vlasov solver", step=step)
    return PhaseSpaceField(f, grid, state.time + dt)


Observer = Callable[[PhaseSpaceField, FieldState], None]


def run_vp(initial: PhaseSpaceField, H: Union[ControlParams, np.ndarray], T: float,
           dt: float = DEFAULT_DT, rho_ion: float = 1.0, observer: Optional[Observer] = None,
           progress: bool = False) -> PhaseSpaceField:
    """Integrate the Vlasov–Poisson system over a horizon T

    ``observer(state, field)`` is called for the initial state and after
    every step; the last step is shortened to land on initial.time + T.
    """
    if T < 0:
        raise ArgumentError(f"Horizon must be non-negative, got {T}")
    grid = initial.grid
    if isinstance(H, ControlParams):
        H = eval_control(H, grid.x)
    H = np.broadcast_to(np.asarray(H, dtype=float), (grid.nx,))

    state = initial
    if observer is not None:
        observer(state, field_of(state, rho_ion))
    for index, step_dt in enumerate(tqdm(time_steps(T, dt), desc="Vlasov", disable=not progress)):
        state = vp_step(state, H, step_dt, rho_ion, step=index)
        if observer is not None:
            observer(state, field_of(state, rho_ion))
    return state


class KineticObjective:
    """J(T) = ½‖f(T) − μ‖² as a function of the control coefficients

    Gradients come from central differences of the full kinetic solve.
    """

    def __init__(self, initial: PhaseSpaceField, equilibrium: Equilibrium, T: float, K: int,
                 dt: float = DEFAULT_DT, rho_ion: float = 1.0, wavenumber: float = 0.2,
                 fd_step: float = 1e-5):
        if fd_step <= 0:
            raise ArgumentError(f"Finite-difference step must be positive, got {fd_step}")
        self.initial = initial
        self.equilibrium = equilibrium
        self.T = T
        self.K = K
        self.dt = dt
        self.rho_ion = rho_ion
        self.wavenumber = wavenumber
        self.fd_step = fd_step
        self._mu = equilibrium(initial.grid.v)

    @property
    def size(self) -> int:
        return 2 * self.K + 1

    def value(self, vector) -> float:
        params = ControlParams.from_vector(vector, self.K, self.wavenumber)
        final = run_vp(self.initial, params, self.T, self.dt, self.rho_ion)
        return final.half_squared_distance(self._mu)

    def value_and_gradient(self, vector):
        vector = np.asarray(vector, dtype=float)
        return self.value(vector), finite_difference_gradient(self.value, vector, self.fd_step)

