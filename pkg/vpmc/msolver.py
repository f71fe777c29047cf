#!/usr/bin/env python3
"""
Truncated Hermite moment system solver

Integrates
    ∂_t m + A ∂_x m + √(N+1) ∂_x m̄_{N+1} e_N = (E_N + H) D m,
    ∂_x E_N = ρ_N − ρ_ion,   ρ_N = (2π)^{1/4} m_0
with a Strang-split semi-Lagrangian scheme in the characteristic variables
w = Rᵀm of the symmetric tridiagonal convection matrix A = RΛRᵀ.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.fft
import scipy.linalg
from tqdm import tqdm

from .errors import ArgumentError, NumericError
from .field import QUADRATURE_NEUTRALITY_TOL, ControlParams, Grid1D, eval_control, solve_poisson
from .hermite import Equilibrium, project_moments
from .interp import periodic_shift
from .utils import thread_count


# ρ_N = (2π)^{1/4}·m_0
DENSITY_FACTOR = (2.0 * math.pi) ** 0.25


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class MomentSystem:
    """Convection/source matrices of the order-N moment system and the
    eigendecomposition A = R·diag(eigenvalues)·Rᵀ"""
    N: int
    A: np.ndarray
    D: np.ndarray
    R: np.ndarray
    eigenvalues: np.ndarray
    closure_gradient: Optional[np.ndarray] = None

    @property
    def R_inv(self) -> np.ndarray:
        # R is orthogonal
        return self.R.T

    @property
    def max_speed(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def size(self) -> int:
        return self.N + 1

    def with_closure(self, closure_gradient: Optional[np.ndarray]) -> 'MomentSystem':
        """Copy carrying the closure gradient ∂_x m̄_{N+1} on the spatial nodes

        None leaves the system unclosed and returns it unchanged.
        """
        if closure_gradient is None:
            return self
        return MomentSystem(self.N, self.A, self.D, self.R, self.eigenvalues,
                            _readonly(closure_gradient))


@lru_cache(maxsize=None)
def build_system(N: int) -> MomentSystem:
    """Assemble A_N, D_N and the sorted eigendecomposition of A_N (cached per N)

    Eigenvectors use a fixed sign convention: first nonzero entry positive.

    Raises:
        ArgumentError: N < 1
        NumericError: Eigensolver failure
    """
    if N < 1:
        raise ArgumentError(f"Moment order must be >= 1, got {N}")
    off = np.sqrt(np.arange(1, N + 1, dtype=float))
    A = np.diag(off, 1) + np.diag(off, -1)
    D = np.diag(off, -1)
    try:
        eigenvalues, R = scipy.linalg.eigh_tridiagonal(np.zeros(N + 1), off)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NumericError(f"Eigendecomposition of A_{N} failed: {e}") from e

    order = np.argsort(eigenvalues)
    eigenvalues = eigenvalues[order]
    R = R[:, order]
    for k in range(N + 1):
        column = R[:, k]
        pivot = np.flatnonzero(np.abs(column) > 1e-14)[0]
        if column[pivot] < 0:
            R[:, k] = -column
    return MomentSystem(N, _readonly(A), _readonly(D), _readonly(R), _readonly(eigenvalues))


@dataclass(frozen=True)
class MomentField:
    """Moments m_n(x_j) of shape (N+1, nx) at a given time"""
    values: np.ndarray
    time: float = 0.0

    @property
    def N(self) -> int:
        return self.values.shape[0] - 1

    def density(self) -> np.ndarray:
        """ρ_N = (2π)^{1/4}·m_0"""
        return DENSITY_FACTOR * self.values[0]


@dataclass(frozen=True)
class StepRecord:
    """Half-step data kept for the backward pass"""
    m_half: np.ndarray
    E_half: np.ndarray
    dt: float


@dataclass(frozen=True)
class Trajectory:
    """Forward trajectory: states at every step level and half-step history"""
    states: Tuple[MomentField, ...]
    steps: Tuple[StepRecord, ...]
    H: np.ndarray
    grid: Grid1D
    rho_ion: float

    @property
    def final(self) -> MomentField:
        return self.states[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([state.time for state in self.states])

    def __len__(self) -> int:
        return len(self.states)


def equilibrium_moments(equilibrium: Equilibrium, N: int, grid: Grid1D) -> np.ndarray:
    """m̄_0..m̄_N of μ by the solver's velocity quadrature"""
    quad = grid.velocity_quadrature()
    return project_moments(equilibrium(quad.nodes), quad, N)


def closure_gradient(m_next, grid: Grid1D, tol: float = 1e-14) -> Optional[np.ndarray]:
    """Spectral ∂_x of the closure moment m̄_{N+1}(x) on the spatial nodes

    Args:
        m_next: m̄_{N+1} as a scalar or per-node profile
        tol: Gradients below tol·max(1, max|m̄_{N+1}|) count as zero

    Returns:
        The gradient, or None when it vanishes (homogeneous equilibria)
    """
    profile = np.broadcast_to(np.asarray(m_next, dtype=float), (grid.nx,))
    workers = thread_count()
    k = 2.0 * math.pi * scipy.fft.rfftfreq(grid.nx, d=grid.dx)
    profile_hat = scipy.fft.rfft(profile, workers=workers)
    gradient_hat = 1j * k * profile_hat
    if grid.nx % 2 == 0:
        gradient_hat[-1] = 0.0
    gradient = scipy.fft.irfft(gradient_hat, n=grid.nx, workers=workers)
    scale = max(1.0, float(np.max(np.abs(profile))))
    if float(np.max(np.abs(gradient))) <= tol * scale:
        return None
    return gradient


def closed_system(equilibrium: Equilibrium, N: int, grid: Grid1D) -> MomentSystem:
    """Order-N system carrying the closure term of m̄_{N+1}"""
    m_next = equilibrium_moments(equilibrium, N + 1, grid)[-1]
    return build_system(N).with_closure(closure_gradient(m_next, grid))


def project_initial(f0, N: int, grid: Grid1D) -> MomentField:
    """Project initial data onto moments m_n(x_j, 0) = ∫ f_0(x_j, v) H̃e_n(v) dv

    Args:
        f0: Phase-space field, array of shape (nx, nv) on the grid nodes, or a
            callable f0(x, v) evaluated on the meshgrid (indexing="ij")
    """
    if hasattr(f0, "values"):
        f0 = f0.values
    elif callable(f0):
        X, V = np.meshgrid(grid.x, grid.v, indexing="ij")
        f0 = f0(X, V)
    f0 = np.asarray(f0, dtype=float)
    if f0.shape != (grid.nx, grid.nv):
        raise ArgumentError(f"Initial data has shape {f0.shape}, expected ({grid.nx}, {grid.nv})")
    return MomentField(project_moments(f0, grid.velocity_quadrature(), N), 0.0)


def advect_characteristics(values: np.ndarray, sys: MomentSystem, dt: float, grid: Grid1D) -> np.ndarray:
    """Exact characteristic shift w_k(x_j − dt·λ_k) with periodic linear interpolation"""
    w = sys.R_inv @ values
    w = periodic_shift(w, sys.eigenvalues * dt / grid.dx)
    return sys.R @ w


def strang_step(state: MomentField, sys: MomentSystem, H, dt: float, grid: Grid1D,
                rho_ion: float = 1.0, step: Optional[int] = None,
                neutrality_tol: float = QUADRATURE_NEUTRALITY_TOL) -> Tuple[MomentField, StepRecord]:
    """Advance the moment system by dt: half advection, full source, half advection

    Returns:
        (new state, half-step record with m^{n+½} and E_N^{n+½})

    Raises:
        NumericError: Non-finite state
    """
    if dt <= 0:
        raise ArgumentError(f"Time step must be positive, got {dt}")
    H = np.broadcast_to(np.asarray(H, dtype=float), (grid.nx,))

    m_half = advect_characteristics(state.values, sys, 0.5 * dt, grid)
    E_half = solve_poisson(DENSITY_FACTOR * m_half[0], rho_ion, grid,
                           neutrality_tol=neutrality_tol).E
    m_star = m_half + dt * (E_half + H) * (sys.D @ m_half)
    if sys.closure_gradient is not None:
        m_star[-1] -= dt * math.sqrt(sys.N + 1) * sys.closure_gradient
    m_new = advect_characteristics(m_star, sys, 0.5 * dt, grid)

    if not np.all(np.isfinite(m_new)):
        raise NumericError("Non-finite moments in moment solver", step=step)
    return MomentField(m_new, state.time + dt), StepRecord(m_half, E_half, dt)


def time_steps(T: float, dt: float) -> List[float]:
    """Uniform steps of size dt with the last one shortened to land on T"""
    if T <= 0:
        return []
    count = max(int(math.ceil(T / dt - 1e-9)), 1)
    steps = [dt] * (count - 1)
    steps.append(T - dt * (count - 1))
    return steps


def cfl_time_step(sys: MomentSystem, grid: Grid1D, cfl: float) -> float:
    """Δt such that max_k|λ_k|·Δt/Δx = cfl"""
    if cfl <= 0:
        raise ArgumentError(f"CFL number must be positive, got {cfl}")
    return cfl * grid.dx / sys.max_speed


def integrate(initial: MomentField, sys: MomentSystem, H: Union[ControlParams, np.ndarray],
              T: float, grid: Grid1D, cfl: float = 3.0, rho_ion: float = 1.0,
              progress: bool = False) -> Trajectory:
    """Integrate from initial.time over a horizon T and keep the full history

    Raises:
        ArgumentError: T < 0 or cfl <= 0
        NumericError: Propagated from strang_step
    """
    if T < 0:
        raise ArgumentError(f"Horizon must be non-negative, got {T}")
    if isinstance(H, ControlParams):
        H = eval_control(H, grid.x)
    H = np.broadcast_to(np.asarray(H, dtype=float), (grid.nx,)).copy()

    dt = cfl_time_step(sys, grid, cfl)
    states = [initial]
    records = []
    state = initial
    for index, step_dt in enumerate(tqdm(time_steps(T, dt), desc="Moments", disable=not progress)):
        state, record = strang_step(state, sys, H, step_dt, grid, rho_ion, step=index)
        states.append(state)
        records.append(record)
    return Trajectory(tuple(states), tuple(records), H, grid, float(rho_ion))
