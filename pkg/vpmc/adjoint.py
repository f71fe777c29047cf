#!/usr/bin/env python3
"""
Continuous adjoint of the moment system and the control gradient

The multiplier λ solves, backward from λ(T) = −(m(T) − m̄),
    ∂_t λ + A ∂_x λ = −(E_N + H) Dᵀ λ
with the forward field E_N + H frozen. The loss gradient is
    ∂L/∂α_k ≈ −∫∫ λᵀ ψ_k D m dx dt
where ψ_k is the k-th control basis function; the ∂_α E_N contribution is
neglected.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from .diag import moment_misfit
from .errors import ArgumentError, NumericError, SequencingError
from .field import ControlParams, Grid1D, basis_matrix
from .msolver import MomentField, MomentSystem, Trajectory, advect_characteristics, integrate
from .optim import finite_difference_gradient


TIME_RULES = ("trapezoid", "midpoint")
GRADIENT_MODES = ("adjoint", "exact")


@dataclass(frozen=True)
class AdjointField:
    """Multipliers λ_n(x_j) of shape (N+1, nx)"""
    values: np.ndarray
    time: float


@dataclass(frozen=True)
class AdjointTrajectory:
    """Backward solution on the forward step levels

    ``states[n]`` pairs with forward ``states[n]``; ``halves[n]`` is λ advected
    back to the half level of step n, before the source update.
    """
    states: Tuple[AdjointField, ...]
    halves: Tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class GradientVector:
    d_alpha: np.ndarray
    d_beta: np.ndarray

    def __post_init__(self):
        d_alpha = np.asarray(self.d_alpha, dtype=float)
        d_beta = np.asarray(self.d_beta, dtype=float)
        if d_beta.shape != (d_alpha.size + 1,):
            raise ArgumentError(f"Expected K sine and K+1 cosine entries, got {d_alpha.shape} and {d_beta.shape}")
        object.__setattr__(self, "d_alpha", d_alpha)
        object.__setattr__(self, "d_beta", d_beta)

    @classmethod
    def from_vector(cls, vector, K: int) -> 'GradientVector':
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (2 * K + 1,):
            raise ArgumentError(f"Expected {2 * K + 1} gradient entries, got {vector.shape}")
        return cls(vector[:K].copy(), vector[K:].copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.d_alpha, self.d_beta])

    def inf_norm(self) -> float:
        vector = self.as_vector()
        return float(np.max(np.abs(vector))) if vector.size else 0.0


def loss(final: MomentField, m_bar, dx: float) -> float:
    """L = ½ Σ_n Σ_j (m_n(x_j, T) − m̄_n)²·Δx"""
    return moment_misfit(final, m_bar, dx)


def terminal_condition(final: MomentField, m_bar) -> AdjointField:
    """λ(x, T) = −(m(x, T) − m̄)"""
    m_bar = np.asarray(m_bar, dtype=float)
    return AdjointField(-(final.values - m_bar[:, None]), final.time)


def adjoint_step(state: AdjointField, sys: MomentSystem, E_plus_H, dt: float, grid: Grid1D,
                 step: Optional[int] = None) -> Tuple[AdjointField, np.ndarray]:
    """One backward step from t to t − dt

    Reverses the forward Strang step: transposed half advection, source
    λ ← λ + Δt·(E_N + H)·Dᵀλ with the frozen half-step field, transposed half
    advection. The transpose of the linear shift by s cells is the shift by −s.

    Returns:
        (λ at t − dt, λ at the half level before the source update)
    """
    if dt <= 0:
        raise ArgumentError(f"Time step must be positive, got {dt}")
    E_plus_H = np.broadcast_to(np.asarray(E_plus_H, dtype=float), (grid.nx,))
    half = advect_characteristics(state.values, sys, -0.5 * dt, grid)
    sourced = half + dt * E_plus_H * (sys.D.T @ half)
    values = advect_characteristics(sourced, sys, -0.5 * dt, grid)
    if not np.all(np.isfinite(values)):
        raise NumericError("Non-finite multipliers in adjoint solver", step=step)
    return AdjointField(values, state.time - dt), half


def integrate_adjoint(forward: Trajectory, sys: MomentSystem, m_bar,
                      progress: bool = False) -> AdjointTrajectory:
    """Integrate the adjoint system backward along a stored forward trajectory

    Raises:
        SequencingError: Forward history incomplete
    """
    if len(forward.steps) != len(forward.states) - 1:
        raise SequencingError(f"Forward history has {len(forward.steps)} half steps "
                              f"for {len(forward.states)} step levels")
    count = len(forward.steps)
    states = [None] * (count + 1)
    halves = [None] * count
    state = terminal_condition(forward.final, m_bar)
    states[count] = state
    for n in tqdm(range(count - 1, -1, -1), desc="Adjoint", disable=not progress):
        record = forward.steps[n]
        state, halves[n] = adjoint_step(state, sys, record.E_half + forward.H, record.dt,
                                        forward.grid, step=n)
        # Level times follow the forward trajectory
        state = AdjointField(state.values, forward.states[n].time)
        states[n] = state
    return AdjointTrajectory(tuple(states), tuple(halves))


def assemble_gradient(forward: Trajectory, backward: AdjointTrajectory, sys: MomentSystem,
                      params: ControlParams, time_rule: str = "trapezoid") -> GradientVector:
    """−∫∫ λᵀ ψ_k D m dx dt for every control basis function ψ_k

    time_rule "trapezoid" averages the integrand over consecutive step levels;
    "midpoint" pairs the stored m^{n+½} with the half-level multipliers.

    Raises:
        SequencingError: Trajectories do not share time levels
    """
    if time_rule not in TIME_RULES:
        raise ArgumentError(f"Unknown time rule: {time_rule}")
    if len(backward.states) != len(forward.states) or len(backward.halves) != len(forward.steps):
        raise SequencingError(f"Adjoint has {len(backward.states)} levels, "
                              f"forward has {len(forward.states)}")
    grid = forward.grid
    basis = basis_matrix(params, grid.x)

    def density(lam: np.ndarray, m: np.ndarray) -> np.ndarray:
        # Σ_n λ_n (D m)_n at every node
        return np.sum(lam * (sys.D @ m), axis=0)

    total = np.zeros(grid.nx)
    if time_rule == "trapezoid":
        previous = density(backward.states[0].values, forward.states[0].values)
        for n, record in enumerate(forward.steps):
            current = density(backward.states[n + 1].values, forward.states[n + 1].values)
            total += 0.5 * record.dt * (previous + current)
            previous = current
    else:
        for n, record in enumerate(forward.steps):
            total += record.dt * density(backward.halves[n], record.m_half)

    gradient = -(basis @ total) * grid.dx
    return GradientVector.from_vector(gradient, params.K)


class MomentObjective:
    """Moment loss L(α) and its gradient for the optimizer

    gradient "adjoint" uses the backward solve, "exact" central differences of
    the whole forward solve with step fd_step.
    """

    def __init__(self, initial: MomentField, sys: MomentSystem, m_bar, grid: Grid1D, T: float, K: int,
                 cfl: float = 3.0, rho_ion: float = 1.0, wavenumber: float = 0.2,
                 gradient: str = "adjoint", fd_step: float = 1e-5, time_rule: str = "trapezoid"):
        if gradient not in GRADIENT_MODES:
            raise ArgumentError(f"Unknown gradient mode: {gradient}")
        if time_rule not in TIME_RULES:
            raise ArgumentError(f"Unknown time rule: {time_rule}")
        if fd_step <= 0:
            raise ArgumentError(f"Finite-difference step must be positive, got {fd_step}")
        self.initial = initial
        self.sys = sys
        self.m_bar = np.asarray(m_bar, dtype=float)
        self.grid = grid
        self.T = T
        self.K = K
        self.cfl = cfl
        self.rho_ion = rho_ion
        self.wavenumber = wavenumber
        self.gradient = gradient
        self.fd_step = fd_step
        self.time_rule = time_rule

    @property
    def size(self) -> int:
        return 2 * self.K + 1

    def params(self, vector) -> ControlParams:
        return ControlParams.from_vector(vector, self.K, self.wavenumber)

    def forward(self, vector) -> Trajectory:
        return integrate(self.initial, self.sys, self.params(vector), self.T, self.grid,
                         self.cfl, self.rho_ion)

    def value(self, vector) -> float:
        return loss(self.forward(vector).final, self.m_bar, self.grid.dx)

    def value_and_gradient(self, vector):
        vector = np.asarray(vector, dtype=float)
        if self.gradient == "exact":
            return self.value(vector), finite_difference_gradient(self.value, vector, self.fd_step)
        trajectory = self.forward(vector)
        backward = integrate_adjoint(trajectory, self.sys, self.m_bar)
        grad = assemble_gradient(trajectory, backward, self.sys, self.params(vector), self.time_rule)
        return loss(trajectory.final, self.m_bar, self.grid.dx), grad.as_vector()
