#!/usr/bin/env python3
"""
Momentum gradient descent with Jacobs learning-rate adaptation

Per iteration i with gradient δ⁽ⁱ⁾:
    η_k ← η_k + κ        if δ̄_k⁽ⁱ⁻¹⁾·δ_k⁽ⁱ⁾ > 0
    η_k ← (1 − γ)·η_k    if δ̄_k⁽ⁱ⁻¹⁾·δ_k⁽ⁱ⁾ < 0
    w ← β·w + δ⁽ⁱ⁾,  α ← α − diag(η)·w
    δ̄⁽ⁱ⁾ = (1 − θ)·δ⁽ⁱ⁾ + θ·δ̄⁽ⁱ⁻¹⁾
"""

import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Protocol, Tuple

import numpy as np
from tqdm import tqdm

from .errors import ArgumentError, NumericError


# Stop reasons
CONVERGED = "converged"
MAX_ITER = "max_iter"
ABORTED = "aborted"


class Objective(Protocol):
    """Anything the optimizer can minimize"""
    size: int

    def value_and_gradient(self, vector: np.ndarray) -> Tuple[float, np.ndarray]:
        ...


@dataclass(frozen=True)
class Hyperparameters:
    eta0: float = 0.1
    beta: float = 0.9
    gamma: float = 0.3
    theta: float = 0.7
    kappa: Optional[float] = None
    max_iter: int = 1000
    grad_tol: float = 1e-3

    def __post_init__(self):
        if self.eta0 <= 0:
            raise ArgumentError(f"eta0 must be positive, got {self.eta0}")
        if not 0.0 <= self.beta < 1.0:
            raise ArgumentError(f"beta must lie in [0, 1), got {self.beta}")
        # γ < 1 keeps every learning rate positive
        if not 0.0 <= self.gamma < 1.0:
            raise ArgumentError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 <= self.theta <= 1.0:
            raise ArgumentError(f"theta must lie in [0, 1], got {self.theta}")
        if self.kappa is not None and self.kappa < 0:
            raise ArgumentError(f"kappa must be >= 0, got {self.kappa}")
        if self.max_iter < 1:
            raise ArgumentError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.grad_tol < 0:
            raise ArgumentError(f"grad_tol must be >= 0, got {self.grad_tol}")

    @property
    def increment(self) -> float:
        """κ, defaulting to η0/10"""
        return self.eta0 / 10.0 if self.kappa is None else self.kappa


@dataclass(frozen=True)
class OptimState:
    params: np.ndarray
    w: np.ndarray
    eta: np.ndarray
    delta_bar: np.ndarray
    iter: int
    hyper: Hyperparameters

    @classmethod
    def initial(cls, size: int, hyper: Hyperparameters,
                params: Optional[np.ndarray] = None) -> 'OptimState':
        """Zero momentum, uniform η0, zero smoothed gradient"""
        if params is None:
            params = np.zeros(size)
        params = np.array(params, dtype=float)
        if params.shape != (size,):
            raise ArgumentError(f"Initial parameters have shape {params.shape}, expected ({size},)")
        return cls(params, np.zeros(size), np.full(size, hyper.eta0), np.zeros(size), 0, hyper)


@dataclass(frozen=True)
class RunRecord:
    iter: int
    loss: float
    grad_inf_norm: float
    elapsed_s: float
    params: np.ndarray


@dataclass
class OptimResult:
    params: np.ndarray
    loss: float
    status: str
    records: List[RunRecord] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def iterations(self) -> int:
        return len(self.records)


def _check_gradient(grad, size: int) -> np.ndarray:
    grad = np.asarray(grad, dtype=float)
    if grad.shape != (size,):
        raise ArgumentError(f"Gradient has shape {grad.shape}, expected ({size},)")
    if not np.all(np.isfinite(grad)):
        raise NumericError("Non-finite gradient")
    return grad


def jacobs_update(state: OptimState, grad) -> Tuple[np.ndarray, np.ndarray]:
    """Per-parameter learning rates and smoothed gradient after one Jacobs step

    Returns:
        (eta, delta_bar)
    """
    grad = np.asarray(grad, dtype=float)
    hyper = state.hyper
    product = state.delta_bar * grad
    eta = np.where(product > 0, state.eta + hyper.increment,
                   np.where(product < 0, (1.0 - hyper.gamma) * state.eta, state.eta))
    delta_bar = (1.0 - hyper.theta) * grad + hyper.theta * state.delta_bar
    return eta, delta_bar


def momentum_update(state: OptimState, grad) -> OptimState:
    """Heavy-ball step with learning rates adapted from the current gradient

    Raises:
        NumericError: Non-finite gradient
    """
    grad = _check_gradient(grad, state.params.size)
    eta, delta_bar = jacobs_update(state, grad)
    w = state.hyper.beta * state.w + grad
    params = state.params - eta * w
    return replace(state, params=params, w=w, eta=eta, delta_bar=delta_bar, iter=state.iter + 1)


def finite_difference_gradient(func: Callable[[np.ndarray], float], vector, step: float) -> np.ndarray:
    """Central differences (f(x + h·e_k) − f(x − h·e_k)) / 2h for every k"""
    vector = np.asarray(vector, dtype=float)
    grad = np.empty_like(vector)
    for k in range(vector.size):
        offset = np.zeros_like(vector)
        offset[k] = step
        grad[k] = (func(vector + offset) - func(vector - offset)) / (2.0 * step)
    return grad


def optimize(objective: Objective, hyper: Optional[Hyperparameters] = None,
             initial: Optional[np.ndarray] = None, progress: bool = False) -> OptimResult:
    """Minimize ``objective`` until ‖∇L‖∞ < grad_tol or max_iter gradient evaluations

    Returns the best parameters seen. A solver blow-up stops the loop with
    status "aborted" and the best-so-far parameters.
    """
    hyper = hyper or Hyperparameters()
    state = OptimState.initial(objective.size, hyper, initial)
    result = OptimResult(state.params.copy(), float("inf"), MAX_ITER)
    start = time.perf_counter()

    bar = tqdm(range(hyper.max_iter), desc="Optimizing", disable=not progress)
    for i in bar:
        try:
            loss, grad = objective.value_and_gradient(state.params)
            grad = _check_gradient(grad, objective.size)
            if not np.isfinite(loss):
                raise NumericError("Non-finite loss")
        except NumericError as e:
            result.status = ABORTED
            result.error = f"Iteration {i}: {e}"
            break

        grad_norm = float(np.max(np.abs(grad))) if grad.size else 0.0
        result.records.append(RunRecord(i, float(loss), grad_norm,
                                        time.perf_counter() - start, state.params.copy()))
        bar.set_postfix(loss=f"{loss:.3e}", grad=f"{grad_norm:.3e}")
        if loss < result.loss:
            result.loss = float(loss)
            result.params = state.params.copy()

        if grad_norm < hyper.grad_tol:
            result.status = CONVERGED
            break
        if i + 1 < hyper.max_iter:
            state = momentum_update(state, grad)
    bar.close()
    return result
