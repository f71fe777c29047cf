#!/usr/bin/env python3
"""
Electrostatic field solve and external control field

Grid definition, the periodic Poisson solve ∂_x E = ρ − ρ_ion (zero-mean gauge,
equivalent to φ(0) = φ(L) = 0) and the static control field
    H(x) = Σ_{k=1}^K α_k sin(k·κ₀·x) + Σ_{k=0}^K β_k cos(k·κ₀·x)
with base wavenumber κ₀ = 1/5 on [0, 10π].
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft
from scipy.integrate import cumulative_trapezoid

from .errors import ArgumentError, ModelError
from .hermite import VelocityQuadrature
from .utils import thread_count


# Relative neutrality tolerance |mean(ρ − ρ_ion)| ≤ tol·max|ρ|
NEUTRALITY_TOL = 1e-8

# Densities integrated over a truncated velocity range miss the tail mass
# beyond v_min/v_max (about 1e-8 for the two-stream beams, more once the
# kinetic solver lets particles out through the velocity boundary)
QUADRATURE_NEUTRALITY_TOL = 1e-5


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic spatial grid with an optional uniform velocity grid"""
    length: float = 10.0 * math.pi
    nx: int = 100
    v_min: float = -8.0
    v_max: float = 8.0
    nv: int = 200

    def __post_init__(self):
        if self.nx < 4:
            raise ArgumentError(f"Grid needs at least 4 cells, got nx={self.nx}")
        if self.length <= 0:
            raise ArgumentError(f"Domain length must be positive, got {self.length}")
        if self.nv < 2 or self.v_max <= self.v_min:
            raise ArgumentError(f"Invalid velocity grid [{self.v_min}, {self.v_max}] with nv={self.nv}")

    @property
    def dx(self) -> float:
        return self.length / self.nx

    @property
    def x(self) -> np.ndarray:
        """Node positions x_j = j·Δx, j = 0..nx−1"""
        return np.arange(self.nx) * self.dx

    @property
    def dv(self) -> float:
        return (self.v_max - self.v_min) / (self.nv - 1)

    @property
    def v(self) -> np.ndarray:
        """Velocity nodes including both ends"""
        return np.linspace(self.v_min, self.v_max, self.nv)

    def velocity_quadrature(self) -> VelocityQuadrature:
        """Trapezoid quadrature on the velocity nodes"""
        return VelocityQuadrature.trapezoid(self.v_min, self.v_max, self.nv)


@dataclass(frozen=True)
class FieldState:
    """Result of a Poisson solve"""
    E: np.ndarray
    phi: np.ndarray
    rho: np.ndarray
    rho_ion: float


def _check_neutrality(fluctuation: np.ndarray, rho: np.ndarray, tol: float) -> None:
    scale = max(float(np.max(np.abs(rho))), 1.0e-300)
    mean = float(np.mean(fluctuation))
    if abs(mean) > tol * scale:
        raise ModelError(f"Charge neutrality violated: mean(rho - rho_ion) = {mean:.3e} "
                         f"exceeds {tol:.1e} * max|rho|")


def solve_poisson(rho, rho_ion: float, grid: Grid1D, method: str = "spectral",
                  neutrality_tol: float = NEUTRALITY_TOL) -> FieldState:
    """Solve ∂_x E = ρ − ρ_ion with ∫E dx = 0 and φ(0) = φ(L) = 0

    Args:
        rho: Density samples on the spatial nodes
        rho_ion: Constant ion background density
        grid: Spatial grid
        method: "spectral" (discrete Fourier integration) or "trapezoid"
            (cumulative trapezoid, second order)
        neutrality_tol: Relative tolerance on the mean of ρ − ρ_ion

    Raises:
        ModelError: Mean of ρ − ρ_ion beyond tolerance
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (grid.nx,):
        raise ArgumentError(f"Density has shape {rho.shape}, expected ({grid.nx},)")
    fluctuation = rho - rho_ion
    _check_neutrality(fluctuation, rho, neutrality_tol)
    fluctuation = fluctuation - fluctuation.mean()

    if method == "spectral":
        workers = thread_count()
        k = 2.0 * math.pi * scipy.fft.rfftfreq(grid.nx, d=grid.dx)
        source_hat = scipy.fft.rfft(fluctuation, workers=workers)
        E_hat = np.zeros_like(source_hat)
        phi_hat = np.zeros_like(source_hat)
        modes = slice(1, None)
        E_hat[modes] = source_hat[modes] / (1j * k[modes])
        # −∂²φ = ρ − ρ_ion
        phi_hat[modes] = source_hat[modes] / (k[modes] ** 2)
        if grid.nx % 2 == 0:
            # Nyquist mode has no real antiderivative
            E_hat[-1] = 0.0
            phi_hat[-1] = 0.0
        E = scipy.fft.irfft(E_hat, n=grid.nx, workers=workers)
        phi = scipy.fft.irfft(phi_hat, n=grid.nx, workers=workers)
    elif method == "trapezoid":
        closed = np.append(fluctuation, fluctuation[0])
        E = cumulative_trapezoid(closed, dx=grid.dx, initial=0.0)[:-1]
        E = E - E.mean()
        # E = −∂_x φ
        phi = -cumulative_trapezoid(np.append(E, E[0]), dx=grid.dx, initial=0.0)[:-1]
    else:
        raise ArgumentError(f"Unknown Poisson method: {method}")

    phi = phi - phi[0]
    return FieldState(E=E, phi=phi, rho=rho, rho_ion=float(rho_ion))


@dataclass(frozen=True)
class ControlParams:
    """Coefficients of the static control field

    alpha holds α_1..α_K (sine), beta holds β_0..β_K (cosine).
    """
    alpha: np.ndarray
    beta: np.ndarray
    wavenumber: float = 0.2

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if alpha.ndim != 1 or beta.shape != (alpha.size + 1,):
            raise ArgumentError(f"Expected K sine and K+1 cosine coefficients, "
                                f"got {alpha.shape} and {beta.shape}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def K(self) -> int:
        return self.alpha.size

    @property
    def size(self) -> int:
        return 2 * self.K + 1

    @classmethod
    def zeros(cls, K: int, wavenumber: float = 0.2) -> 'ControlParams':
        if K < 0:
            raise ArgumentError(f"Number of modes must be >= 0, got {K}")
        return cls(np.zeros(K), np.zeros(K + 1), wavenumber)

    @classmethod
    def from_vector(cls, vector, K: int, wavenumber: float = 0.2) -> 'ControlParams':
        """Build from the flat (α_1..α_K, β_0..β_K) vector"""
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (2 * K + 1,):
            raise ArgumentError(f"Expected {2 * K + 1} parameters, got {vector.shape}")
        return cls(vector[:K].copy(), vector[K:].copy(), wavenumber)

    def as_vector(self) -> np.ndarray:
        """Flat parameter vector, sines first"""
        return np.concatenate([self.alpha, self.beta])

    def labels(self):
        """(k, parity) for each entry of as_vector()"""
        return [(k, "sin") for k in range(1, self.K + 1)] + [(k, "cos") for k in range(self.K + 1)]


def basis_function(k: int, parity: str, x, K: Optional[int] = None, wavenumber: float = 0.2) -> np.ndarray:
    """Single control basis column sin(k·κ₀·x) or cos(k·κ₀·x)

    Raises:
        ArgumentError: Unknown parity or mode index out of range
    """
    x = np.asarray(x, dtype=float)
    if parity == "sin":
        if k < 1 or (K is not None and k > K):
            raise ArgumentError(f"Sine mode index {k} out of range")
        return np.sin(k * wavenumber * x)
    if parity == "cos":
        if k < 0 or (K is not None and k > K):
            raise ArgumentError(f"Cosine mode index {k} out of range")
        return np.cos(k * wavenumber * x)
    raise ArgumentError(f"Unknown parity: {parity}")


def basis_matrix(params: ControlParams, x) -> np.ndarray:
    """All basis columns stacked in parameter order, shape (2K+1, len(x))"""
    return np.array([basis_function(k, parity, x, params.K, params.wavenumber)
                     for k, parity in params.labels()]).reshape(params.size, -1)


def eval_control(params: ControlParams, x) -> np.ndarray:
    """H(x_j) = Σ α_k sin(k·κ₀·x_j) + Σ β_k cos(k·κ₀·x_j)"""
    x = np.asarray(x, dtype=float)
    return params.as_vector() @ basis_matrix(params, x)
