#!/usr/bin/env python3
"""
Hermite polynomials and moment transforms

Normalized probabilists' Hermite polynomials H̃e_n, the Hermite functions
𝓗_n(v) = H̃e_n(v) e^{-v²/2}, equilibrium distributions, velocity quadratures
and the forward/inverse transforms between velocity profiles and moments.

Orthonormality holds for H̃e_n under the weight e^{-v²/2}:
    ∫ H̃e_m(v) H̃e_n(v) e^{-v²/2} dv = δ_mn
so a profile f(v) = Σ m_n 𝓗_n(v) has moments m_n = ∫ f(v) H̃e_n(v) dv.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import hermite_e

from .errors import ArgumentError


SQRT_2PI = math.sqrt(2.0 * math.pi)

# H̃e_0 = (2π)^{-1/4}
HTILDE_0 = (2.0 * math.pi) ** -0.25

# Orders of margin required between the largest tail order and the projection order
TAIL_MARGIN = 10


def htilde_table(max_order: int, v) -> np.ndarray:
    """Evaluate H̃e_0..H̃e_max_order at v by forward three-term recursion

    Returns:
        Array of shape (max_order + 1,) + shape(v)
    """
    if max_order < 0:
        raise ArgumentError(f"max_order must be >= 0, got {max_order}")
    v = np.asarray(v, dtype=float)
    table = np.empty((max_order + 1,) + v.shape)
    table[0] = HTILDE_0
    if max_order >= 1:
        table[1] = v * HTILDE_0
    for n in range(1, max_order):
        # √(n+1) H̃e_{n+1} = v H̃e_n − √n H̃e_{n−1}
        table[n + 1] = (v * table[n] - math.sqrt(n) * table[n - 1]) / math.sqrt(n + 1)
    return table


def hermite_function_table(max_order: int, v) -> np.ndarray:
    """Evaluate 𝓗_0..𝓗_max_order at v"""
    v = np.asarray(v, dtype=float)
    return htilde_table(max_order, v) * np.exp(-0.5 * v * v)


@dataclass(frozen=True)
class HermiteBasis:
    """Normalized Hermite basis up to order max_order (evaluable to max_order + 1)"""
    max_order: int

    def __post_init__(self):
        if self.max_order < 0:
            raise ArgumentError(f"max_order must be >= 0, got {self.max_order}")

    @property
    def normalization(self) -> np.ndarray:
        """Normalization constants c_n = n!·√(2π) for n = 0..max_order+1"""
        return np.array([math.factorial(n) * SQRT_2PI for n in range(self.max_order + 2)])

    def _check_order(self, order: int) -> None:
        if not 0 <= order <= self.max_order + 1:
            raise ArgumentError(f"Hermite order {order} outside 0..{self.max_order + 1}")

    def table(self, v, order: Optional[int] = None) -> np.ndarray:
        """H̃e_0..H̃e_order at v (order defaults to max_order)"""
        order = self.max_order if order is None else order
        self._check_order(order)
        return htilde_table(order, v)


def eval_htilde(basis: HermiteBasis, order: int, v):
    """Evaluate H̃e_order(v) by the stable three-term recursion

    Raises:
        ArgumentError: order outside 0..max_order+1
    """
    basis._check_order(order)
    return htilde_table(order, v)[order]


def htilde_derivative(basis: HermiteBasis, order: int, v):
    """Derivative H̃e_n'(v) = √n·H̃e_{n−1}(v)"""
    basis._check_order(order)
    if order == 0:
        return np.zeros_like(np.asarray(v, dtype=float))
    return math.sqrt(order) * htilde_table(order - 1, v)[order - 1]


def hermite_function(basis: HermiteBasis, order: int, v):
    """Hermite function 𝓗_n(v) = H̃e_n(v)·e^{−v²/2}"""
    v = np.asarray(v, dtype=float)
    return eval_htilde(basis, order, v) * np.exp(-0.5 * v * v)


@dataclass(frozen=True)
class Equilibrium:
    """Spatially homogeneous equilibrium μ(v) as a mixture of Gaussians

    Each component is (weight, mean, variance).
    """
    kind: str
    components: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        if not self.components:
            raise ArgumentError("Equilibrium needs at least one component")
        for weight, _, variance in self.components:
            if weight < 0 or variance <= 0:
                raise ArgumentError(f"Invalid component weight={weight}, variance={variance}")

    @classmethod
    def maxwellian(cls, mean: float = 0.0, variance: float = 1.0) -> 'Equilibrium':
        return cls("maxwellian", ((1.0, mean, variance),))

    @classmethod
    def two_stream(cls, v_bar: float = 2.4) -> 'Equilibrium':
        """Two counter-propagating unit-variance beams at ±v̄ with weights ½"""
        return cls("two_stream", ((0.5, v_bar, 1.0), (0.5, -v_bar, 1.0)))

    @classmethod
    def bump_on_tail(cls, omega1: float = 0.8, omega2: float = 0.2,
                     u: float = 3.5, v_t: float = 0.5) -> 'Equilibrium':
        """Maxwellian bulk plus a bump at u; v_t is the bump variance"""
        return cls("bump_on_tail", ((omega1, 0.0, 1.0), (omega2, u, v_t)))

    @property
    def total_weight(self) -> float:
        return sum(weight for weight, _, _ in self.components)

    def __call__(self, v) -> np.ndarray:
        """Evaluate μ(v)"""
        v = np.asarray(v, dtype=float)
        total = np.zeros_like(v)
        for weight, mean, variance in self.components:
            total = total + weight / math.sqrt(2.0 * math.pi * variance) * np.exp(-0.5 * (v - mean) ** 2 / variance)
        return total

    def exact_moments(self, max_order: int) -> np.ndarray:
        """Closed-form moments m̄_0..m̄_max_order of the full-line μ

        For a Gaussian with mean u and variance s, q_n = E[He_n(X)]/√(n!) obeys
        √(n+1)·q_{n+1} = u·q_n − √n·(1 − s)·q_{n−1}.
        """
        moments = np.zeros(max_order + 1)
        for weight, mean, variance in self.components:
            q = np.empty(max_order + 1)
            q[0] = 1.0
            if max_order >= 1:
                q[1] = mean
            for n in range(1, max_order):
                q[n + 1] = (mean * q[n] - math.sqrt(n) * (1.0 - variance) * q[n - 1]) / math.sqrt(n + 1)
            moments += weight * HTILDE_0 * q
        return moments


@dataclass(frozen=True)
class VelocityQuadrature:
    """Quadrature rule for ∫ g(v) dv: Σ_l weights[l]·g(nodes[l])"""
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str = field(default="trapezoid")

    def __post_init__(self):
        if len(self.nodes) < 2 or len(self.nodes) != len(self.weights):
            raise ArgumentError("Quadrature needs at least 2 nodes with one weight each")
        if np.any(self.weights <= 0):
            raise ArgumentError("Quadrature weights must be strictly positive")

    @classmethod
    def trapezoid(cls, v_min: float, v_max: float, count: int) -> 'VelocityQuadrature':
        """Uniform trapezoid rule on [v_min, v_max] including both ends"""
        if count < 2 or v_max <= v_min:
            raise ArgumentError(f"Invalid velocity range [{v_min}, {v_max}] with {count} nodes")
        nodes = np.linspace(v_min, v_max, count)
        weights = np.full(count, (v_max - v_min) / (count - 1))
        weights[0] *= 0.5
        weights[-1] *= 0.5
        return cls(nodes, weights, "trapezoid")

    @classmethod
    def gauss_hermite(cls, count: int) -> 'VelocityQuadrature':
        """Gauss–Hermite rule for weight e^{-v²/2}, rescaled to plain dv weights"""
        if count < 2:
            raise ArgumentError(f"Gauss-Hermite needs at least 2 nodes, got {count}")
        nodes, weights = hermite_e.hermegauss(count)
        return cls(nodes, weights * np.exp(0.5 * nodes * nodes), "gauss-hermite")

    def __len__(self) -> int:
        return len(self.nodes)


def project_moments(profile, quad: VelocityQuadrature, N: int) -> np.ndarray:
    """Hermite moments m_n = Σ_l w_l·profile(v_l)·H̃e_n(v_l), n = 0..N

    The last axis of ``profile`` runs over the quadrature nodes; the result has
    shape (N + 1,) + profile.shape[:-1].

    Raises:
        ArgumentError: profile length does not match the nodes
    """
    profile = np.asarray(profile, dtype=float)
    if profile.shape[-1] != len(quad):
        raise ArgumentError(f"Profile has {profile.shape[-1]} samples, quadrature has {len(quad)} nodes")
    weighted = htilde_table(N, quad.nodes) * quad.weights
    return np.tensordot(weighted, profile, axes=([1], [-1]))


def reconstruct_profile(coeffs, nodes) -> np.ndarray:
    """Evaluate Σ_n m_n·𝓗_n(v) at the nodes

    ``coeffs`` has shape (N + 1,) or (N + 1, ...); the node axis is appended last.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    functions = hermite_function_table(coeffs.shape[0] - 1, nodes)
    return np.tensordot(coeffs, functions, axes=([0], [0]))


@dataclass(frozen=True)
class TailDecayResult:
    """Hermite tail sums Σ_{l>N} |ĝ_l|² for a list of truncation orders"""
    orders: Tuple[int, ...]
    tails: np.ndarray
    slope: float
    reference_norm: float
    k: int

    @property
    def decays_at_rate(self) -> bool:
        """Fitted log-log slope is at least as steep as −k"""
        return self.slope <= -self.k


def apply_ladder_operator(profile, nodes, times: int = 1) -> np.ndarray:
    """Apply 𝒜g = ∂_v g + v·g ``times`` times with second-order differences"""
    g = np.asarray(profile, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    for _ in range(times):
        g = np.gradient(g, nodes, edge_order=2) + nodes * g
    return g


def tail_decay_check(profile, k: int, N_list: Sequence[int], quad: VelocityQuadrature,
                     projection_order: int = 80) -> TailDecayResult:
    """Verify the spectral decay Σ_{l>N}|ĝ_l|² ≲ N^{-k}·‖𝒜^k g‖² numerically

    Raises:
        ArgumentError: k < 1, empty order list, or orders too close to projection_order
    """
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    orders = tuple(int(n) for n in N_list)
    if not orders or min(orders) < 1:
        raise ArgumentError("N_list must contain positive orders")
    if max(orders) + TAIL_MARGIN > projection_order:
        raise ArgumentError(f"Projection order {projection_order} too low for N = {max(orders)} "
                            f"(needs at least {max(orders) + TAIL_MARGIN})")

    coeffs = project_moments(profile, quad, projection_order)
    squares = coeffs * coeffs
    tails = np.array([squares[n + 1:].sum() for n in orders])

    tiny = np.finfo(float).tiny
    if len(orders) >= 2:
        slope = float(np.polyfit(np.log(orders), np.log(np.maximum(tails, tiny)), 1)[0])
    else:
        slope = float("nan")

    # ‖g‖²_{ω⁻¹} = ∫ g² e^{v²/2} dv
    lifted = apply_ladder_operator(profile, quad.nodes, k)
    reference = float(np.sum(quad.weights * lifted * lifted * np.exp(0.5 * quad.nodes ** 2)))
    return TailDecayResult(orders, tails, slope, reference, k)


def orthonormality_error(quad: VelocityQuadrature, max_order: int) -> float:
    """max_{m,n ≤ max_order} |∫ H̃e_m H̃e_n e^{-v²/2} dv − δ_mn| under ``quad``"""
    table = htilde_table(max_order, quad.nodes)
    gram = (table * (quad.weights * np.exp(-0.5 * quad.nodes ** 2))) @ table.T
    return float(np.max(np.abs(gram - np.eye(max_order + 1))))


def recursion_mismatch(max_order: int, v) -> float:
    """Largest relative disagreement between the derivative and three-term recursions

    Both produce √(n+1)·H̃e_{n+1}; the derivative form uses H̃e_n' obtained from
    the power-series representation. Checked for n = 1..max_order − 1.
    """
    v = np.asarray(v, dtype=float)
    table = htilde_table(max_order, v)
    worst = 0.0
    for n in range(1, max_order):
        unit = np.zeros(n + 1)
        unit[n] = 1.0
        scale = 1.0 / math.sqrt(SQRT_2PI * math.factorial(n))
        derivative = hermite_e.hermeval(v, hermite_e.hermeder(unit)) * scale
        from_derivative = v * table[n] - derivative
        from_three_term = v * table[n] - math.sqrt(n) * table[n - 1]
        denom = max(np.max(np.abs(from_three_term)), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(from_derivative - from_three_term)) / denom))
    return worst
