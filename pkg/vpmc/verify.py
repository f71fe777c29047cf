#!/usr/bin/env python3
"""
Property suite behind ``vpmc verify``

Each check returns a PropertyResult; the suite takes well under a minute on
the default grid.
"""

from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from numpy.polynomial import hermite_e

from .diag import l2_bound_check
from .field import Grid1D
from .hermite import (Equilibrium, VelocityQuadrature, orthonormality_error, recursion_mismatch,
                      tail_decay_check)
from .kinetic import initial_phase_space, run_vp
from .msolver import MomentField, build_system, equilibrium_moments, integrate, project_initial
from .optim import Hyperparameters, OptimState, jacobs_update


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    detail: str


def check_orthonormality() -> Tuple[bool, str]:
    error = orthonormality_error(VelocityQuadrature.gauss_hermite(64), 30)
    return error <= 1e-8, f"max Gram error {error:.2e} (N = 30)"


def check_recursions() -> Tuple[bool, str]:
    mismatch = recursion_mismatch(31, np.linspace(-8.0, 8.0, 161))
    return mismatch <= 1e-12, f"relative mismatch {mismatch:.2e}"


def check_eigenvalue_roots() -> Tuple[bool, str]:
    worst = 0.0
    for N in range(1, 32):
        unit = np.zeros(N + 2)
        unit[-1] = 1.0
        roots = np.sort(hermite_e.hermeroots(unit).real)
        worst = max(worst, float(np.max(np.abs(build_system(N).eigenvalues - roots))))
    return worst <= 1e-8, f"max |eigenvalue - root| {worst:.2e} (N = 1..31)"


def check_zero_eigenvalue_parity() -> Tuple[bool, str]:
    wrong = [N for N in range(1, 32)
             if bool(np.any(np.abs(build_system(N).eigenvalues) < 1e-10)) != (N % 2 == 0)]
    return not wrong, "parity holds" if not wrong else f"parity broken for N = {wrong}"


def check_moment_mass() -> Tuple[bool, str]:
    grid = Grid1D()
    f0 = initial_phase_space(Equilibrium.two_stream(), grid)
    trajectory = integrate(project_initial(f0, 30, grid), build_system(30), np.zeros(grid.nx), 5.0, grid)
    masses = np.array([state.values[0].sum() * grid.dx for state in trajectory.states])
    drift = float(np.max(np.abs(masses - masses[0])) / abs(masses[0]))
    return drift <= 1e-10, f"relative drift {drift:.2e} over {len(trajectory) - 1} steps"


def check_kinetic_mass() -> Tuple[bool, str]:
    grid = Grid1D()
    f0 = initial_phase_space(Equilibrium.maxwellian(), grid)
    final = run_vp(f0, np.zeros(grid.nx), 2.0)
    drift = abs(final.mass() - f0.mass()) / f0.mass()
    return drift <= 1e-10, f"relative drift {drift:.2e}"


def check_l2_bound() -> Tuple[bool, str]:
    grid = Grid1D()
    mu = Equilibrium.two_stream()
    m_bar = equilibrium_moments(mu, 30, grid)
    rng = np.random.default_rng(0)
    moments = MomentField(m_bar[:, None] + 1e-3 * rng.standard_normal((31, grid.nx)))
    lhs, rhs = l2_bound_check(moments, mu, grid, m_bar)
    return lhs <= rhs * (1.0 + 1e-6), f"lhs {lhs:.6e} <= rhs {rhs:.6e}"


def check_fixed_points() -> Tuple[bool, str]:
    grid = Grid1D()
    mu = Equilibrium.two_stream()
    f0 = initial_phase_space(mu, grid, amplitude=0.0)
    trajectory = integrate(project_initial(f0, 30, grid), build_system(30), np.zeros(grid.nx), 2.0, grid)
    moment_error = float(np.max(np.abs(trajectory.final.values - trajectory.states[0].values)))
    final = run_vp(f0, np.zeros(grid.nx), 1.0)
    kinetic_error = float(np.max(np.abs(final.values - f0.values)))
    worst = max(moment_error, kinetic_error)
    return worst <= 1e-12, f"moments {moment_error:.2e}, kinetic {kinetic_error:.2e}"


def check_jacobs_branches() -> Tuple[bool, str]:
    hyper = Hyperparameters(eta0=0.1)
    state = OptimState.initial(3, hyper)
    state = OptimState(state.params, state.w, state.eta, np.array([1.0, 1.0, 0.0]), 1, hyper)
    eta, _ = jacobs_update(state, np.array([2.0, -1.0, 5.0]))
    expected = np.array([0.1 + hyper.increment, 0.7 * 0.1, 0.1])
    return bool(np.array_equal(eta, expected)), f"eta {eta.tolist()}"


def check_tail_decay() -> Tuple[bool, str]:
    quad = VelocityQuadrature.gauss_hermite(160)
    profile = np.exp(-0.5 * (quad.nodes - 1.0) ** 2)
    result = tail_decay_check(profile, 2, (10, 20, 40), quad, projection_order=80)
    return result.decays_at_rate, f"log-log slope {result.slope:.2f} (k = 2)"


PROPERTIES: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = [
    ("hermite orthonormality", check_orthonormality),
    ("hermite recursions", check_recursions),
    ("eigenvalues are Hermite roots", check_eigenvalue_roots),
    ("zero eigenvalue iff N even", check_zero_eigenvalue_parity),
    ("moment mass conservation", check_moment_mass),
    ("kinetic mass conservation", check_kinetic_mass),
    ("L2 perturbation bound", check_l2_bound),
    ("equilibrium fixed points", check_fixed_points),
    ("Jacobs adaptation branches", check_jacobs_branches),
    ("Hermite tail decay", check_tail_decay),
]


def run_properties() -> List[PropertyResult]:
    results = []
    for name, check in PROPERTIES:
        passed, detail = check()
        results.append(PropertyResult(name, passed, detail))
    return results
