#!/usr/bin/env python3
"""
Tests for adjoint.py backward solve, gradient assembly and the moment objective
"""

from dataclasses import replace

import numpy as np
import pytest

from vpmc.adjoint import (
    AdjointField,
    AdjointTrajectory,
    GradientVector,
    MomentObjective,
    adjoint_step,
    assemble_gradient,
    integrate_adjoint,
    loss,
    terminal_condition,
)
from vpmc.errors import ArgumentError, SequencingError
from vpmc.field import ControlParams, Grid1D
from vpmc.hermite import Equilibrium
from vpmc.kinetic import initial_phase_space
from vpmc.msolver import (
    MomentField,
    advect_characteristics,
    build_system,
    equilibrium_moments,
    integrate,
    project_initial,
)
from vpmc.optim import finite_difference_gradient


N = 3
K = 2


def coarse_objective(time_rule="trapezoid", gradient="adjoint"):
    """Five steps of N = 3 on 16 cells"""
    grid = Grid1D(nx=16)
    mu = Equilibrium.two_stream()
    initial = project_initial(initial_phase_space(mu, grid), N, grid)
    return MomentObjective(initial, build_system(N), equilibrium_moments(mu, N, grid), grid,
                           T=0.25, K=K, cfl=0.06, gradient=gradient, time_rule=time_rule)


def relative_inf_error(approx, reference):
    return float(np.max(np.abs(approx - reference)) / np.max(np.abs(reference)))


class TestLoss:
    """Tests for the terminal loss and adjoint condition"""

    def setup_method(self):
        self.grid = Grid1D()
        self.m_bar = equilibrium_moments(Equilibrium.two_stream(), N, self.grid)

    def test_zero_at_equilibrium(self):
        state = MomentField(np.outer(self.m_bar, np.ones(self.grid.nx)), 1.0)
        assert loss(state, self.m_bar, self.grid.dx) == 0.0

    def test_constant_offset(self):
        """Offsetting m_0 by c gives ½c²L"""
        values = np.outer(self.m_bar, np.ones(self.grid.nx))
        values[0] += 0.01
        assert loss(MomentField(values), self.m_bar, self.grid.dx) == pytest.approx(
            0.5 * 0.01 ** 2 * self.grid.length)

    def test_terminal_condition(self):
        """λ(T) = −(m(T) − m̄)"""
        values = np.random.default_rng(2).standard_normal((N + 1, self.grid.nx))
        terminal = terminal_condition(MomentField(values, 2.5), self.m_bar)
        assert np.array_equal(terminal.values, -(values - self.m_bar[:, None]))
        assert terminal.time == 2.5

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            loss(MomentField(np.zeros((N + 1, self.grid.nx))), np.zeros(N), self.grid.dx)


class TestAdjointStep:
    """Tests for single backward steps"""

    def setup_method(self):
        self.grid = Grid1D(nx=32)
        self.sys = build_system(5)
        self.rng = np.random.default_rng(7)

    def test_zero_multiplier(self):
        state = AdjointField(np.zeros((6, self.grid.nx)), 1.0)
        new, half = adjoint_step(state, self.sys, self.rng.standard_normal(self.grid.nx), 0.2, self.grid)
        assert np.array_equal(new.values, state.values)
        assert np.array_equal(half, state.values)
        assert new.time == pytest.approx(0.8)

    def test_constant_multiplier_without_field(self):
        """Uniform λ is invariant when E + H = 0"""
        state = AdjointField(np.outer(self.rng.standard_normal(6), np.ones(self.grid.nx)), 1.0)
        new, _ = adjoint_step(state, self.sys, 0.0, 0.3, self.grid)
        assert np.allclose(new.values, state.values, atol=1e-13)

    def test_transpose_of_linearized_forward(self):
        """⟨M u, λ⟩ = ⟨u, Mᵀ λ⟩ for the forward step with a frozen field"""
        dt = 0.4
        field = self.rng.standard_normal(self.grid.nx)
        u = self.rng.standard_normal((6, self.grid.nx))
        lam = self.rng.standard_normal((6, self.grid.nx))

        half = advect_characteristics(u, self.sys, 0.5 * dt, self.grid)
        forward = advect_characteristics(half + dt * field * (self.sys.D @ half), self.sys, 0.5 * dt, self.grid)
        backward, _ = adjoint_step(AdjointField(lam, dt), self.sys, field, dt, self.grid)

        assert np.sum(forward * lam) == pytest.approx(np.sum(u * backward.values), rel=1e-12)

    def test_positive_step(self):
        state = AdjointField(np.zeros((6, self.grid.nx)), 1.0)
        with pytest.raises(ArgumentError):
            adjoint_step(state, self.sys, 0.0, 0.0, self.grid)


class TestIntegrateAdjoint:
    """Tests for the backward sweep along a forward trajectory"""

    def setup_method(self):
        self.objective = coarse_objective()
        self.trajectory = self.objective.forward(np.zeros(self.objective.size))

    def test_levels_follow_forward(self):
        backward = integrate_adjoint(self.trajectory, self.objective.sys, self.objective.m_bar)
        assert len(backward) == len(self.trajectory) == 6
        assert len(backward.halves) == 5
        assert [state.time for state in backward.states] == [state.time for state in self.trajectory.states]

    def test_incomplete_history(self):
        broken = replace(self.trajectory, steps=self.trajectory.steps[:-1])
        with pytest.raises(SequencingError):
            integrate_adjoint(broken, self.objective.sys, self.objective.m_bar)


class TestAssembleGradient:
    """Tests for gradient assembly"""

    def setup_method(self):
        self.objective = coarse_objective()
        self.params = ControlParams.zeros(K)
        self.trajectory = self.objective.forward(self.params.as_vector())

    def test_zero_multiplier_gives_zero(self):
        shape = (N + 1, self.objective.grid.nx)
        backward = AdjointTrajectory(
            tuple(AdjointField(np.zeros(shape), s.time) for s in self.trajectory.states),
            tuple(np.zeros(shape) for _ in self.trajectory.steps))
        gradient = assemble_gradient(self.trajectory, backward, self.objective.sys, self.params)
        assert np.array_equal(gradient.as_vector(), np.zeros(2 * K + 1))

    def test_zero_state_gives_zero(self):
        """m ≡ 0 has D m ≡ 0"""
        grid = self.objective.grid
        zero = MomentField(np.zeros((N + 1, grid.nx)))
        trajectory = integrate(zero, self.objective.sys, np.zeros(grid.nx), 0.25, grid, cfl=0.06, rho_ion=0.0)
        backward = integrate_adjoint(trajectory, self.objective.sys, self.objective.m_bar)
        for rule in ("trapezoid", "midpoint"):
            gradient = assemble_gradient(trajectory, backward, self.objective.sys, self.params, rule)
            assert gradient.inf_norm() == 0.0

    def test_affine_in_target(self):
        """The gradient is affine in m̄ for a fixed forward trajectory"""
        sys = self.objective.sys
        rng = np.random.default_rng(5)
        a, b, c = (self.objective.m_bar + 1e-3 * rng.standard_normal(N + 1) for _ in range(3))

        def gradient(target):
            backward = integrate_adjoint(self.trajectory, sys, target)
            return assemble_gradient(self.trajectory, backward, sys, self.params).as_vector()

        left = gradient(a) + gradient(b)
        right = gradient(c) + gradient(a + b - c)
        assert np.allclose(left, right, rtol=1e-9, atol=1e-15)

    def test_length_mismatch(self):
        backward = integrate_adjoint(self.trajectory, self.objective.sys, self.objective.m_bar)
        short = AdjointTrajectory(backward.states[1:], backward.halves[1:])
        with pytest.raises(SequencingError):
            assemble_gradient(self.trajectory, short, self.objective.sys, self.params)

    def test_unknown_time_rule(self):
        backward = integrate_adjoint(self.trajectory, self.objective.sys, self.objective.m_bar)
        with pytest.raises(ArgumentError):
            assemble_gradient(self.trajectory, backward, self.objective.sys, self.params, "simpson")


class TestGradientFidelity:
    """Adjoint gradient against central differences of the moment loss"""

    @pytest.mark.parametrize("time_rule", ["trapezoid", "midpoint"])
    def test_matches_finite_differences_at_zero(self, time_rule):
        objective = coarse_objective(time_rule)
        vector = np.zeros(objective.size)
        assert len(objective.forward(vector).steps) == 5
        _, adjoint = objective.value_and_gradient(vector)
        reference = finite_difference_gradient(objective.value, vector, 1e-5)
        assert relative_inf_error(adjoint, reference) <= 0.05

    def test_matches_finite_differences_near_zero(self):
        objective = coarse_objective()
        vector = np.random.default_rng(11).uniform(-1e-3, 1e-3, objective.size)
        _, adjoint = objective.value_and_gradient(vector)
        reference = finite_difference_gradient(objective.value, vector, 1e-5)
        assert relative_inf_error(adjoint, reference) <= 0.10

    def test_exact_mode(self):
        """Exact mode is plain central differencing of the forward solve"""
        objective = coarse_objective(gradient="exact")
        vector = np.full(objective.size, 1e-3)
        value, gradient = objective.value_and_gradient(vector)
        reference = finite_difference_gradient(objective.value, vector, objective.fd_step)
        assert value == objective.value(vector)
        assert np.allclose(gradient, reference, rtol=1e-6, atol=1e-15)

    def test_invalid_modes(self):
        objective = coarse_objective()
        with pytest.raises(ArgumentError):
            MomentObjective(objective.initial, objective.sys, objective.m_bar, objective.grid,
                            0.25, K, gradient="reverse")
        with pytest.raises(ArgumentError):
            MomentObjective(objective.initial, objective.sys, objective.m_bar, objective.grid,
                            0.25, K, time_rule="simpson")


class TestGradientVector:
    """Tests for GradientVector layout"""

    def test_round_trip(self):
        vector = np.array([1.0, -3.0, 0.5, 0.0, 2.0])
        gradient = GradientVector.from_vector(vector, 2)
        assert np.array_equal(gradient.d_alpha, [1.0, -3.0])
        assert np.array_equal(gradient.as_vector(), vector)
        assert gradient.inf_norm() == 3.0

    def test_shape_check(self):
        with pytest.raises(ArgumentError):
            GradientVector(np.zeros(2), np.zeros(2))
