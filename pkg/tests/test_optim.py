#!/usr/bin/env python3
"""
Tests for optim.py Jacobs adaptation, momentum updates and the optimize loop
"""

import numpy as np
import pytest

from vpmc.errors import ArgumentError, NumericError
from vpmc.optim import (
    ABORTED,
    CONVERGED,
    MAX_ITER,
    Hyperparameters,
    OptimState,
    finite_difference_gradient,
    jacobs_update,
    momentum_update,
    optimize,
)


class Quadratic:
    """½‖α − α*‖² with its exact gradient"""

    def __init__(self, target):
        self.target = np.asarray(target, dtype=float)
        self.size = self.target.size

    def value_and_gradient(self, vector):
        diff = vector - self.target
        return 0.5 * float(diff @ diff), diff


class Scripted:
    """Replays fixed (loss, gradient) pairs; raises NumericError when a pair is None"""

    def __init__(self, script, size=2):
        self.script = list(script)
        self.size = size
        self.calls = []

    def value_and_gradient(self, vector):
        self.calls.append(np.array(vector))
        entry = self.script[min(len(self.calls) - 1, len(self.script) - 1)]
        if entry is None:
            raise NumericError("blow-up", step=3)
        loss, grad = entry
        return loss, np.asarray(grad, dtype=float)


def state_with(delta_bar, hyper=None, eta=None):
    hyper = hyper or Hyperparameters()
    state = OptimState.initial(len(delta_bar), hyper)
    if eta is not None:
        state = OptimState(state.params, state.w, np.asarray(eta, dtype=float), state.delta_bar, 0, hyper)
    return OptimState(state.params, state.w, state.eta, np.asarray(delta_bar, dtype=float), 1, hyper)


class TestHyperparameters:
    """Tests for hyperparameter defaults and validation"""

    def test_defaults(self):
        hyper = Hyperparameters()
        assert (hyper.eta0, hyper.beta, hyper.gamma, hyper.theta) == (0.1, 0.9, 0.3, 0.7)
        assert hyper.increment == pytest.approx(0.01)
        assert hyper.max_iter == 1000
        assert hyper.grad_tol == 1e-3

    def test_explicit_increment(self):
        assert Hyperparameters(kappa=0.5).increment == 0.5

    @pytest.mark.parametrize("kwargs", [
        {"eta0": 0.0},
        {"beta": 1.0},
        {"gamma": 1.0},
        {"theta": 1.5},
        {"kappa": -0.1},
        {"max_iter": 0},
        {"grad_tol": -1.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ArgumentError):
            Hyperparameters(**kwargs)


class TestJacobsUpdate:
    """Tests for per-parameter learning-rate adaptation"""

    def test_branches(self):
        """Agreement grows η by κ, disagreement shrinks it by (1 − γ), zero keeps it"""
        hyper = Hyperparameters(eta0=0.1)
        eta, _ = jacobs_update(state_with([1.0, 1.0, 0.0], hyper), np.array([2.0, -1.0, 5.0]))
        assert eta[0] == 0.1 + hyper.increment
        assert eta[1] == 0.7 * 0.1
        assert eta[2] == 0.1

    def test_smoothed_gradient(self):
        """δ̄ = (1 − θ)·δ + θ·δ̄_prev"""
        _, delta_bar = jacobs_update(state_with([1.0, -2.0]), np.array([3.0, 1.0]))
        assert np.allclose(delta_bar, [0.3 * 3.0 + 0.7 * 1.0, 0.3 * 1.0 - 0.7 * 2.0])

    def test_first_iteration_keeps_eta(self):
        """δ̄ starts at zero so the first step uses η0"""
        hyper = Hyperparameters()
        eta, _ = jacobs_update(OptimState.initial(3, hyper), np.array([1.0, -1.0, 2.0]))
        assert np.array_equal(eta, np.full(3, hyper.eta0))

    def test_learning_rates_stay_positive(self):
        """Random gradients never drive η to zero or below"""
        rng = np.random.default_rng(4)
        state = OptimState.initial(4, Hyperparameters())
        for _ in range(200):
            state = momentum_update(state, rng.standard_normal(4))
        assert np.all(state.eta > 0)


class TestMomentumUpdate:
    """Tests for the heavy-ball update"""

    def test_vanilla_step(self):
        """β = 0 with uniform η is plain gradient descent"""
        hyper = Hyperparameters(eta0=0.2, beta=0.0)
        state = OptimState.initial(3, hyper, params=np.array([1.0, 2.0, 3.0]))
        grad = np.array([0.5, -1.0, 2.0])
        new = momentum_update(state, grad)
        assert np.array_equal(new.params, state.params - 0.2 * grad)
        assert new.iter == 1

    def test_zero_gradient(self):
        state = OptimState.initial(2, Hyperparameters(), params=np.array([1.0, -1.0]))
        new = momentum_update(state, np.zeros(2))
        assert np.array_equal(new.params, state.params)

    def test_momentum_accumulates(self):
        """Two identical gradients give a second step along 1.9·g with the grown rate"""
        hyper = Hyperparameters()
        grad = np.array([1.0, -2.0])
        first = momentum_update(OptimState.initial(2, hyper), grad)
        second = momentum_update(first, grad)
        assert np.allclose(first.params, -hyper.eta0 * grad)
        expected = -(hyper.eta0 + hyper.increment) * 1.9 * grad
        assert np.allclose(second.params - first.params, expected, rtol=1e-12)

    def test_reduces_to_gradient_descent(self):
        """β = 0, κ = 0, γ = 0 follows gradient descent with fixed η0"""
        problem = Quadratic([1.0, -2.0, 0.5])
        hyper = Hyperparameters(eta0=0.3, beta=0.0, gamma=0.0, kappa=0.0)
        state = OptimState.initial(3, hyper)
        reference = np.zeros(3)
        for _ in range(20):
            _, grad = problem.value_and_gradient(state.params)
            state = momentum_update(state, grad)
            reference = reference - 0.3 * (reference - problem.target)
            assert np.array_equal(state.params, reference)

    def test_non_finite_gradient(self):
        state = OptimState.initial(2, Hyperparameters())
        with pytest.raises(NumericError):
            momentum_update(state, np.array([np.nan, 0.0]))

    def test_gradient_shape(self):
        state = OptimState.initial(2, Hyperparameters())
        with pytest.raises(ArgumentError):
            momentum_update(state, np.zeros(3))


class TestOptimize:
    """Tests for the optimization loop"""

    def test_quadratic_descent(self):
        """Exact gradients reach loss ≤ 1e-6 within 50 iterations"""
        problem = Quadratic(np.ones(5))
        result = optimize(problem, Hyperparameters(eta0=0.1, beta=0.0, max_iter=50, grad_tol=0.0))
        assert result.iterations == 50
        assert result.records[-1].loss <= 1e-6
        assert result.loss <= 1e-6
        assert result.status == MAX_ITER

    def test_default_hyperparameters_converge(self):
        """Heavy-ball defaults reach the gradient tolerance"""
        result = optimize(Quadratic([0.5, -0.25]))
        assert result.status == CONVERGED
        assert np.allclose(result.params, [0.5, -0.25], atol=1e-2)

    def test_stops_on_gradient_tolerance(self):
        objective = Scripted([(1.0, [5e-4, -5e-4])])
        result = optimize(objective, Hyperparameters(grad_tol=1e-3))
        assert result.status == CONVERGED
        assert result.iterations == 1
        assert np.array_equal(result.params, np.zeros(2))

    def test_stops_at_max_iter(self):
        """Exactly max_iter gradient evaluations"""
        objective = Scripted([(1.0 - 0.1 * i, [1.0, 1.0]) for i in range(10)])
        result = optimize(objective, Hyperparameters(max_iter=7))
        assert result.status == MAX_ITER
        assert result.iterations == 7
        assert len(objective.calls) == 7
        assert [record.iter for record in result.records] == list(range(7))

    def test_returns_best_iterate(self):
        """A worse later iterate does not replace the best one"""
        objective = Scripted([(1.0, [1.0, 0.0]), (5.0, [1.0, 0.0]), (4.0, [1.0, 0.0])])
        result = optimize(objective, Hyperparameters(max_iter=3))
        assert result.loss == 1.0
        assert np.array_equal(result.params, np.zeros(2))

    def test_aborts_on_numeric_error(self):
        """Solver blow-up keeps the best-so-far parameters"""
        objective = Scripted([(2.0, [1.0, 0.0]), (1.0, [1.0, 0.0]), None])
        result = optimize(objective, Hyperparameters(max_iter=10))
        assert result.status == ABORTED
        assert result.iterations == 2
        assert result.loss == 1.0
        assert np.array_equal(result.params, objective.calls[1])
        assert "Iteration 2" in result.error
        assert "step 3" in result.error

    def test_non_finite_loss_aborts(self):
        objective = Scripted([(float("nan"), [1.0, 0.0])])
        result = optimize(objective, Hyperparameters(max_iter=5))
        assert result.status == ABORTED
        assert result.iterations == 0

    def test_initial_parameters(self):
        objective = Scripted([(0.0, [0.0, 0.0])])
        result = optimize(objective, initial=np.array([0.3, -0.3]))
        assert np.array_equal(objective.calls[0], [0.3, -0.3])
        assert np.array_equal(result.params, [0.3, -0.3])


class TestFiniteDifferenceGradient:
    """Tests for central differences"""

    def test_quadratic_exact(self):
        func = lambda x: float(x @ x)  # noqa: E731
        vector = np.array([1.0, -2.0, 0.5])
        assert np.allclose(finite_difference_gradient(func, vector, 1e-4), 2 * vector, rtol=1e-9)
