"""Objective, optimizer, prediction and metric behavior."""

import math

import numpy as np
import pytest

from fitzloss.data import synth_generate
from fitzloss.errors import DimensionError, DomainError, LineSearchError
from fitzloss.losses import Family, Generator, LossSpec
from fitzloss.numeric import finite_diff_grad
from fitzloss.train import (
    TrainConfig,
    lbfgs_minimize,
    mse,
    objective,
    predict,
    predict_batch,
    read_weights,
    write_weights,
)

ALL_SPECS = [LossSpec(g, f) for g in Generator for f in Family]
SMOOTH_SPECS = [s for s in ALL_SPECS if s.generator is not Generator.PERCEPTRON_SIMPLEX]


def tiny_instance(rng, n=5, d=3, k=3):
    x = rng.normal(size=(n, d))
    y = rng.dirichlet(np.ones(k), size=n)
    return x, y


class TestObjective:
    def test_empty_split_is_pure_ridge(self):
        cfg = TrainConfig(loss=LossSpec("logistic"), lam=2.0)
        w = np.arange(6.0).reshape(2, 3)
        value, grad = objective(w, np.zeros((0, 3)), np.zeros((0, 2)), cfg)
        assert abs(value - 1.0 * float(np.sum(w * w))) < 1e-12
        np.testing.assert_allclose(grad, 2.0 * w)

    def test_zero_weights_squared(self):
        rng = np.random.default_rng(0)
        x, y = tiny_instance(rng)
        cfg = TrainConfig(loss=LossSpec("squared"), lam=1.0)
        w = np.zeros((3, 3))
        value, grad = objective(w, x, y, cfg)
        assert abs(value - 0.5 * float(np.sum(y * y))) < 1e-12
        np.testing.assert_allclose(grad, -(y.T @ x), atol=1e-12)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.name)
    def test_gradient_matches_finite_differences(self, spec):
        rng = np.random.default_rng(1)
        x, y = tiny_instance(rng)
        cfg = TrainConfig(loss=spec, lam=0.5)
        w0 = rng.normal(scale=0.5, size=(3, 3))

        def flat_objective(flat):
            return objective(flat.reshape(3, 3), x, y, cfg)[0]

        _, grad = objective(w0, x, y, cfg)
        fd = finite_diff_grad(flat_objective, w0.ravel(), h=1e-6)
        scale = max(1.0, float(np.max(np.abs(grad))))
        assert float(np.max(np.abs(grad.ravel() - fd))) / scale <= 1e-4

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.name)
    def test_convex_along_segments(self, spec):
        rng = np.random.default_rng(2)
        x, y = tiny_instance(rng)
        cfg = TrainConfig(loss=spec, lam=0.1)
        for _ in range(20):
            w1 = rng.normal(size=(3, 3))
            w2 = rng.normal(size=(3, 3))
            f1, _ = objective(w1, x, y, cfg)
            f2, _ = objective(w2, x, y, cfg)
            fm, _ = objective(0.5 * (w1 + w2), x, y, cfg)
            assert fm <= 0.5 * f1 + 0.5 * f2 + 1e-9

    def test_dimension_mismatch(self):
        cfg = TrainConfig(loss=LossSpec("logistic"), lam=1.0)
        with pytest.raises(DimensionError):
            objective(np.zeros((2, 3)), np.zeros((4, 5)), np.zeros((4, 2)), cfg)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            TrainConfig(loss=LossSpec("logistic"), lam=0.0)
        with pytest.raises(DomainError):
            TrainConfig(loss=LossSpec("logistic"), lam=1.0, lbfgs_memory=0)


class TestLbfgs:
    def test_matches_ridge_closed_form(self):
        # squared loss makes the objective a quadratic with an explicit
        # normal-equations solution
        rng = np.random.default_rng(3)
        x = rng.normal(size=(6, 4))
        y = rng.normal(size=(6, 3))
        lam = 0.7
        cfg = TrainConfig(loss=LossSpec("squared"), lam=lam, grad_tol=1e-12)
        result = lbfgs_minimize(x, y, cfg)
        exact = np.linalg.solve(x.T @ x + lam * np.eye(4), x.T @ y).T
        assert result.converged
        np.testing.assert_allclose(result.weights, exact, atol=1e-6)

    def test_trace_monotone_nonincreasing(self):
        ds = synth_generate(seed=4, n=60, d=4, k=3, noise=0.3)
        x, y = ds.split("train")
        for name in ("logistic", "fitzpatrick-logistic", "sparsemax",
                     "fitzpatrick-sparsemax"):
            cfg = TrainConfig(loss=LossSpec.parse(name), lam=0.5)
            result = lbfgs_minimize(x, y, cfg)
            trace = np.asarray(result.trace)
            assert np.all(np.diff(trace) <= 1e-12 * np.maximum(1.0, np.abs(trace[:-1])))

    def test_logistic_separable_toy(self):
        # two linearly separable clusters, one-hot labels
        rng = np.random.default_rng(5)
        x0 = rng.normal(loc=(-2.0, 0.0), scale=0.3, size=(20, 2))
        x1 = rng.normal(loc=(2.0, 0.0), scale=0.3, size=(20, 2))
        x = np.vstack([x0, x1])
        y = np.zeros((40, 2))
        y[:20, 0] = 1.0
        y[20:, 1] = 1.0
        cfg = TrainConfig(loss=LossSpec("logistic"), lam=1.0, grad_tol=1e-6)
        result = lbfgs_minimize(x, y, cfg)
        assert result.converged
        assert result.grad_norm <= 1e-6 * result.initial_grad_norm

    def test_bit_deterministic(self):
        ds = synth_generate(seed=6, n=50, d=4, k=3, noise=0.2)
        x, y = ds.split("train")
        cfg = TrainConfig(loss=LossSpec.parse("fitzpatrick-logistic"), lam=0.3)
        a = lbfgs_minimize(x, y, cfg)
        b = lbfgs_minimize(x, y, cfg)
        assert np.array_equal(a.weights, b.weights)
        assert a.trace == b.trace

    def test_perceptron_stops_at_global_minimum(self):
        # with simplex targets the zero matrix minimizes the perceptron
        # objective exactly, and the objective is nonsmooth there; the line
        # search honestly reports that no descent direction exists
        ds = synth_generate(seed=7, n=40, d=3, k=3, noise=0.2)
        x, y = ds.split("train")
        cfg = TrainConfig(loss=LossSpec("perceptron"), lam=1.0)
        with pytest.raises(LineSearchError) as info:
            lbfgs_minimize(x, y, cfg)
        best = info.value.best
        assert best is not None
        np.testing.assert_array_equal(best.weights, 0.0)
        value, _ = objective(best.weights, x, y, cfg)
        assert value == 0.0  # the global minimum


class TestPredict:
    def test_zero_weights_are_uniform(self):
        w = np.zeros((4, 3))
        x = np.array([0.5, -1.0, 2.0])
        for name in ("logistic", "sparsemax"):
            np.testing.assert_allclose(predict(w, x, name), 0.25)

    def test_family_is_ignored(self):
        rng = np.random.default_rng(8)
        w = rng.normal(size=(3, 5))
        x = rng.normal(size=5)
        for gen in ("logistic", "sparsemax", "perceptron", "squared"):
            a = predict(w, x, gen)
            b = predict(w, x, f"fitzpatrick-{gen}")
            np.testing.assert_array_equal(a, b)

    def test_single_feature_two_class(self):
        w = np.array([[1.0], [-1.0]])
        np.testing.assert_allclose(predict(w, np.array([0.0]), "logistic"), [0.5, 0.5])

    def test_squared_uses_identity_link(self):
        w = np.array([[2.0, 0.0], [0.0, -1.0]])
        x = np.array([1.0, 3.0])
        np.testing.assert_allclose(predict(w, x, "squared"), [2.0, -3.0])

    def test_batch_matches_single(self):
        rng = np.random.default_rng(9)
        w = rng.normal(size=(3, 4))
        xs = rng.normal(size=(10, 4))
        for name in ("logistic", "sparsemax", "perceptron", "squared"):
            batch = predict_batch(w, xs, name)
            for i in range(10):
                np.testing.assert_allclose(batch[i], predict(w, xs[i], name), atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            predict(np.zeros((2, 3)), np.zeros(4), "logistic")


class TestMse:
    def test_perfect_predictions(self):
        y = np.array([[0.5, 0.5], [1.0, 0.0]])
        assert mse(y, y) == 0.0

    def test_opposite_vertices(self):
        assert mse([[1.0, 0.0]], [[0.0, 1.0]]) == 2.0

    def test_mean_over_samples(self):
        p = np.array([[1.0, 0.0], [1.0, 0.0]])
        t = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert mse(p, t) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            mse(np.zeros((2, 2)), np.zeros((3, 2)))


class TestWeightFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(10)
        w = rng.normal(size=(3, 4))
        path = tmp_path / "model.txt"
        write_weights(path, w, "fitzpatrick-logistic", 0.125, 7)
        w2, spec, lam, seed = read_weights(path)
        np.testing.assert_array_equal(w, w2)
        assert spec.name == "fitzpatrick-logistic"
        assert lam == 0.125 and seed == 7

    def test_header_format(self, tmp_path):
        path = tmp_path / "model.txt"
        write_weights(path, np.zeros((2, 3)), "sparsemax", 1.0, 0)
        head = path.read_text().splitlines()[0]
        assert head == "2 3 sparsemax 1.0 0"

    def test_byte_identical_for_identical_weights(self, tmp_path):
        rng = np.random.default_rng(11)
        w = rng.normal(size=(2, 2))
        p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
        write_weights(p1, w, "logistic", 1.0, 1)
        write_weights(p2, w.copy(), "logistic", 1.0, 1)
        assert p1.read_bytes() == p2.read_bytes()
