"""Brute-force oracle behavior and its agreement with the closed forms."""

import math

import numpy as np
import pytest

from fitzloss.errors import DomainError, UnsupportedDimensionError
from fitzloss.losses import Family, Generator, LossSpec, fitz_value, fitz_squared, fitz_sparsemax, fitz_logistic
from fitzloss.oracle import (
    GridConfig,
    NegentropySpec,
    bregman,
    fitz_value_via_shifted_generator,
    interior_grid,
    lower_bound_quadratic,
    omega_y_conjugate_grid,
)
from fitzloss.simplex import project_simplex, softargmax


def sample_prob(rng, k):
    return rng.dirichlet(np.ones(k))


class TestBregman:
    def test_zero_on_diagonal(self):
        y = np.array([0.3, 0.7])
        assert bregman("squared", y, y) == 0.0
        assert abs(bregman("negentropy", y, y)) < 1e-15

    def test_squared_hand_value(self):
        assert bregman("squared", [1.0, 0.0], [0.0, 0.0]) == 0.5

    def test_negentropy_hand_value(self):
        value = bregman(NegentropySpec(0.0), [1.0, 0.0], [0.5, 0.5])
        assert abs(value - math.log(2.0)) < 1e-14

    def test_negentropy_boundary_is_infinite(self):
        assert bregman("negentropy", [0.5, 0.5], [1.0, 0.0]) == math.inf
        # the marker applies to any zero in the second argument
        assert bregman("negentropy", [1.0, 0.0], [1.0, 0.0]) == math.inf

    def test_alpha_drops_out(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            y = sample_prob(rng, 3)
            y2 = sample_prob(rng, 3) + 1e-3
            a = bregman(NegentropySpec(0.0), y, y2)
            b = bregman(NegentropySpec(2.5), y, y2)
            assert abs(a - b) < 1e-12

    def test_negative_entries_rejected(self):
        with pytest.raises(DomainError):
            bregman("negentropy", [-0.1, 1.1], [0.5, 0.5])

    def test_nonnegative_and_definite(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            k = int(rng.integers(2, 5))
            y = sample_prob(rng, k)
            y2 = sample_prob(rng, k)
            for gen in ("squared", "negentropy"):
                d = bregman(gen, y, y2)
                assert d >= 0.0
                if float(np.max(np.abs(y - y2))) > 1e-6:
                    assert d > 0.0


class TestInteriorGrid:
    def test_strictly_interior(self):
        for k in (2, 3):
            grid = interior_grid(k, 50)
            assert np.all(grid > 0.0)
            assert grid.min() >= 1.0 / (2 * 50)
            np.testing.assert_allclose(grid.sum(axis=1), 1.0, atol=1e-12)

    def test_lexicographic_order(self):
        grid = interior_grid(3, 20)
        as_tuples = [tuple(row) for row in grid]
        assert as_tuples == sorted(as_tuples)

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            interior_grid(4, 50)


class TestConjugateGrid:
    def test_squared_matches_midpoint_closed_form(self):
        # for the squared-on-simplex generator the shifted conjugate is
        # 2 Omega*((y + theta) / 2) - Omega(y) in closed form
        rng = np.random.default_rng(2)
        cfg = GridConfig(resolution=400)
        for _ in range(20):
            k = int(rng.integers(2, 4))
            y = sample_prob(rng, k)
            theta = rng.normal(0, 1.5, size=k)
            grid_value, _ = omega_y_conjugate_grid("squared", y, theta, cfg)
            mid = 0.5 * (y + theta)
            p = project_simplex(mid)
            omega_star = float(p @ mid) - 0.5 * float(p @ p)
            closed = 2.0 * omega_star - 0.5 * float(y @ y)
            assert abs(grid_value - closed) <= 5.0 / cfg.resolution

    def test_negentropy_argmax_sits_at_link(self):
        cfg = GridConfig(resolution=400)
        theta = np.array([0.4, -0.2, 0.1])
        y = softargmax(theta)
        _, arg = omega_y_conjugate_grid("negentropy", y, theta, cfg)
        assert float(np.max(np.abs(arg - y))) <= 2.0 / cfg.resolution

    def test_vertex_assembles_to_logistic_value(self):
        cfg = GridConfig(resolution=400)
        y = np.array([1.0, 0.0])
        theta = np.zeros(2)
        value, _ = omega_y_conjugate_grid("negentropy", y, theta, cfg)
        assembled = 0.0 + value - 0.0  # Omega(y) and <y, theta> vanish here
        closed, _ = fitz_logistic(y, theta)
        assert abs(assembled - closed) <= 5.0 / cfg.resolution

    def test_dimension_cap(self):
        with pytest.raises(UnsupportedDimensionError):
            omega_y_conjugate_grid("squared", [0.25] * 4, [0.0] * 4)


class TestShiftedGeneratorAssembly:
    def test_zero_at_link(self):
        cfg = GridConfig(resolution=400)
        theta = np.array([0.3, -0.5])
        for gen, loss_gen in (("squared", Generator.SPARSEMAX),
                              ("negentropy", Generator.LOGISTIC)):
            y = project_simplex(theta) if gen == "squared" else softargmax(theta)
            if float(y.min()) == 0.0:
                y = softargmax(theta)
            value = fitz_value_via_shifted_generator(gen, y, theta, cfg)
            assert abs(value) <= 5.0 / cfg.resolution

    def test_sparsemax_vertex(self):
        value = fitz_value_via_shifted_generator(
            "squared", [1.0, 0.0], [0.0, 0.0], GridConfig(resolution=400)
        )
        assert abs(value - 0.125) <= 5.0 / 400

    def test_logistic_vertex(self):
        value = fitz_value_via_shifted_generator(
            "negentropy", [1.0, 0.0], [0.0, 0.0], GridConfig(resolution=400)
        )
        assert abs(value - 0.2784645427610738) <= 5.0 / 400

    @pytest.mark.parametrize("k", [2, 3])
    def test_random_agreement_small_grid(self, k):
        # smaller grid for speed; the acceptance suite runs resolution 400
        rng = np.random.default_rng(3 + k)
        cfg = GridConfig(resolution=160)
        for _ in range(10):
            y = sample_prob(rng, k)
            theta = rng.normal(0, 1.5, size=k)
            for gen, spec in (("squared", LossSpec("sparsemax", "fitzpatrick")),
                              ("negentropy", LossSpec("logistic", "fitzpatrick"))):
                grid_value = fitz_value_via_shifted_generator(gen, y, theta, cfg)
                closed = fitz_value(spec, y, theta)
                assert abs(grid_value - closed) <= 5.0 / cfg.resolution

    def test_alpha_invariant_on_simplex(self):
        y = np.array([0.3, 0.7])
        theta = np.array([0.2, -0.4])
        a = fitz_value_via_shifted_generator(NegentropySpec(0.0), y, theta)
        b = fitz_value_via_shifted_generator(NegentropySpec(1.7), y, theta)
        assert abs(a - b) <= 1e-9


class TestLowerBoundQuadratic:
    def test_zero_on_diagonal(self):
        y = np.array([0.4, 0.6])
        assert lower_bound_quadratic("squared", y, y) == 0.0
        assert lower_bound_quadratic("negentropy", y, y) == 0.0

    def test_squared_equality_case(self):
        value, y_star = fitz_squared([1.0, 0.0], [0.0, 0.0])
        quad = lower_bound_quadratic("squared", [1.0, 0.0], y_star)
        assert quad == 0.25
        assert abs(quad - value) < 1e-15

    def test_negentropy_hand_value(self):
        quad = lower_bound_quadratic("negentropy", [0.6, 0.4], [0.5, 0.5])
        assert abs(quad - 0.04) < 1e-14

    def test_zero_mismatch_rejected(self):
        with pytest.raises(DomainError):
            lower_bound_quadratic("negentropy", [0.5, 0.5], [1.0, 0.0])

    def test_matching_zeros_allowed(self):
        quad = lower_bound_quadratic("negentropy", [1.0, 0.0], [1.0, 0.0])
        assert quad == 0.0

    def test_bounds_fitzpatrick_values(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            k = int(rng.integers(2, 8))
            y = sample_prob(rng, k)
            theta = rng.normal(0, 2, size=k)
            value_sp, star_sp = fitz_sparsemax(y, theta)
            assert lower_bound_quadratic("squared", y, star_sp) <= value_sp + 1e-8
            value_lg, star_lg = fitz_logistic(y, theta)
            assert lower_bound_quadratic("negentropy", y, star_lg) <= value_lg + 1e-8

    def test_unconstrained_squared_exact(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            k = int(rng.integers(1, 8))
            y = rng.normal(0, 2, size=k)
            theta = rng.normal(0, 2, size=k)
            value, y_star = fitz_squared(y, theta)
            quad = lower_bound_quadratic("squared", y, y_star)
            assert abs(quad - value) <= 1e-12 * max(1.0, value)


class TestStationaryPointCrossCheck:
    def test_unconstrained_squared_maximizer(self):
        # the stationary condition hessian(Omega)(y*)(y* - y) = theta - grad(Omega)(y*)
        # collapses to y* = (y + theta)/2 with loss ||y - y*||^2
        rng = np.random.default_rng(7)
        for _ in range(200):
            k = int(rng.integers(1, 8))
            y = rng.normal(0, 2, size=k)
            theta = rng.normal(0, 2, size=k)
            value, y_star = fitz_squared(y, theta)
            np.testing.assert_allclose(y_star - y, theta - y_star, atol=1e-12)
            direct = float(np.dot(y - y_star, y - y_star))
            assert abs(direct - value) <= 1e-12 * max(1.0, value)
