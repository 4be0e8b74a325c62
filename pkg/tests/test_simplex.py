"""Projection, softargmax and vertex-argmax behavior."""

import math

import numpy as np
import pytest

from fitzloss.errors import DomainError
from fitzloss.simplex import (
    ZERO_SNAP,
    argmax_vertex,
    check_prob_vector,
    project_simplex,
    softargmax,
)


def simplex_lattice(k, resolution):
    """Boundary-inclusive lattice of the simplex, used as a search oracle."""
    if k == 2:
        i = np.arange(resolution + 1, dtype=float)
        return np.column_stack([i, resolution - i]) / resolution
    pts = [
        (i, j, resolution - i - j)
        for i in range(resolution + 1)
        for j in range(resolution + 1 - i)
    ]
    return np.asarray(pts, dtype=float) / resolution


class TestProjectSimplex:
    def test_feasible_point_is_fixed(self):
        z = np.array([0.6, 0.4])
        np.testing.assert_allclose(project_simplex(z), z, atol=1e-12)

    def test_threshold_by_hand(self):
        np.testing.assert_allclose(project_simplex([2.0, 0.0]), [1.0, 0.0])
        np.testing.assert_allclose(project_simplex([0.5, 0.0]), [0.75, 0.25])

    def test_kkt_conditions_random(self):
        # feasibility plus the threshold structure is a full optimality
        # certificate for this projection
        rng = np.random.default_rng(17)
        for _ in range(10_000):
            k = int(rng.integers(2, 9))
            z = rng.normal(0, 3, size=k)
            y = project_simplex(z)
            assert np.all(y >= 0.0)
            assert abs(y.sum() - 1.0) <= 1e-9
            active = y > 0.0
            tau = z[active] - y[active]
            assert tau.max() - tau.min() <= 1e-9
            if np.any(~active):
                assert np.max(z[~active]) <= tau.mean() + 1e-9

    def test_beats_dense_grid_k2(self):
        rng = np.random.default_rng(21)
        grid = simplex_lattice(2, 1000)
        for _ in range(200):
            z = rng.normal(0, 2, size=2)
            y = project_simplex(z)
            own = float(np.sum((y - z) ** 2))
            best = float(np.min(np.sum((grid - z) ** 2, axis=1)))
            assert own <= best + 1e-12
            assert best - own <= 1e-2 * (1.0 + np.linalg.norm(z))

    def test_beats_dense_grid_k3(self):
        rng = np.random.default_rng(23)
        grid = simplex_lattice(3, 100)
        for _ in range(100):
            z = rng.normal(0, 2, size=3)
            y = project_simplex(z)
            own = float(np.sum((y - z) ** 2))
            best = float(np.min(np.sum((grid - z) ** 2, axis=1)))
            assert own <= best + 1e-12
            assert best - own <= 0.1 * (1.0 + np.linalg.norm(z))

    def test_shift_equivariance(self):
        rng = np.random.default_rng(29)
        for _ in range(500):
            k = int(rng.integers(2, 9))
            z = rng.normal(0, 3, size=k)
            c = float(rng.uniform(-100, 100))
            np.testing.assert_allclose(
                project_simplex(z + c), project_simplex(z), atol=1e-12
            )

    def test_batch_matches_single(self):
        rng = np.random.default_rng(31)
        z = rng.normal(0, 2, size=(50, 5))
        batch = project_simplex(z, axis=1)
        for i in range(50):
            np.testing.assert_array_equal(batch[i], project_simplex(z[i]))

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            project_simplex([])


class TestCoSorting:
    def test_links_preserve_score_order(self):
        rng = np.random.default_rng(37)
        for _ in range(500):
            k = int(rng.integers(2, 9))
            theta = rng.normal(0, 3, size=k)
            for fn in (project_simplex, softargmax):
                out = fn(theta)
                for i in range(k):
                    for j in range(k):
                        if theta[i] > theta[j]:
                            assert out[i] >= out[j] - 1e-12


class TestSoftargmax:
    def test_uniform(self):
        np.testing.assert_allclose(softargmax([0.0, 0.0]), [0.5, 0.5])

    def test_direct_normalization(self):
        np.testing.assert_allclose(
            softargmax([math.log(1.0), math.log(3.0)]), [0.25, 0.75], atol=1e-15
        )

    def test_shift_invariance(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            k = int(rng.integers(2, 9))
            theta = rng.normal(0, 3, size=k)
            c = float(rng.uniform(-500, 500))
            np.testing.assert_allclose(
                softargmax(theta + c), softargmax(theta), atol=1e-12
            )

    def test_strictly_positive_and_normalized(self):
        rng = np.random.default_rng(43)
        for _ in range(500):
            k = int(rng.integers(2, 9))
            p = softargmax(rng.normal(0, 5, size=k))
            assert np.all(p > 0.0)
            assert abs(p.sum() - 1.0) <= 1e-12


class TestArgmaxVertex:
    def test_examples(self):
        np.testing.assert_array_equal(argmax_vertex([3.0, 1.0, 2.0]), [1, 0, 0])
        np.testing.assert_array_equal(argmax_vertex([-5.0, -1.0]), [0, 1])

    def test_tie_breaks_low(self):
        np.testing.assert_array_equal(argmax_vertex([1.0, 1.0]), [1, 0])


class TestProbVectorValidation:
    def test_snaps_tiny_entries(self):
        y = check_prob_vector([1.0 - 1e-13, 1e-13])
        assert y[1] == 0.0

    def test_snap_threshold(self):
        y = check_prob_vector([1.0 - 2e-12, 2e-12])
        assert y[1] == 2e-12  # above the snap threshold, kept as-is
        assert ZERO_SNAP == 1e-12

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            check_prob_vector([1.5, -0.5])

    def test_rejects_bad_sum(self):
        with pytest.raises(DomainError):
            check_prob_vector([0.6, 0.6])

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            check_prob_vector([math.nan, 1.0])
