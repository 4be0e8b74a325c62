"""Slow, brute-force implementations used to verify the closed forms.

The key identity being exercised: the Fitzpatrick loss generated by Omega is
the Fenchel-Young loss of the target-shifted generator
Omega_y(y') = Omega(y') + D_Omega(y, y'), where D_Omega is the generalized
Bregman divergence.  The conjugate of Omega_y is evaluated here by exhaustive
search over a barycentric grid, deliberately at O(resolution^(k-1)) cost and
capped at k = 3 -- these routines exist for correctness, not speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedDimensionError
from .simplex import check_prob_vector, check_score_vector

__all__ = [
    "NegentropySpec",
    "GridConfig",
    "bregman",
    "interior_grid",
    "omega_y_conjugate_grid",
    "fitz_value_via_shifted_generator",
    "lower_bound_quadratic",
]


@dataclass(frozen=True)
class NegentropySpec:
    """Negentropy generator sum(y log y) - alpha * sum(y).

    The linear coefficient alpha drops out of the Bregman divergence and,
    on the simplex, shifts the generator by a constant; it is exposed so
    invariance under alpha can be checked.
    """

    alpha: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise DomainError("alpha must be finite")


@dataclass(frozen=True)
class GridConfig:
    """Barycentric grid density for the exhaustive conjugate search."""

    resolution: int = 400
    k_max: int = 3

    def __post_init__(self):
        if self.resolution < 10:
            raise DomainError("resolution must be at least 10")
        if self.k_max not in (2, 3):
            raise DomainError("k_max must be 2 or 3")


def _normalize_gen(gen):
    if isinstance(gen, NegentropySpec):
        return gen
    if gen == "squared":
        return "squared"
    if gen == "negentropy":
        return NegentropySpec()
    raise DomainError(f"unknown oracle generator {gen!r}")


def _check_nonneg(v, name):
    arr = check_score_vector(v, name=name)
    if np.any(arr < 0.0):
        raise DomainError(f"{name} has negative entries")
    return arr


def bregman(gen, y, y_prime):
    """Generalized Bregman divergence between y and y'.

    squared:    0.5 * ||y - y'||^2.
    negentropy: sum y_i log(y_i / y'_i) - sum (y_i - y'_i), which is +inf
                whenever y' touches the boundary (the subdifferential of the
                negentropy is empty there), reported as math.inf.
    """
    gen = _normalize_gen(gen)
    if gen == "squared":
        a = check_score_vector(y, name="y")
        b = check_score_vector(y_prime, name="y_prime")
        if a.size != b.size:
            raise DomainError("y and y_prime must have the same length")
        d = a - b
        return 0.5 * float(np.dot(d, d))
    a = _check_nonneg(y, "y")
    b = _check_nonneg(y_prime, "y_prime")
    if a.size != b.size:
        raise DomainError("y and y_prime must have the same length")
    if np.any(b == 0.0):
        return math.inf
    pos = a > 0.0
    logs = np.where(pos, a * (np.log(np.where(pos, a, 1.0)) - np.log(b)), 0.0)
    return float(logs.sum() - (a.sum() - b.sum()))


def interior_grid(k: int, resolution: int) -> np.ndarray:
    """All lattice points i/resolution of the simplex with every i >= 1.

    Strictly interior (minimum coordinate 1/resolution), ordered
    lexicographically so that first-maximum reductions are deterministic.
    """
    r = resolution
    if k == 2:
        i = np.arange(1, r, dtype=float)
        return np.column_stack([i, r - i]) / r
    if k == 3:
        pts = [
            (i, j, r - i - j)
            for i in range(1, r - 1)
            for j in range(1, r - i)
        ]
        return np.asarray(pts, dtype=float) / r
    raise UnsupportedDimensionError(f"grid oracle supports k <= 3, got k={k}")


def _psi_rows(gen, grid: np.ndarray) -> np.ndarray:
    """Generator value on each (strictly positive) grid row."""
    if gen == "squared":
        return 0.5 * np.sum(grid * grid, axis=1)
    return np.sum(grid * np.log(grid), axis=1) - gen.alpha * grid.sum(axis=1)


def _psi_point(gen, y: np.ndarray) -> float:
    """Generator value at a simplex point that may touch the boundary."""
    if gen == "squared":
        return 0.5 * float(np.dot(y, y))
    pos = y > 0.0
    ent = np.where(pos, y * np.log(np.where(pos, y, 1.0)), 0.0).sum()
    return float(ent - gen.alpha * y.sum())


def _bregman_rows(gen, y: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """D(y, row) for every grid row; rows are strictly positive."""
    if gen == "squared":
        d = y[None, :] - grid
        return 0.5 * np.sum(d * d, axis=1)
    pos = y > 0.0
    logs = np.where(
        pos[None, :],
        y[None, :] * (np.log(np.where(pos, y, 1.0))[None, :] - np.log(grid)),
        0.0,
    )
    return logs.sum(axis=1) - (y.sum() - grid.sum(axis=1))


def omega_y_conjugate_grid(gen, y, theta, config=None):
    """Conjugate of the target-shifted generator by exhaustive grid search.

    Maximizes <y', theta> - Omega(y') - D(y, y') over the strictly interior
    grid; accuracy is bounded by the grid spacing.  Returns the maximum and
    its (lexicographically first) maximizer.
    """
    gen = _normalize_gen(gen)
    cfg = config if config is not None else GridConfig()
    y = check_prob_vector(y)
    theta = check_score_vector(theta)
    if y.size != theta.size:
        raise DomainError("y and theta must have the same length")
    if y.size > cfg.k_max:
        raise UnsupportedDimensionError(
            f"grid oracle limited to k <= {cfg.k_max}, got k={y.size}"
        )
    grid = interior_grid(y.size, cfg.resolution)
    objective = grid @ theta - _psi_rows(gen, grid) - _bregman_rows(gen, y, grid)
    best = int(np.argmax(objective))
    return float(objective[best]), grid[best]


def fitz_value_via_shifted_generator(gen, y, theta, config=None):
    """Assemble the Fitzpatrick loss from the shifted-generator identity.

    L = Omega(y) + Omega_y*(theta) - <y, theta>, with the conjugate taken
    from the grid search; D(y, y) = 0 so Omega_y(y) is just Omega(y).
    """
    gen = _normalize_gen(gen)
    y = check_prob_vector(y)
    theta = check_score_vector(theta)
    value, _ = omega_y_conjugate_grid(gen, y, theta, config)
    return _psi_point(gen, y) + value - float(np.dot(y, theta))


def lower_bound_quadratic(gen, y, y_star):
    """Quadratic form <y - y*, hessian(Psi)(y*) (y - y*)>.

    squared:    ||y - y*||^2.
    negentropy: sum (y_i - y*_i)^2 / y*_i; a zero y*_i is only admissible
                when the matching y_i is also zero (the term is then 0).
    """
    gen = _normalize_gen(gen)
    if gen == "squared":
        a = check_score_vector(y, name="y")
        b = check_score_vector(y_star, name="y_star")
        if a.size != b.size:
            raise DomainError("y and y_star must have the same length")
        d = a - b
        return float(np.dot(d, d))
    a = _check_nonneg(y, "y")
    b = _check_nonneg(y_star, "y_star")
    if a.size != b.size:
        raise DomainError("y and y_star must have the same length")
    dead = b == 0.0
    if np.any(dead & (a != 0.0)):
        idx = int(np.argmax(dead & (a != 0.0)))
        raise DomainError(
            f"y_star is zero at coordinate {idx} where y is not"
        )
    d = a - b
    safe = np.where(dead, 1.0, b)
    return float(np.sum(np.where(dead, 0.0, d * d / safe)))
