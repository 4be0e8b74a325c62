"""Link functions over the probability simplex.

Euclidean projection, softargmax, and the vertex argmax, plus the validators
that define what counts as a probability vector throughout the package.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = [
    "ZERO_SNAP",
    "check_score_vector",
    "check_prob_vector",
    "project_simplex",
    "softargmax",
    "argmax_vertex",
]

# Entries below this magnitude are treated as exact zeros when a vector is
# canonicalized onto the simplex.  The piecewise formulas downstream split on
# y_i == 0, so a crisp rule beats a fuzzy threshold.
ZERO_SNAP = 1e-12

_SUM_TOL = 1e-9


def check_score_vector(theta, name="theta"):
    """Return theta as a finite 1-d float array, or raise DomainError."""
    arr = np.asarray(theta, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name} must be a nonempty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must have finite entries")
    return arr


def check_prob_vector(y, name="y"):
    """Validate and canonicalize a point of the probability simplex.

    Requires nonnegative entries summing to 1 within 1e-9.  Entries with
    magnitude below ZERO_SNAP are snapped to exact zeros in the returned
    copy.
    """
    arr = check_score_vector(y, name=name)
    if np.any(arr < -ZERO_SNAP):
        raise DomainError(f"{name} has negative entries")
    total = float(arr.sum())
    if abs(total - 1.0) > _SUM_TOL:
        raise DomainError(f"{name} must sum to 1, got {total!r}")
    out = arr.copy()
    out[np.abs(out) < ZERO_SNAP] = 0.0
    return out


def _project_rows(scores: np.ndarray) -> np.ndarray:
    """Sort-then-threshold projection of each row onto the simplex."""
    n, k = scores.shape
    u = np.sort(scores, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, k + 1, dtype=float)
    # u_j - css_j / j > 0, written multiplicatively since j > 0
    rho = np.count_nonzero(u * ind > css, axis=1)
    tau = css[np.arange(n), rho - 1] / rho
    out = np.maximum(scores - tau[:, None], 0.0)
    out[out < ZERO_SNAP] = 0.0
    return out


def project_simplex(z, axis=None):
    """Euclidean projection onto the probability simplex.

    Deterministic O(k log k) rule: y_i = max(z_i - tau, 0) with tau chosen
    so the result sums to one.  ``axis=None`` projects a single vector,
    ``axis=1`` each row of a matrix.
    """
    if axis == 1:
        arr = np.asarray(z, dtype=float)
        if arr.ndim != 2 or arr.shape[1] == 0:
            raise DomainError("z must be a matrix with at least one column")
        if not np.all(np.isfinite(arr)):
            raise DomainError("z must have finite entries")
        return _project_rows(arr)
    if axis is not None:
        raise DomainError("axis must be None or 1")
    arr = check_score_vector(z, name="z")
    return _project_rows(arr[None, :])[0]


def softargmax(theta, axis=None):
    """Exponentiate-and-normalize link, computed with the max shifted out.

    Output entries are strictly positive for any input whose spread stays
    within float64 exp range, and sum to 1 up to roundoff.
    """
    if axis == 1:
        arr = np.asarray(theta, dtype=float)
        if arr.ndim != 2 or arr.shape[1] == 0:
            raise DomainError("theta must be a matrix with at least one column")
        if not np.all(np.isfinite(arr)):
            raise DomainError("theta must have finite entries")
        e = np.exp(arr - arr.max(axis=1, keepdims=True))
        return e / e.sum(axis=1, keepdims=True)
    if axis is not None:
        raise DomainError("axis must be None or 1")
    arr = check_score_vector(theta)
    e = np.exp(arr - arr.max())
    return e / e.sum()


def argmax_vertex(theta):
    """Simplex vertex e_i maximizing <e_i, theta>; ties go to the lowest index."""
    arr = check_score_vector(theta)
    out = np.zeros_like(arr)
    out[int(np.argmax(arr))] = 1.0
    return out
