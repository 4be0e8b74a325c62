"""Scalar numerical kernels.

Lambert W on the principal branch, an overflow-safe ``W(exp(x))``, a stable
log-sum-exp, guarded bisection, and central-difference gradients.  Everything
here is pure and reentrant; the array routines accept scalars or ndarrays and
preserve the input shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, EvaluationError, NoRootError

__all__ = [
    "BisectionConfig",
    "lambert_w",
    "lambert_w_exp",
    "log_sum_exp",
    "bisect",
    "finite_diff_grad",
]

# Direct evaluation of exp(x) is safe this far; beyond it we solve
# w + log w = x instead of forming exp(x).
_EXP_SAFE_MAX = 700.0


@dataclass(frozen=True)
class BisectionConfig:
    """Tolerances for the guarded bisection solver.

    ``abs_tol`` bounds the final interval width, ``residual_tol`` the
    magnitude of the function value at an early-accepted midpoint.
    """

    abs_tol: float = 1e-12
    residual_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.residual_tol > 0.0):
            raise DomainError("bisection tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")


def _halley_lambert(w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Polish an initial guess for W(z) with Halley iterations.

    Uses the standard third-order update for f(w) = w e^w - z; a handful of
    steps reach machine tolerance from the guesses used below.
    """
    for _ in range(100):
        ew = np.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w = w - dw
        if np.all(np.abs(dw) <= 1e-16 * (2.0 + np.abs(w))):
            break
    return w


def lambert_w(z):
    """Principal branch of the Lambert W function on z >= 0.

    W(z) is the inverse of w -> w * exp(w).  The initial guess is z itself
    below e and log z - log log z above; Halley's method then converges to
    machine tolerance.  Accepts scalars or arrays of any shape.
    """
    z_arr = np.asarray(z, dtype=float)
    if z_arr.size == 0:
        raise DomainError("lambert_w requires at least one value")
    if not np.all(np.isfinite(z_arr)) or np.any(z_arr < 0.0):
        raise DomainError("lambert_w is defined for finite z >= 0")
    w = z_arr.copy()
    big = z_arr >= math.e
    if np.any(big):
        lz = np.log(z_arr[big])
        # log z - log log z never exceeds W(z) here, so exp(w) cannot
        # overflow even for z near the float64 maximum.
        w[big] = lz - np.log(lz)
    w = _halley_lambert(w, z_arr)
    if np.ndim(z) == 0:
        return float(w)
    return w


def lambert_w_exp(x):
    """W(exp(x)) computed without forming exp(x), stable for any finite x.

    Up to x = 700 the argument is representable and the direct route is
    used.  Beyond that, W(e^x) is the root of w + log w = x: one fixed-point
    pass w <- x - log w from w = x - log x, then Newton steps on the
    log-domain residual.
    """
    x_arr = np.asarray(x, dtype=float)
    if x_arr.size == 0:
        raise DomainError("lambert_w_exp requires at least one value")
    if not np.all(np.isfinite(x_arr)):
        raise DomainError("lambert_w_exp is defined for finite x")
    out = np.empty_like(x_arr)
    small = x_arr <= _EXP_SAFE_MAX
    if np.any(small):
        out[small] = lambert_w(np.exp(x_arr[small]))
    if np.any(~small):
        xb = x_arr[~small]
        w = xb - np.log(xb)
        w = xb - np.log(w)
        for _ in range(50):
            g = w + np.log(w) - xb
            dw = g * w / (w + 1.0)
            w = w - dw
            if np.all(np.abs(dw) <= 1e-16 * (2.0 + np.abs(w))):
                break
        out[~small] = w
    if np.ndim(x) == 0:
        return float(out)
    return out


def log_sum_exp(theta, axis=None):
    """log(sum(exp(theta))) with the max shifted out, so it never overflows.

    With ``axis=None`` reduces a single vector to a float; an integer axis
    reduces an array along that axis.
    """
    arr = np.asarray(theta, dtype=float)
    if arr.size == 0:
        raise DomainError("log_sum_exp requires a nonempty vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError("log_sum_exp requires finite entries")
    if axis is None:
        m = float(np.max(arr))
        return m + float(np.log(np.sum(np.exp(arr - m))))
    m = np.max(arr, axis=axis, keepdims=True)
    s = np.sum(np.exp(arr - m), axis=axis, keepdims=True)
    return np.squeeze(m + np.log(s), axis=axis)


def _eval_scalar(f: Callable[[float], float], x: float) -> float:
    value = float(f(x))
    if math.isnan(value):
        raise EvaluationError(f"function returned NaN at x={x!r}")
    return value


def bisect(f, lo, hi, config=None):
    """Root of a monotone-decreasing scalar function by guarded bisection.

    Expects f(lo) >= 0 >= f(hi).  If the initial interval misses the sign
    change, one expansion pass doubles it outward at most 60 times before
    failing with NoRootError.  Returns a point x once the interval width
    drops below ``abs_tol`` or |f(x)| <= ``residual_tol``; running out of
    iterations raises ConvergenceError carrying the best iterate seen.
    """
    cfg = config if config is not None else BisectionConfig()
    lo = float(lo)
    hi = float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise DomainError(f"invalid bracket [{lo!r}, {hi!r}]")
    f_lo = _eval_scalar(f, lo)
    f_hi = _eval_scalar(f, hi)
    span = hi - lo if hi > lo else max(1.0, abs(lo))
    for _ in range(60):
        if f_lo >= 0.0 >= f_hi:
            break
        if f_lo < 0.0:
            lo -= span
            f_lo = _eval_scalar(f, lo)
        if f_hi > 0.0:
            hi += span
            f_hi = _eval_scalar(f, hi)
        span *= 2.0
    if not (f_lo >= 0.0 >= f_hi):
        raise NoRootError(
            f"no sign change in [{lo!r}, {hi!r}] after outward expansion"
        )
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    best_x, best_f = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            # the interval is down to ulps; nothing finer exists
            return mid
        f_mid = _eval_scalar(f, mid)
        if abs(f_mid) < abs(best_f):
            best_x, best_f = mid, f_mid
        if abs(f_mid) <= cfg.residual_tol:
            return mid
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < cfg.abs_tol:
            return 0.5 * (lo + hi)
    raise ConvergenceError(
        f"bisection did not converge in {cfg.max_iter} iterations "
        f"(best residual {best_f!r} at {best_x!r})",
        best=best_x,
    )


def finite_diff_grad(f, theta, h=1e-6):
    """Central-difference gradient of a vector-to-scalar function.

    Probes f at theta +/- h e_i per coordinate; a non-finite probe raises
    EvaluationError naming the offending coordinate.
    """
    arr = np.asarray(theta, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("theta must be a nonempty 1-d vector")
    if not h > 0.0:
        raise DomainError("step size h must be positive")
    grad = np.empty_like(arr)
    for i in range(arr.size):
        probe = arr.copy()
        probe[i] = arr[i] + h
        f_plus = float(f(probe))
        probe[i] = arr[i] - h
        f_minus = float(f(probe))
        if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
            raise EvaluationError(
                f"non-finite probe value at coordinate {i}"
            )
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    return grad
