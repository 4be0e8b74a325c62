"""Generalized linear model training.

Minimizes sum_i L(y_i, W x_i) + lam/2 ||W||_F^2 over the weight matrix W by
limited-memory BFGS with a strong-Wolfe line search, starting from W = 0.
The objective is convex for every supported loss, so the start point only
affects the iteration count.  There is no intercept term and lam multiplies
the unnormalized sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    EvaluationError,
    LineSearchError,
    SolverError,
)
from .losses import Generator, LossSpec, batch_loss, link
from .simplex import project_simplex, softargmax

__all__ = [
    "TrainConfig",
    "TrainResult",
    "objective",
    "lbfgs_minimize",
    "predict",
    "predict_batch",
    "mse",
    "write_weights",
    "read_weights",
]

_WOLFE_C1 = 1e-4
_WOLFE_C2 = 0.9


@dataclass(frozen=True)
class TrainConfig:
    """Loss choice, ridge strength and optimizer settings for one fit."""

    loss: LossSpec
    lam: float
    lbfgs_memory: int = 10
    grad_tol: float = 1e-6  # relative to the gradient norm at W = 0
    max_iter: int = 500
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.loss, str):
            object.__setattr__(self, "loss", LossSpec.parse(self.loss))
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise DomainError("lam must be a positive real")
        if self.lbfgs_memory < 1:
            raise DomainError("lbfgs_memory must be at least 1")
        if not self.grad_tol > 0.0:
            raise DomainError("grad_tol must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")


@dataclass
class TrainResult:
    """Weights plus the optimizer trace and termination diagnostics."""

    weights: np.ndarray
    trace: list[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    grad_norm: float = math.inf
    initial_grad_norm: float = math.inf


def objective(weights, features, labels, config):
    """Value and gradient of the regularized empirical risk.

    grad = sum_i dL/dtheta(y_i, W x_i) x_i^T + lam W; per-sample terms are
    accumulated by a single matrix product, so the order is fixed and the
    result is bit-deterministic for fixed inputs.
    """
    w = np.asarray(weights, dtype=float)
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if w.ndim != 2:
        raise DimensionError("weights must be a k x d matrix")
    if x.ndim != 2 or y.ndim != 2:
        raise DimensionError("features and labels must be matrices")
    if x.shape[0] != y.shape[0]:
        raise DimensionError("features and labels disagree on sample count")
    k, d = w.shape
    if x.shape[1] != d or y.shape[1] != k:
        raise DimensionError(
            f"weights {w.shape} incompatible with features "
            f"{x.shape} and labels {y.shape}"
        )
    if not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite")
    theta = x @ w.T
    try:
        values, grads = batch_loss(config.loss, y, theta)
    except SolverError as exc:
        raise EvaluationError(f"loss solve failed: {exc}") from exc
    if values.size and not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        raise EvaluationError(f"non-finite loss at sample {bad}")
    if grads.size and not np.all(np.isfinite(grads)):
        bad = int(np.argmax(~np.isfinite(grads).all(axis=1)))
        raise EvaluationError(f"non-finite loss gradient at sample {bad}")
    value = float(values.sum()) + 0.5 * config.lam * float(np.sum(w * w))
    grad = grads.T @ x + config.lam * w
    return value, grad


def _two_loop(memory, grad):
    """L-BFGS two-loop recursion for the search direction -H g."""
    q = grad.copy()
    alphas = []
    for s, y, rho in reversed(memory):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    if memory:
        s, y, _ = memory[-1]
        q *= float(np.dot(s, y)) / float(np.dot(y, y))
    for (s, y, rho), a in zip(memory, reversed(alphas)):
        b = rho * float(np.dot(y, q))
        q += (a - b) * s
    return q


def _zoom(fg_line, a_lo, a_hi, phi_lo, dphi_lo, phi_hi, phi0, dphi0):
    """Shrink a bracketing interval until the strong Wolfe conditions hold.

    Quadratic interpolation with a bisection fallback; returns
    (alpha, phi, dphi, state) or None when the interval collapses.
    """
    for _ in range(50):
        width = a_hi - a_lo
        denom = 2.0 * (phi_hi - phi_lo - dphi_lo * width)
        a_j = a_lo + 0.5 * width
        if denom > 0.0:
            trial = a_lo - dphi_lo * width * width / denom
            lo, hi = (a_lo, a_hi) if width > 0 else (a_hi, a_lo)
            margin = 0.1 * abs(width)
            if lo + margin <= trial <= hi - margin:
                a_j = trial
        phi_j, dphi_j, state = fg_line(a_j)
        if phi_j > phi0 + _WOLFE_C1 * a_j * dphi0 or phi_j >= phi_lo:
            a_hi, phi_hi = a_j, phi_j
        else:
            if abs(dphi_j) <= -_WOLFE_C2 * dphi0:
                return a_j, phi_j, dphi_j, state
            if dphi_j * (a_hi - a_lo) >= 0.0:
                a_hi, phi_hi = a_lo, phi_lo
            a_lo, phi_lo, dphi_lo = a_j, phi_j, dphi_j
        if abs(a_hi - a_lo) <= 1e-14 * max(1.0, abs(a_lo)):
            return None
    return None


def _wolfe_search(fg_line, phi0, dphi0, alpha1):
    """Bracketing phase of the strong-Wolfe search (then zoom)."""
    a_prev, phi_prev, dphi_prev = 0.0, phi0, dphi0
    alpha = alpha1
    for it in range(30):
        phi_a, dphi_a, state = fg_line(alpha)
        if phi_a > phi0 + _WOLFE_C1 * alpha * dphi0 or (
            it > 0 and phi_a >= phi_prev
        ):
            return _zoom(
                fg_line, a_prev, alpha, phi_prev, dphi_prev, phi_a, phi0, dphi0
            )
        if abs(dphi_a) <= -_WOLFE_C2 * dphi0:
            return alpha, phi_a, dphi_a, state
        if dphi_a >= 0.0:
            return _zoom(
                fg_line, alpha, a_prev, phi_a, dphi_a, phi_prev, phi0, dphi0
            )
        a_prev, phi_prev, dphi_prev = alpha, phi_a, dphi_a
        alpha *= 2.0
    return None


def lbfgs_minimize(features, labels, config):
    """Minimize the training objective from W = 0.

    Two-loop L-BFGS with memory ``config.lbfgs_memory`` and a strong-Wolfe
    line search (c1 = 1e-4, c2 = 0.9).  Terminates when the gradient norm
    falls below ``grad_tol`` relative to its value at W = 0, or after
    ``max_iter`` iterations; a failed line search raises LineSearchError
    carrying the best iterate.  The returned trace holds the objective at
    every accepted iterate and is nonincreasing.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    k = y.shape[1]
    d = x.shape[1]

    def fg(flat):
        value, grad = objective(flat.reshape(k, d), x, y, config)
        if not math.isfinite(value):
            raise EvaluationError("objective is non-finite")
        return value, grad.ravel()

    w = np.zeros(k * d)
    f, g = fg(w)
    gnorm0 = float(np.linalg.norm(g))
    result = TrainResult(
        weights=w.reshape(k, d).copy(),
        trace=[f],
        grad_norm=gnorm0,
        initial_grad_norm=gnorm0,
    )
    if gnorm0 == 0.0:
        result.converged = True
        return result
    memory: list[tuple[np.ndarray, np.ndarray, float]] = []
    f_prev_accept = None
    for it in range(config.max_iter):
        gnorm = float(np.linalg.norm(g))
        result.grad_norm = gnorm
        if gnorm <= config.grad_tol * gnorm0:
            result.converged = True
            break
        direction = -_two_loop(memory, g)
        dphi0 = float(np.dot(direction, g))
        if dphi0 >= 0.0:
            # curvature information went stale; fall back to steepest descent
            memory.clear()
            direction = -g
            dphi0 = -gnorm * gnorm

        cache = {}

        def fg_line(alpha):
            value, grad_flat = fg(w + alpha * direction)
            cache[alpha] = (value, grad_flat)
            return value, float(np.dot(grad_flat, direction)), alpha

        if f_prev_accept is not None and dphi0 != 0.0:
            alpha1 = min(1.0, 1.01 * 2.0 * (f - f_prev_accept) / dphi0)
            if alpha1 <= 0.0:
                alpha1 = 1.0
        else:
            alpha1 = min(1.0, 1.0 / max(1.0, gnorm))
        hit = _wolfe_search(fg_line, f, dphi0, alpha1)
        if hit is None:
            result.iterations = it
            raise LineSearchError(
                f"line search failed at iteration {it} "
                f"(gradient norm {gnorm:.3e}, relative "
                f"{gnorm / gnorm0:.3e})",
                best=result,
            )
        alpha, f_new, _, state = hit
        f_new, g_new = cache[state]
        step = alpha * direction
        y_diff = g_new - g
        sy = float(np.dot(step, y_diff))
        if sy > 1e-10 * float(np.linalg.norm(step)) * float(
            np.linalg.norm(y_diff)
        ):
            memory.append((step, y_diff, 1.0 / sy))
            if len(memory) > config.lbfgs_memory:
                memory.pop(0)
        w = w + step
        f_prev_accept, f, g = f, f_new, g_new
        result.trace.append(f)
        result.iterations = it + 1
        result.weights = w.reshape(k, d).copy()
    result.grad_norm = float(np.linalg.norm(g))
    if result.grad_norm <= config.grad_tol * gnorm0:
        result.converged = True
    return result


def predict(weights, x, loss):
    """Prediction link applied to W x.

    The family half of the spec is ignored: a Fitzpatrick loss and its
    Fenchel-Young sibling share a link.  The squared generator uses the
    identity link, so its output is an unconstrained score vector rather
    than a simplex point.
    """
    spec = loss if isinstance(loss, LossSpec) else LossSpec.parse(loss)
    w = np.asarray(weights, dtype=float)
    vec = np.asarray(x, dtype=float)
    if w.ndim != 2 or vec.ndim != 1 or w.shape[1] != vec.size:
        raise DimensionError(
            f"weights {w.shape} incompatible with input of length {vec.size}"
        )
    return link(spec.generator, w @ vec)


def predict_batch(weights, features, loss):
    """Row-wise :func:`predict` over a feature matrix."""
    spec = loss if isinstance(loss, LossSpec) else LossSpec.parse(loss)
    w = np.asarray(weights, dtype=float)
    x = np.asarray(features, dtype=float)
    if w.ndim != 2 or x.ndim != 2 or x.shape[1] != w.shape[1]:
        raise DimensionError(
            f"weights {w.shape} incompatible with features {x.shape}"
        )
    theta = x @ w.T
    gen = spec.generator
    if gen is Generator.SQUARED:
        return theta
    if gen is Generator.PERCEPTRON_SIMPLEX:
        out = np.zeros_like(theta)
        out[np.arange(theta.shape[0]), theta.argmax(axis=1)] = 1.0
        return out
    if gen is Generator.SPARSEMAX:
        return project_simplex(theta, axis=1)
    return softargmax(theta, axis=1)


def mse(predictions, targets):
    """Mean over samples of the squared Euclidean residual norm."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if p.ndim == 1:
        p = p[None, :]
    if t.ndim == 1:
        t = t[None, :]
    if p.shape != t.shape:
        raise DimensionError(
            f"predictions {p.shape} and targets {t.shape} do not match"
        )
    if p.shape[0] == 0:
        raise DomainError("mse of an empty sequence is undefined")
    d = p - t
    return float(np.mean(np.sum(d * d, axis=1)))


def write_weights(path, weights, loss, lam, seed):
    """Persist a weight matrix as text.

    First line: ``k d loss lambda seed``; then k rows of d reals using the
    shortest round-tripping decimal form, so identical matrices produce
    byte-identical files.
    """
    spec = loss if isinstance(loss, LossSpec) else LossSpec.parse(loss)
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise DimensionError("weights must be a k x d matrix")
    k, d = w.shape
    lines = [f"{k} {d} {spec.name} {float(lam)!r} {seed}"]
    for row in w:
        lines.append(" ".join(repr(float(v)) for v in row))
    with open(path, "w", encoding="ascii") as handle:
        handle.write("\n".join(lines) + "\n")


def read_weights(path):
    """Inverse of :func:`write_weights`.

    Returns (weights, loss_spec, lam, seed).
    """
    with open(path, "r", encoding="ascii") as handle:
        lines = [line.rstrip("\n") for line in handle]
    if not lines:
        raise DomainError(f"{path}: empty weight file")
    head = lines[0].split()
    if len(head) != 5:
        raise DomainError(f"{path}: malformed header {lines[0]!r}")
    k, d = int(head[0]), int(head[1])
    spec = LossSpec.parse(head[2])
    lam = float(head[3])
    seed = int(head[4])
    rows = [line for line in lines[1:] if line.strip()]
    if len(rows) != k:
        raise DomainError(f"{path}: expected {k} rows, found {len(rows)}")
    w = np.array([[float(v) for v in row.split()] for row in rows])
    if w.shape != (k, d):
        raise DomainError(f"{path}: expected a {k} x {d} matrix")
    return w, spec, lam, seed
