"""Fenchel-Young and Fitzpatrick losses with a uniform interface.

Each loss is generated by a convex function Omega; the Fenchel-Young member
is Omega(y) + Omega*(theta) - <y, theta>, the Fitzpatrick member replaces
the separable sum by the Fitzpatrick function of the subdifferential of
Omega.  Both vanish exactly when y is the link of theta, and the Fitzpatrick
value never exceeds the Fenchel-Young one.  Four generators are supported:

==================  =========================  ====================
generator           Omega                      link
==================  =========================  ====================
squared             0.5 ||y||^2 on R^k         identity
perceptron_simplex  indicator of the simplex   vertex argmax
sparsemax           0.5 ||y||^2 on the simplex Euclidean projection
logistic            <y, log y> on the simplex  softargmax
==================  =========================  ====================

The Fitzpatrick-logistic maximizer requires a one-dimensional root solve
involving the Lambert W function; everything else is in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    InfeasibleTargetError,
    NoRootError,
    SolverError,
)
from .numeric import BisectionConfig, bisect, lambert_w_exp, log_sum_exp
from .simplex import (
    argmax_vertex,
    check_prob_vector,
    check_score_vector,
    project_simplex,
    softargmax,
)

__all__ = [
    "Generator",
    "Family",
    "LossSpec",
    "FitzSolveResult",
    "SIMPLEX_GENERATORS",
    "link",
    "fy_value",
    "fy_grad",
    "fitz_squared",
    "fitz_perceptron",
    "fitz_sparsemax",
    "sparsemax_conjugate_value",
    "fitz_logistic_solve",
    "fitz_logistic",
    "fitz_value",
    "fitz_grad",
    "loss_value",
    "loss_grad",
    "maximizer",
    "evaluate",
    "EvalRecord",
    "batch_loss",
    "loss_curve",
]


class Generator(str, Enum):
    SQUARED = "squared"
    PERCEPTRON_SIMPLEX = "perceptron_simplex"
    SPARSEMAX = "sparsemax"
    LOGISTIC = "logistic"


class Family(str, Enum):
    FENCHEL_YOUNG = "fenchel_young"
    FITZPATRICK = "fitzpatrick"


SIMPLEX_GENERATORS = frozenset(
    {Generator.PERCEPTRON_SIMPLEX, Generator.SPARSEMAX, Generator.LOGISTIC}
)

_GENERATOR_ALIASES = {
    "squared": Generator.SQUARED,
    "perceptron": Generator.PERCEPTRON_SIMPLEX,
    "perceptron_simplex": Generator.PERCEPTRON_SIMPLEX,
    "perceptron-simplex": Generator.PERCEPTRON_SIMPLEX,
    "sparsemax": Generator.SPARSEMAX,
    "logistic": Generator.LOGISTIC,
}

_SHORT_NAMES = {
    Generator.SQUARED: "squared",
    Generator.PERCEPTRON_SIMPLEX: "perceptron",
    Generator.SPARSEMAX: "sparsemax",
    Generator.LOGISTIC: "logistic",
}


@dataclass(frozen=True)
class LossSpec:
    """Selects a generator Omega and a loss family."""

    generator: Generator
    family: Family = Family.FENCHEL_YOUNG

    def __post_init__(self):
        gen = self.generator
        if isinstance(gen, str):
            gen = _GENERATOR_ALIASES.get(gen, gen)
        object.__setattr__(self, "generator", Generator(gen))
        object.__setattr__(self, "family", Family(self.family))

    @classmethod
    def parse(cls, text: str) -> "LossSpec":
        """Parse names like ``logistic`` or ``fitzpatrick-sparsemax``."""
        token = str(text).strip().lower()
        family = Family.FENCHEL_YOUNG
        if token.startswith("fitzpatrick-"):
            family = Family.FITZPATRICK
            token = token[len("fitzpatrick-"):]
        gen = _GENERATOR_ALIASES.get(token)
        if gen is None:
            raise DomainError(f"unknown loss name {text!r}")
        return cls(gen, family)

    @property
    def name(self) -> str:
        base = _SHORT_NAMES[self.generator]
        if self.family is Family.FITZPATRICK:
            return f"fitzpatrick-{base}"
        return base

    def sibling(self) -> "LossSpec":
        """The loss with the same generator in the other family."""
        other = (
            Family.FITZPATRICK
            if self.family is Family.FENCHEL_YOUNG
            else Family.FENCHEL_YOUNG
        )
        return LossSpec(self.generator, other)


@dataclass(frozen=True)
class FitzSolveResult:
    """Outcome of the Fitzpatrick-logistic root solve.

    ``lambda_star`` is the dual variable of the simplex constraint,
    ``y_star`` the maximizer it induces, ``residual`` the magnitude of the
    root equation at the solution (equivalently |sum(y_star) - 1|), and
    ``bracket`` the proved interval the root was searched in.
    """

    lambda_star: float
    y_star: np.ndarray
    residual: float
    iterations: int
    bracket: tuple[float, float]


def _as_spec(spec, family: Family | None = None) -> LossSpec:
    if isinstance(spec, str):
        spec = LossSpec.parse(spec)
    if not isinstance(spec, LossSpec):
        raise DomainError(f"expected a LossSpec, got {type(spec).__name__}")
    if family is not None and spec.family is not family:
        raise DomainError(
            f"expected a {family.value} spec, got {spec.family.value}"
        )
    return spec


def _check_pair(generator: Generator, y, theta):
    """Validate a (target, score) pair for the given generator."""
    theta_arr = check_score_vector(theta)
    if generator is Generator.SQUARED:
        y_arr = check_score_vector(y, name="y")
    else:
        try:
            y_arr = check_prob_vector(y)
        except DomainError as exc:
            raise InfeasibleTargetError(str(exc)) from exc
    if y_arr.size != theta_arr.size:
        raise DimensionError(
            f"y has {y_arr.size} entries but theta has {theta_arr.size}"
        )
    return y_arr, theta_arr


def link(generator, theta):
    """Prediction link of a generator: the (sub)gradient of its conjugate."""
    gen = Generator(generator)
    theta = check_score_vector(theta)
    if gen is Generator.SQUARED:
        return theta.copy()
    if gen is Generator.PERCEPTRON_SIMPLEX:
        return argmax_vertex(theta)
    if gen is Generator.SPARSEMAX:
        return project_simplex(theta)
    return softargmax(theta)


def _entropy_term(y: np.ndarray) -> float:
    """<y, log y> with the 0 log 0 = 0 convention."""
    pos = y > 0.0
    safe = np.where(pos, y, 1.0)
    return float(np.sum(np.where(pos, y * np.log(safe), 0.0)))


def fy_value(spec, y, theta):
    """Fenchel-Young loss Omega(y) + Omega*(theta) - <y, theta>.

    Closed forms per generator::

        squared     0.5 * ||y - theta||^2                 (y unconstrained)
        perceptron  max_i theta_i - <y, theta>
        sparsemax   0.5||y||^2 + <p, theta> - 0.5||p||^2 - <y, theta>,
                    p = project_simplex(theta)
        logistic    logsumexp(theta) + <y, log y> - <y, theta>

    Nonnegative by construction; roundoff at the minimum is clamped to 0.
    """
    spec = _as_spec(spec, Family.FENCHEL_YOUNG)
    y, theta = _check_pair(spec.generator, y, theta)
    gen = spec.generator
    if gen is Generator.SQUARED:
        diff = y - theta
        value = 0.5 * float(np.dot(diff, diff))
    elif gen is Generator.PERCEPTRON_SIMPLEX:
        value = float(np.max(theta)) - float(np.dot(y, theta))
    elif gen is Generator.SPARSEMAX:
        p = project_simplex(theta)
        conjugate = float(np.dot(p, theta)) - 0.5 * float(np.dot(p, p))
        value = 0.5 * float(np.dot(y, y)) + conjugate - float(np.dot(y, theta))
    else:
        value = log_sum_exp(theta) + _entropy_term(y) - float(np.dot(y, theta))
    return max(value, 0.0)


def fy_grad(spec, y, theta):
    """Gradient of the Fenchel-Young loss in theta: link(theta) - y."""
    spec = _as_spec(spec, Family.FENCHEL_YOUNG)
    y, theta = _check_pair(spec.generator, y, theta)
    return link(spec.generator, theta) - y


def fitz_squared(y, theta):
    """Fitzpatrick loss of the squared generator on all of R^k.

    Returns (0.25 * ||y - theta||^2, (y + theta) / 2); the value is exactly
    half the Fenchel-Young squared loss.
    """
    y = check_score_vector(y, name="y")
    theta = check_score_vector(theta)
    if y.size != theta.size:
        raise DimensionError("y and theta must have the same length")
    diff = y - theta
    # 0.5 * (0.5 * s): both halvings are exact, so the factor-of-two
    # relation to the Fenchel-Young value holds bitwise.
    value = 0.5 * (0.5 * float(np.dot(diff, diff)))
    return value, 0.5 * (y + theta)


def fitz_perceptron(y, theta):
    """Fitzpatrick loss of the simplex indicator; coincides with the
    perceptron loss exactly.  The maximizer is the argmax vertex."""
    y, theta = _check_pair(Generator.PERCEPTRON_SIMPLEX, y, theta)
    value = float(np.max(theta)) - float(np.dot(y, theta))
    return max(value, 0.0), argmax_vertex(theta)


def fitz_sparsemax(y, theta):
    """Fitzpatrick counterpart of the sparsemax loss.

    The maximizer is the projected midpoint y* = P((y + theta)/2) and the
    value is the inner product <y* - y, theta - y*>.
    """
    y, theta = _check_pair(Generator.SPARSEMAX, y, theta)
    y_star = project_simplex(0.5 * (y + theta))
    value = float(np.dot(y_star - y, theta - y_star))
    return max(value, 0.0), y_star


def sparsemax_conjugate_value(y, theta):
    """The same loss via the conjugate form 2 Omega*((y+theta)/2) - <y, theta>.

    Algebraically equal to the inner-product form of :func:`fitz_sparsemax`;
    kept separate so the two routes can be checked against each other.
    """
    y, theta = _check_pair(Generator.SPARSEMAX, y, theta)
    mid = 0.5 * (y + theta)
    p = project_simplex(mid)
    omega_star = float(np.dot(p, mid)) - 0.5 * float(np.dot(p, p))
    return max(2.0 * omega_star - float(np.dot(y, theta)), 0.0)


def _logistic_parts(y, theta, cfg):
    """Shared machinery of the Fitzpatrick-logistic solve.

    Solves, for lambda,

        exp(-lambda) * sum_{i: y_i = 0} exp(theta_i)
          + sum_{i: y_i > 0} y_i / W(y_i exp(lambda - theta_i)) = 1,

    which is monotone decreasing in lambda, inside the proved bracket

        lo = log sum_i exp(theta_i)
        hi = log 2 + max(log sum_{i: y_i = 0} exp(theta_i),
                         log m + max_{i: y_i > 0} (theta_i + 2 m y_i)),

    with m the support size of y.  Lambert arguments are passed in the log
    domain so nothing overflows.  Returns lambda, y_star, log(y_star) taken
    from the solve itself, the residual, the evaluation count, and the
    bracket.
    """
    zero = y == 0.0
    pos = ~zero
    support = int(np.count_nonzero(pos))
    theta_pos = theta[pos]
    y_pos = y[pos]
    log_y_pos = np.log(y_pos)
    lse_zero = log_sum_exp(theta[zero]) if zero.any() else -math.inf
    lo = log_sum_exp(theta)
    hi = math.log(2.0) + max(
        lse_zero,
        math.log(support) + float(np.max(theta_pos + 2.0 * support * y_pos)),
    )
    evals = [0]

    def root_fn(lam):
        evals[0] += 1
        total = 0.0
        if support < y.size:
            total += math.exp(lse_zero - lam)
        w = lambert_w_exp(log_y_pos + lam - theta_pos)
        total += float(np.sum(y_pos / w))
        return total - 1.0

    try:
        lam = bisect(root_fn, lo, hi, cfg)
    except NoRootError as exc:
        raise SolverError(
            f"root bracket [{lo!r}, {hi!r}] failed; this should be impossible"
        ) from exc
    if not lo <= lam <= hi:
        raise SolverError(f"root {lam!r} escaped the bracket [{lo!r}, {hi!r}]")
    w_full = np.zeros_like(y)
    w_full[pos] = lambert_w_exp(log_y_pos + lam - theta_pos)
    y_star = np.empty_like(y)
    y_star[pos] = y_pos / w_full[pos]
    y_star[zero] = np.exp(theta[zero] - lam)
    # log W(e^x) = x - W(e^x), hence log y*_i = theta_i - lambda + W_i with
    # W_i = 0 on the zero set; no log of an assembled y* is ever taken.
    log_y_star = theta - lam + w_full
    # The root equation literally states sum(y_star) = 1.
    residual = abs(float(y_star.sum()) - 1.0)
    return lam, y_star, log_y_star, residual, evals[0], (lo, hi)


def fitz_logistic_solve(y, theta, config=None):
    """Solve for the Fitzpatrick-logistic maximizer y*(y, theta).

    y* has components exp(theta_i - lambda*) where y_i = 0 and
    y_i / W(y_i exp(lambda* - theta_i)) where y_i > 0, with lambda* the root
    described in :func:`_logistic_parts`.  Returns a :class:`FitzSolveResult`.
    """
    cfg = config if config is not None else BisectionConfig()
    y, theta = _check_pair(Generator.LOGISTIC, y, theta)
    lam, y_star, _, residual, evals, bracket = _logistic_parts(y, theta, cfg)
    return FitzSolveResult(lam, y_star, residual, evals, bracket)


def fitz_logistic(y, theta, config=None):
    """Fitzpatrick counterpart of the logistic loss.

    value = <y* - y, theta - log y* - 1> with both y* and log y* taken from
    the root solve; the log factors come out of the solve directly, avoiding
    cancellation for tiny components.
    """
    cfg = config if config is not None else BisectionConfig()
    y, theta = _check_pair(Generator.LOGISTIC, y, theta)
    _, y_star, log_y_star, _, _, _ = _logistic_parts(y, theta, cfg)
    value = float(np.dot(y_star - y, theta - log_y_star - 1.0))
    return max(value, 0.0), y_star


def _fitz_value_and_star(generator: Generator, y, theta, cfg):
    if generator is Generator.SQUARED:
        return fitz_squared(y, theta)
    if generator is Generator.PERCEPTRON_SIMPLEX:
        return fitz_perceptron(y, theta)
    if generator is Generator.SPARSEMAX:
        return fitz_sparsemax(y, theta)
    return fitz_logistic(y, theta, cfg)


def fitz_value(spec, y, theta, config=None):
    """Fitzpatrick loss value for any generator."""
    spec = _as_spec(spec, Family.FITZPATRICK)
    return _fitz_value_and_star(spec.generator, y, theta, config)[0]


def fitz_grad(spec, y, theta, config=None):
    """Gradient of the Fitzpatrick loss in theta: y*(y, theta) - y."""
    spec = _as_spec(spec, Family.FITZPATRICK)
    y_arr, theta_arr = _check_pair(spec.generator, y, theta)
    _, y_star = _fitz_value_and_star(spec.generator, y_arr, theta_arr, config)
    return y_star - y_arr


def loss_value(spec, y, theta, config=None):
    """Value of either family for a given spec."""
    spec = _as_spec(spec)
    if spec.family is Family.FENCHEL_YOUNG:
        return fy_value(spec, y, theta)
    return fitz_value(spec, y, theta, config)


def loss_grad(spec, y, theta, config=None):
    """Gradient in theta of either family for a given spec."""
    spec = _as_spec(spec)
    if spec.family is Family.FENCHEL_YOUNG:
        return fy_grad(spec, y, theta)
    return fitz_grad(spec, y, theta, config)


def maximizer(spec, y, theta, config=None):
    """The point where the loss gradient is anchored.

    For Fenchel-Young losses this is the link of theta; for Fitzpatrick
    losses it is the target-dependent maximizer y*(y, theta).
    """
    spec = _as_spec(spec)
    y_arr, theta_arr = _check_pair(spec.generator, y, theta)
    if spec.family is Family.FENCHEL_YOUNG:
        return link(spec.generator, theta_arr)
    _, y_star = _fitz_value_and_star(spec.generator, y_arr, theta_arr, config)
    return y_star


@dataclass(frozen=True)
class EvalRecord:
    """One full loss evaluation: value, gradient, link and maximizer."""

    spec: LossSpec
    value: float
    grad: np.ndarray
    link: np.ndarray
    y_star: np.ndarray
    lambda_star: float | None = None
    residual: float | None = None
    solve_iterations: int | None = None


def evaluate(spec, y, theta, config=None):
    """Evaluate a loss once, returning everything a caller might print."""
    spec = _as_spec(spec)
    y_arr, theta_arr = _check_pair(spec.generator, y, theta)
    lam = resid = iters = None
    if spec.family is Family.FENCHEL_YOUNG:
        value = fy_value(spec, y_arr, theta_arr)
        y_star = link(spec.generator, theta_arr)
    elif spec.generator is Generator.LOGISTIC:
        cfg = config if config is not None else BisectionConfig()
        lam, y_star, log_y_star, resid, iters, _ = _logistic_parts(
            y_arr, theta_arr, cfg
        )
        value = max(
            float(np.dot(y_star - y_arr, theta_arr - log_y_star - 1.0)), 0.0
        )
    else:
        value, y_star = _fitz_value_and_star(
            spec.generator, y_arr, theta_arr, config
        )
    return EvalRecord(
        spec=spec,
        value=value,
        grad=y_star - y_arr,
        link=link(spec.generator, theta_arr),
        y_star=y_star,
        lambda_star=lam,
        residual=resid,
        solve_iterations=iters,
    )


# ---------------------------------------------------------------------------
# Batched evaluation.  Row i of Y and Theta form one (y, theta) pair; these
# paths exist for training speed and must agree with the scalar operations
# (covered by tests).
# ---------------------------------------------------------------------------


def _masked_lse_rows(theta: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise logsumexp over masked entries; -inf for empty rows."""
    any_row = mask.any(axis=1)
    shifted_max = np.where(
        any_row, np.max(np.where(mask, theta, -np.inf), axis=1), 0.0
    )
    e = np.exp(np.where(mask, theta - shifted_max[:, None], -np.inf))
    s = e.sum(axis=1)
    return np.where(
        any_row, shifted_max + np.log(np.where(any_row, s, 1.0)), -np.inf
    )


def _batch_logistic_solve(Y, Theta, cfg):
    """Vectorized bisection for the Fitzpatrick-logistic root, one per row."""
    n, k = Y.shape
    zero = Y == 0.0
    pos = ~zero
    support = pos.sum(axis=1).astype(float)
    if np.any(support == 0):
        bad = int(np.argmax(support == 0))
        raise SolverError(f"row {bad} has empty support")
    log_y = np.where(pos, np.log(np.where(pos, Y, 1.0)), 0.0)
    lse_zero = _masked_lse_rows(Theta, zero)
    lo = log_sum_exp(Theta, axis=1)
    t_support = np.log(support) + np.max(
        np.where(pos, Theta + 2.0 * support[:, None] * Y, -np.inf), axis=1
    )
    hi = math.log(2.0) + np.maximum(lse_zero, t_support)

    def residual_rows(lam):
        zero_term = np.exp(lse_zero - lam)
        x = np.where(pos, log_y + lam[:, None] - Theta, 0.0)
        w = lambert_w_exp(x)
        pos_term = np.where(pos, Y / w, 0.0).sum(axis=1)
        return zero_term + pos_term - 1.0

    f_lo = residual_rows(lo)
    f_hi = residual_rows(hi)
    if np.any(f_lo < 0.0) or np.any(f_hi > 0.0):
        bad = int(np.argmax((f_lo < 0.0) | (f_hi > 0.0)))
        raise SolverError(f"root bracket failed for row {bad}")
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        above = residual_rows(mid) > 0.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo < cfg.abs_tol):
            break
    lam = 0.5 * (lo + hi)
    x = np.where(pos, log_y + lam[:, None] - Theta, 0.0)
    w = np.where(pos, lambert_w_exp(x), 0.0)
    y_star = np.where(pos, Y / np.where(pos, w, 1.0), np.exp(Theta - lam[:, None]))
    log_y_star = Theta - lam[:, None] + w
    return lam, y_star, log_y_star


def batch_loss(spec, Y, Theta, config=None):
    """Loss values and gradients for n (y, theta) pairs stacked as rows.

    Returns ``(values, grads)`` with shapes (n,) and (n, k).  Row semantics
    match the scalar operations exactly; targets are assumed validated.
    """
    spec = _as_spec(spec)
    cfg = config if config is not None else BisectionConfig()
    Y = np.asarray(Y, dtype=float)
    Theta = np.asarray(Theta, dtype=float)
    if Y.shape != Theta.shape or Y.ndim != 2:
        raise DimensionError("Y and Theta must be matrices of equal shape")
    n, k = Y.shape
    if n == 0:
        return np.zeros(0), np.zeros((0, k))
    gen, fam = spec.generator, spec.family

    if gen is Generator.SQUARED:
        diff = Y - Theta
        sq = np.sum(diff * diff, axis=1)
        if fam is Family.FENCHEL_YOUNG:
            return 0.5 * sq, -diff
        return 0.5 * (0.5 * sq), -0.5 * diff

    if gen is Generator.PERCEPTRON_SIMPLEX:
        values = Theta.max(axis=1) - np.sum(Y * Theta, axis=1)
        vertices = np.zeros_like(Theta)
        vertices[np.arange(n), Theta.argmax(axis=1)] = 1.0
        return np.maximum(values, 0.0), vertices - Y

    if gen is Generator.SPARSEMAX:
        if fam is Family.FENCHEL_YOUNG:
            p = project_simplex(Theta, axis=1)
            conj = np.sum(p * Theta, axis=1) - 0.5 * np.sum(p * p, axis=1)
            values = 0.5 * np.sum(Y * Y, axis=1) + conj - np.sum(Y * Theta, axis=1)
            return np.maximum(values, 0.0), p - Y
        y_star = project_simplex(0.5 * (Y + Theta), axis=1)
        values = np.sum((y_star - Y) * (Theta - y_star), axis=1)
        return np.maximum(values, 0.0), y_star - Y

    # logistic
    if fam is Family.FENCHEL_YOUNG:
        lse = log_sum_exp(Theta, axis=1)
        pos_mask = Y > 0.0
        ent = np.sum(
            np.where(pos_mask, Y * np.log(np.where(pos_mask, Y, 1.0)), 0.0),
            axis=1,
        )
        values = lse + ent - np.sum(Y * Theta, axis=1)
        return np.maximum(values, 0.0), softargmax(Theta, axis=1) - Y
    _, y_star, log_y_star = _batch_logistic_solve(Y, Theta, cfg)
    values = np.sum((y_star - Y) * (Theta - log_y_star - 1.0), axis=1)
    return np.maximum(values, 0.0), y_star - Y


def loss_curve(generator, k=2, s_lo=-5.0, s_hi=5.0, steps=201, config=None):
    """Sample both family values along theta = (s, 0, ..., 0) with y = e_1.

    Returns an array of rows (s, fenchel_young_value, fitzpatrick_value);
    the third column never exceeds the second.
    """
    gen = Generator(generator)
    if steps < 2:
        raise DomainError("steps must be at least 2")
    if not s_lo < s_hi:
        raise DomainError("the range must satisfy lo < hi")
    if k < 2:
        raise DomainError("k must be at least 2")
    y = np.zeros(k)
    y[0] = 1.0
    fy_spec = LossSpec(gen, Family.FENCHEL_YOUNG)
    fitz_spec = LossSpec(gen, Family.FITZPATRICK)
    rows = np.empty((steps, 3))
    for i, s in enumerate(np.linspace(s_lo, s_hi, steps)):
        theta = np.zeros(k)
        theta[0] = s
        rows[i, 0] = s
        rows[i, 1] = fy_value(fy_spec, y, theta)
        rows[i, 2] = fitz_value(fitz_spec, y, theta, config)
    return rows
