"""Randomized property suites behind the ``check`` command and endpoint.

Each suite draws (y, theta) pairs from a seeded generator, measures how
badly a property is violated, and reports the worst case.  A suite passes
when no trial exceeds its tolerance.  For a fixed seed the whole run is
deterministic, regardless of which subset of suites is selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import losses, numeric, oracle, simplex
from .errors import DomainError
from .losses import Family, Generator, LossSpec

__all__ = ["SuiteResult", "SUITE_NAMES", "run_checks"]

_ALL_GENERATORS = (
    Generator.SQUARED,
    Generator.PERCEPTRON_SIMPLEX,
    Generator.SPARSEMAX,
    Generator.LOGISTIC,
)
_SIMPLEX_GENS = (
    Generator.PERCEPTRON_SIMPLEX,
    Generator.SPARSEMAX,
    Generator.LOGISTIC,
)
_SMOOTH_GENS = (Generator.SQUARED, Generator.SPARSEMAX, Generator.LOGISTIC)

# finite differences divide the dual-solve noise by 2h, so gradient checks
# run the logistic solve well past its training-time tolerances
_TIGHT_SOLVE = numeric.BisectionConfig(
    abs_tol=1e-14, residual_tol=1e-14, max_iter=400
)


@dataclass
class SuiteResult:
    """Outcome of one property suite."""

    name: str
    trials: int
    failures: int = 0
    worst: float = 0.0
    example: dict | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, violation: float, example: dict):
        """Track a signed violation margin; positive means a failure."""
        if violation > self.worst:
            self.worst = violation
        if violation > 0.0:
            self.failures += 1
            if self.example is None:
                self.example = {
                    key: (value.tolist() if isinstance(value, np.ndarray) else value)
                    for key, value in example.items()
                }


def _sample_prob(rng, k, allow_zeros=True):
    y = rng.dirichlet(np.ones(k))
    if allow_zeros and k >= 2 and rng.random() < 0.4:
        dead = rng.random(k) < 0.4
        if dead.all():
            dead[rng.integers(k)] = False
        y = np.where(dead, 0.0, y)
        y = y / y.sum()
    return simplex.check_prob_vector(y)


def _sample_scores(rng, k):
    scale = 10.0 ** rng.uniform(-1.0, 0.8)
    return rng.normal(0.0, scale, size=k)


def _sample_target(rng, generator, k, allow_zeros=True):
    if generator is Generator.SQUARED:
        return rng.normal(0.0, 2.0, size=k)
    return _sample_prob(rng, k, allow_zeros=allow_zeros)


def _suite_sandwich(rng, trials, _resolution):
    """0 <= fitzpatrick <= fenchel-young + 1e-9 for every generator."""
    result = SuiteResult("sandwich", trials)
    for _ in range(trials):
        k = int(rng.integers(2, 11))
        gen = _ALL_GENERATORS[rng.integers(len(_ALL_GENERATORS))]
        y = _sample_target(rng, gen, k)
        theta = _sample_scores(rng, k)
        fy = losses.fy_value(LossSpec(gen, Family.FENCHEL_YOUNG), y, theta)
        fitz = losses.fitz_value(LossSpec(gen, Family.FITZPATRICK), y, theta)
        violation = max(fitz - fy - 1e-9, -fitz, -fy)
        result.record(violation, {"generator": gen.value, "y": y, "theta": theta,
                                  "fenchel_young": fy, "fitzpatrick": fitz})
    return result


def _suite_link_zero(rng, trials, _resolution):
    """Both losses vanish at y = link(theta), and (for strictly convex
    generators) a near-zero loss forces y to sit nearly on the link."""
    result = SuiteResult("link_zero", trials)
    for _ in range(trials):
        k = int(rng.integers(2, 9))
        gen = _ALL_GENERATORS[rng.integers(len(_ALL_GENERATORS))]
        theta = _sample_scores(rng, k)
        y = losses.link(gen, theta)
        fy = losses.fy_value(LossSpec(gen, Family.FENCHEL_YOUNG), y, theta)
        fitz = losses.fitz_value(
            LossSpec(gen, Family.FITZPATRICK), y, theta, config=_TIGHT_SOLVE
        )
        violation = max(fy, fitz) - 1e-9
        example = {"generator": gen.value, "theta": theta, "fy": fy, "fitz": fitz}
        if violation <= 0.0 and gen in _SMOOTH_GENS:
            y_far = _sample_target(rng, gen, k)
            gap = float(np.max(np.abs(y_far - y)))
            if gap >= 1e-4:
                far = losses.loss_value(
                    LossSpec(gen, Family.FITZPATRICK), y_far, theta,
                    config=_TIGHT_SOLVE,
                )
                violation = 1e-9 - far  # a far target must not reach zero loss
                example["y_far"] = y_far
                example["far_value"] = far
        result.record(violation, example)
    return result


def _stable_for_fd(spec, y, theta, h):
    """Probe points must keep active sets and argmaxes unchanged."""
    gen = spec.generator
    k = theta.size
    if gen is Generator.SQUARED:
        return True
    probes = [theta]
    for i in range(k):
        for sign in (h, -h):
            t = theta.copy()
            t[i] += sign
            probes.append(t)
    if gen is Generator.PERCEPTRON_SIMPLEX:
        tops = {int(np.argmax(t)) for t in probes}
        margin = np.sort(theta)[-1] - np.sort(theta)[-2]
        return len(tops) == 1 and margin > 10 * h
    if gen is Generator.SPARSEMAX:
        if spec.family is Family.FITZPATRICK:
            probes = [0.5 * (y + t) for t in probes]
        supports = {tuple(simplex.project_simplex(t) > 0.0) for t in probes}
        return len(supports) == 1
    return True


def _suite_gradients(rng, trials, _resolution):
    """Analytic gradients match central differences to 1e-4 relative."""
    result = SuiteResult("gradients", trials)
    h = 1e-6
    specs = [LossSpec(g, f) for g in _ALL_GENERATORS for f in Family]
    for _ in range(trials):
        k = int(rng.integers(2, 7))
        spec = specs[rng.integers(len(specs))]
        for _attempt in range(50):
            y = _sample_target(rng, spec.generator, k, allow_zeros=False)
            theta = _sample_scores(rng, k)
            if _stable_for_fd(spec, y, theta, h):
                break
        else:
            continue
        grad = losses.loss_grad(spec, y, theta, config=_TIGHT_SOLVE)
        fd = numeric.finite_diff_grad(
            lambda t: losses.loss_value(spec, y, t, config=_TIGHT_SOLVE), theta, h=h
        )
        scale = max(1.0, float(np.max(np.abs(grad))))
        violation = float(np.max(np.abs(grad - fd))) / scale - 1e-4
        result.record(violation, {"loss": spec.name, "y": y, "theta": theta,
                                  "grad": grad, "fd": fd})
    return result


def _suite_convexity(rng, trials, _resolution):
    """Midpoint convexity in theta for both families."""
    result = SuiteResult("convexity", trials)
    specs = [LossSpec(g, f) for g in _ALL_GENERATORS for f in Family]
    for _ in range(trials):
        k = int(rng.integers(2, 9))
        spec = specs[rng.integers(len(specs))]
        y = _sample_target(rng, spec.generator, k)
        t1 = _sample_scores(rng, k)
        t2 = _sample_scores(rng, k)
        mid = losses.loss_value(spec, y, 0.5 * (t1 + t2), config=_TIGHT_SOLVE)
        avg = 0.5 * losses.loss_value(spec, y, t1, config=_TIGHT_SOLVE) \
            + 0.5 * losses.loss_value(spec, y, t2, config=_TIGHT_SOLVE)
        violation = mid - avg - 1e-9
        result.record(violation, {"loss": spec.name, "y": y, "t1": t1, "t2": t2})
    return result


def _suite_shift(rng, trials, _resolution):
    """Simplex-generator losses ignore theta -> theta + c, and the logistic
    dual root shifts by exactly c."""
    result = SuiteResult("shift", trials)
    for _ in range(trials):
        k = int(rng.integers(2, 9))
        gen = _SIMPLEX_GENS[rng.integers(len(_SIMPLEX_GENS))]
        y = _sample_prob(rng, k)
        theta = _sample_scores(rng, k)
        c = float(rng.uniform(-50.0, 50.0))
        worst = 0.0
        for family in Family:
            spec = LossSpec(gen, family)
            base = losses.loss_value(spec, y, theta, config=_TIGHT_SOLVE)
            shifted = losses.loss_value(spec, y, theta + c, config=_TIGHT_SOLVE)
            worst = max(worst, abs(shifted - base) - 1e-9 * max(1.0, abs(base)))
        if gen is Generator.LOGISTIC:
            lam0 = losses.fitz_logistic_solve(y, theta).lambda_star
            lam1 = losses.fitz_logistic_solve(y, theta + c).lambda_star
            worst = max(worst, abs(lam1 - (lam0 + c)) - 1e-8)
        result.record(worst, {"generator": gen.value, "y": y, "theta": theta, "c": c})
    return result


def _suite_identities(rng, trials, _resolution):
    """Exact coincidences: half the squared loss, the perceptron loss, and
    the two sparsemax formulations."""
    result = SuiteResult("identities", trials)
    for _ in range(trials):
        k = int(rng.integers(2, 9))
        y_free = rng.normal(0.0, 2.0, size=k)
        theta = _sample_scores(rng, k)
        fy_sq = losses.fy_value(LossSpec(Generator.SQUARED), y_free, theta)
        fitz_sq, _ = losses.fitz_squared(y_free, theta)
        worst = abs(fitz_sq - 0.5 * fy_sq) - 1e-12 * max(1.0, fy_sq)
        y = _sample_prob(rng, k)
        fy_pc = losses.fy_value(LossSpec(Generator.PERCEPTRON_SIMPLEX), y, theta)
        fitz_pc, _ = losses.fitz_perceptron(y, theta)
        worst = max(worst, abs(fitz_pc - fy_pc) - 1e-12 * max(1.0, fy_pc))
        inner, _ = losses.fitz_sparsemax(y, theta)
        conj = losses.sparsemax_conjugate_value(y, theta)
        worst = max(worst, abs(inner - conj) - 1e-10)
        result.record(worst, {"y": y, "theta": theta})
    return result


def _suite_solver(rng, trials, _resolution):
    """The logistic dual solve stays in its bracket, meets the residual
    tolerance, and lands exactly on 1 + logsumexp(theta) at the link."""
    result = SuiteResult("solver", trials)
    for _ in range(trials):
        k = int(rng.integers(2, 11))
        y = _sample_prob(rng, k)
        theta = _sample_scores(rng, k)
        res = losses.fitz_logistic_solve(y, theta)
        lo, hi = res.bracket
        worst = max(
            res.residual - 1e-10,
            lo - res.lambda_star,
            res.lambda_star - hi,
            abs(float(res.y_star.sum()) - 1.0) - 1e-8,
        )
        example = {"y": y, "theta": theta, "lambda": res.lambda_star,
                   "residual": res.residual, "bracket": list(res.bracket)}
        link_y = simplex.softargmax(theta)
        lam_link = losses.fitz_logistic_solve(link_y, theta).lambda_star
        expected = 1.0 + numeric.log_sum_exp(theta)
        worst = max(worst, abs(lam_link - expected) - 1e-8)
        result.record(worst, example)
    return result


def _suite_grid_oracle(rng, trials, resolution):
    """Closed-form Fitzpatrick values agree with the exhaustive conjugate
    search over the shifted generator, within grid accuracy 5/resolution."""
    result = SuiteResult("grid_oracle", trials)
    cfg = oracle.GridConfig(resolution=resolution)
    pairs = (
        ("squared", Generator.SPARSEMAX),
        ("negentropy", Generator.LOGISTIC),
    )
    tol = 5.0 / resolution
    for _ in range(trials):
        k = int(rng.integers(2, 4))
        oracle_gen, loss_gen = pairs[rng.integers(2)]
        y = _sample_prob(rng, k, allow_zeros=False)
        theta = _sample_scores(rng, k)
        grid_value = oracle.fitz_value_via_shifted_generator(oracle_gen, y, theta, cfg)
        closed = losses.fitz_value(LossSpec(loss_gen, Family.FITZPATRICK), y, theta)
        violation = abs(grid_value - closed) - tol
        result.record(violation, {"generator": loss_gen.value, "k": k,
                                  "y": y, "theta": theta,
                                  "grid": grid_value, "closed": closed})
    return result


def _suite_lower_bound(rng, trials, _resolution):
    """Quadratic form at the maximizer never exceeds the Fitzpatrick value;
    exact equality for the unconstrained squared generator."""
    result = SuiteResult("lower_bound", trials)
    for _ in range(trials):
        k = int(rng.integers(2, 9))
        theta = _sample_scores(rng, k)
        y_free = rng.normal(0.0, 2.0, size=k)
        value_sq, star_sq = losses.fitz_squared(y_free, theta)
        quad_sq = oracle.lower_bound_quadratic("squared", y_free, star_sq)
        worst = abs(quad_sq - value_sq) - 1e-12 * max(1.0, value_sq)
        y = _sample_prob(rng, k)
        value_sp, star_sp = losses.fitz_sparsemax(y, theta)
        worst = max(
            worst,
            oracle.lower_bound_quadratic("squared", y, star_sp) - value_sp - 1e-8,
        )
        value_lg, star_lg = losses.fitz_logistic(y, theta)
        worst = max(
            worst,
            oracle.lower_bound_quadratic("negentropy", y, star_lg) - value_lg - 1e-8,
        )
        result.record(worst, {"y": y, "theta": theta})
    return result


def _suite_simplex(rng, trials, _resolution):
    """Projection feasibility/optimality, shift equivariance, co-sorting."""
    result = SuiteResult("simplex", trials)
    for _ in range(trials):
        k = int(rng.integers(2, 9))
        z = rng.normal(0.0, 3.0, size=k)
        p = simplex.project_simplex(z)
        worst = abs(float(p.sum()) - 1.0) - 1e-9
        worst = max(worst, float(-p.min()))
        c = float(rng.uniform(-100.0, 100.0))
        worst = max(
            worst,
            float(np.max(np.abs(simplex.project_simplex(z + c) - p))) - 1e-9,
        )
        # optimality against every vertex and the uniform point
        obj = float(np.dot(p - z, p - z))
        for j in range(k):
            e = np.zeros(k)
            e[j] = 1.0
            worst = max(worst, obj - float(np.dot(e - z, e - z)) - 1e-9)
        uniform = np.full(k, 1.0 / k)
        worst = max(worst, obj - float(np.dot(uniform - z, uniform - z)) - 1e-9)
        soft = simplex.softargmax(z)
        worst = max(worst, abs(float(soft.sum()) - 1.0) - 1e-12)
        if float(soft.min()) <= 0.0:
            worst = max(worst, 1.0)
        order = np.argsort(z)
        for link_out in (p, soft):
            diffs = np.diff(link_out[order])
            worst = max(worst, float(-diffs.min()) - 1e-12 if diffs.size else 0.0)
        result.record(worst, {"z": z})
    return result


def _suite_numeric(rng, trials, _resolution):
    """Lambert agreement and monotonicity, the logsumexp shift identity,
    and bisection residuals on monotone test functions."""
    result = SuiteResult("numeric", trials)
    for _ in range(trials):
        z = np.sort(10.0 ** rng.uniform(-12.0, 8.0, size=8))
        w = numeric.lambert_w(z)
        worst = float(np.max(np.abs(w * np.exp(w) - z) / np.maximum(1.0, z))) - 1e-13
        worst = max(worst, float(-np.diff(w).min()) if w.size > 1 else 0.0)
        x = rng.uniform(-30.0, 705.0)
        direct = numeric.lambert_w(math.exp(x)) if x <= 700 else None
        via_exp = numeric.lambert_w_exp(x)
        if direct is not None:
            worst = max(worst, abs(via_exp - direct) / max(1.0, abs(direct)) - 1e-12)
        theta = rng.normal(0.0, 5.0, size=int(rng.integers(1, 9)))
        c = float(rng.uniform(-1e3, 1e3))
        lse = numeric.log_sum_exp(theta)
        worst = max(
            worst,
            abs(numeric.log_sum_exp(theta + c) - (lse + c))
            - 1e-12 * max(1.0, abs(lse + c)),
        )
        a = float(rng.uniform(0.5, 4.0))
        root = numeric.bisect(lambda t: a - t * t * t, 0.0, 8.0)
        worst = max(worst, abs(a - root ** 3) - 1e-10)
        result.record(worst, {"z": z, "x": x, "a": a})
    return result


_SUITES = {
    "sandwich": (_suite_sandwich, 0),
    "link_zero": (_suite_link_zero, 1),
    "gradients": (_suite_gradients, 2),
    "convexity": (_suite_convexity, 3),
    "shift": (_suite_shift, 4),
    "identities": (_suite_identities, 5),
    "solver": (_suite_solver, 6),
    "grid_oracle": (_suite_grid_oracle, 7),
    "lower_bound": (_suite_lower_bound, 8),
    "simplex": (_suite_simplex, 9),
    "numeric": (_suite_numeric, 10),
}

SUITE_NAMES = tuple(_SUITES)

# the grid oracle is accurate but slow; cap its default trial count
_SLOW_SUITES = {"grid_oracle": 50}


def run_checks(suites, seed=0, trials=200, resolution=400):
    """Run the named suites (or all of them) and return their results.

    Each suite gets an independent generator derived from (seed, suite), so
    results do not depend on which other suites were selected.
    """
    if isinstance(suites, str):
        suites = [suites]
    selected = []
    for name in suites:
        if name == "all":
            selected.extend(SUITE_NAMES)
        elif name in _SUITES:
            selected.append(name)
        else:
            raise DomainError(
                f"unknown suite {name!r}; known: {', '.join(SUITE_NAMES)} or all"
            )
    if trials < 1:
        raise DomainError("trials must be at least 1")
    results = []
    for name in dict.fromkeys(selected):
        fn, ordinal = _SUITES[name]
        rng = np.random.default_rng([seed, ordinal])
        n = min(trials, _SLOW_SUITES.get(name, trials))
        results.append(fn(rng, n, resolution))
    return results
