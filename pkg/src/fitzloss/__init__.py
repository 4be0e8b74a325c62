"""Convex losses with a shared link function, twice.

For each generator (squared, perceptron, sparsemax, logistic) this package
implements the classical Fenchel-Young loss and its tighter Fitzpatrick
counterpart, together with brute-force oracles that verify the closed forms,
a generalized-linear-model trainer, an HTTP service, and a CLI.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    EvaluationError,
    FitzlossError,
    InfeasibleTargetError,
    LineSearchError,
    NoRootError,
    ParseError,
    SchemaError,
    SolverError,
    UnsupportedDimensionError,
)
from .losses import (
    EvalRecord,
    Family,
    FitzSolveResult,
    Generator,
    LossSpec,
    evaluate,
    fitz_grad,
    fitz_logistic,
    fitz_logistic_solve,
    fitz_perceptron,
    fitz_sparsemax,
    fitz_squared,
    fitz_value,
    fy_grad,
    fy_value,
    link,
    loss_curve,
    loss_grad,
    loss_value,
)
from .numeric import (
    BisectionConfig,
    bisect,
    finite_diff_grad,
    lambert_w,
    lambert_w_exp,
    log_sum_exp,
)
from .oracle import (
    GridConfig,
    NegentropySpec,
    bregman,
    fitz_value_via_shifted_generator,
    lower_bound_quadratic,
    omega_y_conjugate_grid,
)
from .simplex import argmax_vertex, project_simplex, softargmax
from .train import TrainConfig, TrainResult, lbfgs_minimize, mse, objective, predict

__all__ = [
    "__version__",
    # losses
    "Generator", "Family", "LossSpec", "FitzSolveResult", "EvalRecord",
    "fy_value", "fy_grad", "fitz_squared", "fitz_perceptron",
    "fitz_sparsemax", "fitz_logistic_solve", "fitz_logistic",
    "fitz_value", "fitz_grad", "loss_value", "loss_grad", "link",
    "evaluate", "loss_curve",
    # numeric
    "BisectionConfig", "lambert_w", "lambert_w_exp", "log_sum_exp",
    "bisect", "finite_diff_grad",
    # simplex
    "project_simplex", "softargmax", "argmax_vertex",
    # oracle
    "NegentropySpec", "GridConfig", "bregman", "omega_y_conjugate_grid",
    "fitz_value_via_shifted_generator", "lower_bound_quadratic",
    # train
    "TrainConfig", "TrainResult", "objective", "lbfgs_minimize",
    "predict", "mse",
    # errors
    "FitzlossError", "DomainError", "DimensionError", "InfeasibleTargetError",
    "UnsupportedDimensionError", "NoRootError", "ConvergenceError",
    "LineSearchError", "SolverError", "EvaluationError", "ParseError",
    "SchemaError",
]
