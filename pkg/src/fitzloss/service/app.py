"""FastAPI service wrapping the loss library.

Every endpoint is a stateless wrapper over the core package; the CLI talks
to this app (in-process or over the network) rather than importing the
numerics directly.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..benchmark import run_benchmark, run_training
from ..checks import run_checks
from ..errors import FitzlossError
from ..losses import LossSpec, evaluate, loss_curve
from ..train import TrainConfig
from .schemas import (
    BenchmarkReport,
    BenchmarkRequest,
    CheckRequest,
    CheckResponse,
    CurvePoint,
    CurveRequest,
    CurveResponse,
    EvalRequest,
    EvalResponse,
    HealthResponse,
    SuiteReport,
    TrainRequest,
    TrainResponse,
)

app = FastAPI(
    title="fitzloss",
    version=__version__,
    description=(
        "Fenchel-Young and Fitzpatrick convex losses: evaluation, "
        "lower-bound curves, property checks, GLM training and benchmarks."
    ),
)


@app.exception_handler(FitzlossError)
async def _domain_error_handler(_request: Request, exc: FitzlossError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health", response_model=HealthResponse)
def health():
    return HealthResponse(status="ok", version=__version__)


@app.post("/eval", response_model=EvalResponse)
def eval_loss(request: EvalRequest):
    spec = LossSpec.parse(request.loss)
    record = evaluate(spec, request.y, request.theta)
    return EvalResponse(
        loss=spec.name,
        value=record.value,
        grad=record.grad.tolist(),
        link=record.link.tolist(),
        y_star=record.y_star.tolist(),
        lambda_star=record.lambda_star,
        residual=record.residual,
        solve_iterations=record.solve_iterations,
    )


@app.post("/curve", response_model=CurveResponse)
def curve(request: CurveRequest):
    spec = LossSpec.parse(request.generator)
    rows = loss_curve(
        spec.generator,
        k=request.k,
        s_lo=request.s_lo,
        s_hi=request.s_hi,
        steps=request.steps,
    )
    points = [
        CurvePoint(s=row[0], fenchel_young=row[1], fitzpatrick=row[2])
        for row in rows
    ]
    return CurveResponse(generator=spec.generator.value, k=request.k, points=points)


@app.post("/check", response_model=CheckResponse)
def check(request: CheckRequest):
    results = run_checks(
        request.suites,
        seed=request.seed,
        trials=request.trials,
        resolution=request.resolution,
    )
    suites = [
        SuiteReport(
            name=r.name,
            trials=r.trials,
            failures=r.failures,
            worst=r.worst,
            example=r.example,
            passed=r.passed,
        )
        for r in results
    ]
    return CheckResponse(passed=all(r.passed for r in results), suites=suites)


@app.post("/train", response_model=TrainResponse)
def train(request: TrainRequest):
    config = TrainConfig(
        loss=LossSpec.parse(request.loss),
        lam=request.lam,
        lbfgs_memory=request.lbfgs_memory,
        grad_tol=request.grad_tol,
        max_iter=request.max_iter,
        seed=request.seed,
    )
    dataset, result, metrics = run_training(
        request.manifest, request.dataset, config
    )
    return TrainResponse(
        dataset=dataset.name,
        loss=config.loss.name,
        lam=config.lam,
        seed=config.seed,
        k=dataset.k,
        d=dataset.d,
        weights=result.weights.tolist(),
        converged=result.converged,
        iterations=result.iterations,
        grad_norm=result.grad_norm,
        initial_grad_norm=result.initial_grad_norm,
        trace=result.trace,
        train_mse=metrics["train_mse"],
        dev_mse=metrics["dev_mse"],
        test_mse=metrics["test_mse"],
    )


@app.post("/benchmark", response_model=BenchmarkReport)
def benchmark(request: BenchmarkRequest):
    report = run_benchmark(
        request.manifest,
        losses=request.losses,
        datasets=request.datasets,
        lambda_grid=request.lambda_grid,
        seed=request.seed,
        grad_tol=request.grad_tol,
        max_iter=request.max_iter,
        max_workers=request.max_workers,
    )
    return BenchmarkReport.model_validate(report)
