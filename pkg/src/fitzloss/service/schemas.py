"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class EvalRequest(BaseModel):
    loss: str = Field(examples=["fitzpatrick-sparsemax"])
    y: list[float] = Field(min_length=1)
    theta: list[float] = Field(min_length=1)


class EvalResponse(BaseModel):
    loss: str
    value: float
    grad: list[float]
    link: list[float]
    y_star: list[float]
    lambda_star: Optional[float] = None
    residual: Optional[float] = None
    solve_iterations: Optional[int] = None


class CurveRequest(BaseModel):
    generator: str = Field(examples=["logistic"])
    k: int = Field(default=2, ge=2)
    s_lo: float = -5.0
    s_hi: float = 5.0
    steps: int = Field(default=201, ge=2)


class CurvePoint(BaseModel):
    s: float
    fenchel_young: float
    fitzpatrick: float


class CurveResponse(BaseModel):
    generator: str
    k: int
    points: list[CurvePoint]


class CheckRequest(BaseModel):
    suites: list[str] = Field(default_factory=lambda: ["all"])
    seed: int = 0
    trials: int = Field(default=200, ge=1)
    resolution: int = Field(default=400, ge=10)


class SuiteReport(BaseModel):
    name: str
    trials: int
    failures: int
    worst: float
    example: Optional[dict[str, Any]] = None
    passed: bool


class CheckResponse(BaseModel):
    passed: bool
    suites: list[SuiteReport]


class TrainRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    manifest: str
    dataset: str
    loss: str
    lam: float = Field(alias="lambda", gt=0.0)
    lbfgs_memory: int = Field(default=10, ge=1)
    grad_tol: float = Field(default=1e-6, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    seed: int = 0


class TrainResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    dataset: str
    loss: str
    lam: float = Field(serialization_alias="lambda")
    seed: int
    k: int
    d: int
    weights: list[list[float]]
    converged: bool
    iterations: int
    grad_norm: float
    initial_grad_norm: float
    trace: list[float]
    train_mse: Optional[float]
    dev_mse: Optional[float]
    test_mse: Optional[float]


class BenchmarkRequest(BaseModel):
    manifest: str
    losses: list[str] = Field(min_length=1)
    datasets: Optional[list[str]] = None
    lambda_grid: Optional[list[float]] = None
    seed: int = 0
    grad_tol: float = Field(default=1e-6, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    max_workers: int = Field(default=4, ge=1)


class BenchmarkCell(BaseModel):
    dataset: str
    loss: Optional[str]
    best_lambda: Optional[float]
    dev_mse: Optional[float]
    test_mse: Optional[float]
    train_mse: Optional[float]
    converged: bool
    error: Optional[str]


class BenchmarkEnvironment(BaseModel):
    seed: int
    lambda_grid: list[float]
    losses: list[str]
    grad_tol: float
    max_iter: int
    timestamp: str


class BenchmarkReport(BaseModel):
    schema_version: int
    environment: BenchmarkEnvironment
    cells: list[BenchmarkCell]
    link_sanity: dict[str, Optional[bool]]
    failures: int
