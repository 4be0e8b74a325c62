"""Training runs and grid benchmarks over manifest datasets.

A benchmark fans (dataset, loss, lambda) cells out to a bounded thread pool;
each cell trains one model and reports dev/test error.  Cells are keyed, so
report assembly does not depend on completion order, and every training run
is deterministic on its own, so the pool size never changes the numbers.
"""

from __future__ import annotations

import datetime
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .data import build_dataset, load_manifest
from .errors import FitzlossError, SchemaError
from .losses import LossSpec
from .train import TrainConfig, lbfgs_minimize, mse, predict_batch

__all__ = [
    "DEFAULT_LAMBDA_GRID",
    "SCHEMA_VERSION",
    "train_on_dataset",
    "run_training",
    "run_benchmark",
    "report_to_csv",
]

# lambda is swept over 10^-4 .. 10^4 by default
DEFAULT_LAMBDA_GRID = tuple(10.0 ** e for e in range(-4, 5))

SCHEMA_VERSION = 1


def _dataset_by_name(manifest_path, name):
    entries = load_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    for entry in entries:
        if entry["name"] == name:
            return build_dataset(entry, base_dir=base)
    raise SchemaError(f"dataset {name!r} not found in {manifest_path}")


def train_on_dataset(dataset, config):
    """Fit one model on the train split; returns (result, metrics dict)."""
    x_train, y_train = dataset.split("train")
    result = lbfgs_minimize(x_train, y_train, config)
    metrics = {}
    for split in ("train", "dev", "test"):
        x, y = dataset.split(split)
        if x.shape[0] == 0:
            metrics[f"{split}_mse"] = None
            continue
        metrics[f"{split}_mse"] = mse(predict_batch(result.weights, x, config.loss), y)
    return result, metrics


def run_training(manifest_path, dataset_name, config):
    """Resolve a dataset from a manifest and train on it."""
    dataset = _dataset_by_name(manifest_path, dataset_name)
    result, metrics = train_on_dataset(dataset, config)
    return dataset, result, metrics


def _run_cell(dataset, loss_name, lam, seed, grad_tol, max_iter):
    config = TrainConfig(
        loss=LossSpec.parse(loss_name),
        lam=lam,
        grad_tol=grad_tol,
        max_iter=max_iter,
        seed=seed,
    )
    result, metrics = train_on_dataset(dataset, config)
    return result, metrics


def run_benchmark(
    manifest_path,
    losses,
    datasets=None,
    lambda_grid=None,
    seed=0,
    grad_tol=1e-6,
    max_iter=500,
    max_workers=4,
):
    """Sweep lambda per (dataset, loss), selecting by dev error.

    For every pair the grid value minimizing dev MSE wins (ties break to
    the smaller lambda) and its test MSE is reported.  Failures are recorded
    in the report without aborting the remaining cells.  Returns a plain
    dict ready for JSON serialization.
    """
    grid = [float(v) for v in (lambda_grid or DEFAULT_LAMBDA_GRID)]
    if not grid or any(not v > 0 for v in grid):
        raise SchemaError("lambda grid must be nonempty and positive")
    grid = sorted(grid)
    loss_names = [LossSpec.parse(name).name for name in losses]
    if not loss_names:
        raise SchemaError("need at least one loss")
    entries = load_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    wanted = set(datasets) if datasets else None
    if wanted:
        known = {e["name"] for e in entries}
        missing = wanted - known
        if missing:
            raise SchemaError(f"datasets not in manifest: {sorted(missing)}")

    resolved = {}
    load_errors = {}
    for entry in entries:
        name = entry["name"]
        if wanted is not None and name not in wanted:
            continue
        try:
            resolved[name] = build_dataset(entry, base_dir=base)
        except FitzlossError as exc:
            load_errors[name] = str(exc)
    if not resolved and not load_errors:
        raise SchemaError("manifest selected no datasets")

    jobs = {}
    with ThreadPoolExecutor(max_workers=max(1, int(max_workers))) as pool:
        for ds_name, dataset in resolved.items():
            for loss_name in loss_names:
                for lam in grid:
                    key = (ds_name, loss_name, lam)
                    jobs[key] = pool.submit(
                        _run_cell, dataset, loss_name, lam, seed, grad_tol, max_iter
                    )
        outcomes = {}
        for key, fut in jobs.items():
            try:
                outcomes[key] = ("ok", fut.result())
            except FitzlossError as exc:
                outcomes[key] = ("error", str(exc))

    cells = []
    weights_by_pair = {}
    for ds_name in resolved:
        for loss_name in loss_names:
            best = None
            errors = []
            for lam in grid:
                status, payload = outcomes[(ds_name, loss_name, lam)]
                if status == "error":
                    errors.append(f"lambda={lam:g}: {payload}")
                    continue
                result, metrics = payload
                dev = metrics["dev_mse"]
                # strict < keeps the smaller lambda on ties (grid is sorted)
                if best is None or dev < best["dev_mse"]:
                    best = {
                        "dataset": ds_name,
                        "loss": loss_name,
                        "best_lambda": lam,
                        "dev_mse": dev,
                        "test_mse": metrics["test_mse"],
                        "train_mse": metrics["train_mse"],
                        "converged": result.converged,
                        "error": None,
                    }
                    weights_by_pair[(ds_name, loss_name)] = result.weights
            if best is None:
                best = {
                    "dataset": ds_name,
                    "loss": loss_name,
                    "best_lambda": None,
                    "dev_mse": None,
                    "test_mse": None,
                    "train_mse": None,
                    "converged": False,
                    "error": "; ".join(errors) or "no successful cell",
                }
            cells.append(best)
    for ds_name, message in load_errors.items():
        cells.append({
            "dataset": ds_name, "loss": None, "best_lambda": None,
            "dev_mse": None, "test_mse": None, "train_mse": None,
            "converged": False, "error": message,
        })

    # shared-link sanity: a loss and its sibling predict identically at equal W
    link_sanity = {}
    for ds_name, dataset in resolved.items():
        checks = []
        for loss_name in loss_names:
            weights = weights_by_pair.get((ds_name, loss_name))
            if weights is None:
                continue
            spec = LossSpec.parse(loss_name)
            x_test, _ = dataset.split("test")
            if x_test.shape[0] == 0:
                continue
            own = predict_batch(weights, x_test, spec)
            other = predict_batch(weights, x_test, spec.sibling())
            checks.append(bool(np.array_equal(own, other)))
        link_sanity[ds_name] = all(checks) if checks else None

    failures = sum(1 for cell in cells if cell["error"])
    report = {
        "schema_version": SCHEMA_VERSION,
        "environment": {
            "seed": seed,
            "lambda_grid": grid,
            "losses": loss_names,
            "grad_tol": grad_tol,
            "max_iter": max_iter,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
        "cells": cells,
        "link_sanity": link_sanity,
        "failures": failures,
    }
    return report


def report_to_csv(report):
    """Render a report as a losses-by-datasets test-MSE table."""
    loss_names = report["environment"]["losses"]
    by_dataset = {}
    for cell in report["cells"]:
        if cell["loss"] is None:
            continue
        by_dataset.setdefault(cell["dataset"], {})[cell["loss"]] = cell
    lines = ["dataset," + ",".join(loss_names)]
    for ds_name in sorted(by_dataset):
        row = [ds_name]
        for loss_name in loss_names:
            cell = by_dataset[ds_name].get(loss_name)
            if cell is None or cell["test_mse"] is None:
                row.append("error")
            else:
                row.append(f"{cell['test_mse']:.12g}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
