"""Command-line front door.

A thin client over the HTTP service: every subcommand builds one request,
sends it (in-process by default, or to ``--server URL``), and renders the
response.  Files named by ``--out`` flags are written client-side from the
response payload.

Exit codes: 0 success, 1 property or benchmark failure, 2 usage, parse or
domain error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx

from . import __version__
from .benchmark import DEFAULT_LAMBDA_GRID, report_to_csv

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _post_in_process(path, payload):
    from .service.app import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://fitzloss.local", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _post(server, path, payload):
    if server:
        response = httpx.post(server.rstrip("/") + path, json=payload, timeout=None)
    else:
        response = _post_in_process(path, payload)
    if response.status_code in (400, 422):
        raise CliError(_error_detail(response), EXIT_USAGE)
    if response.status_code != 200:
        raise CliError(_error_detail(response), EXIT_FAILURE)
    return response.json()


def _error_detail(response):
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = None
    if detail is None:
        detail = response.text
    return f"service error {response.status_code}: {detail}"


def _parse_vector(text, flag):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise CliError(f"{flag} must be comma-separated reals: {exc}", EXIT_USAGE)


def _parse_range(text):
    sep = ":" if ":" in text else ","
    parts = text.split(sep)
    if len(parts) != 2:
        raise CliError("--s-range must look like LO:HI", EXIT_USAGE)
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise CliError(f"--s-range must be numeric: {exc}", EXIT_USAGE)
    if not lo < hi:
        raise CliError("--s-range needs LO < HI", EXIT_USAGE)
    return lo, hi


def cmd_eval(args):
    payload = {
        "loss": args.loss,
        "y": _parse_vector(args.y, "--y"),
        "theta": _parse_vector(args.theta, "--theta"),
    }
    record = _post(args.server, "/eval", payload)
    print(json.dumps(record))
    return EXIT_OK


def cmd_curve(args):
    s_lo, s_hi = _parse_range(args.s_range)
    payload = {
        "generator": args.generator,
        "k": args.k,
        "s_lo": s_lo,
        "s_hi": s_hi,
        "steps": args.steps,
    }
    response = _post(args.server, "/curve", payload)
    lines = ["s,fy_value,fitz_value"]
    for point in response["points"]:
        lines.append(
            f"{point['s']:.12g},{point['fenchel_young']:.12g},"
            f"{point['fitzpatrick']:.12g}"
        )
    try:
        with open(args.out, "w", encoding="ascii") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_USAGE)
    print(json.dumps({"out": args.out, "rows": len(response["points"])}))
    return EXIT_OK


def cmd_check(args):
    payload = {
        "suites": [s.strip() for s in args.suite.split(",")],
        "seed": args.seed,
        "trials": args.trials,
        "resolution": args.resolution,
    }
    response = _post(args.server, "/check", payload)
    for suite in response["suites"]:
        status = "PASS" if suite["passed"] else "FAIL"
        print(
            f"{status} {suite['name']}: trials={suite['trials']} "
            f"failures={suite['failures']} worst={suite['worst']:.3e}"
        )
        if not suite["passed"] and suite.get("example"):
            print(f"  counterexample: {json.dumps(suite['example'])}")
    if not response["passed"]:
        return EXIT_FAILURE
    return EXIT_OK


def cmd_train(args):
    payload = {
        "manifest": args.manifest,
        "dataset": args.dataset,
        "loss": args.loss,
        "lambda": args.lam,
        "lbfgs_memory": args.memory,
        "grad_tol": args.grad_tol,
        "max_iter": args.max_iter,
        "seed": args.seed,
    }
    response = _post(args.server, "/train", payload)
    if args.out:
        lines = [
            f"{response['k']} {response['d']} {response['loss']} "
            f"{response['lambda']!r} {response['seed']}"
        ]
        for row in response["weights"]:
            lines.append(" ".join(repr(float(v)) for v in row))
        try:
            with open(args.out, "w", encoding="ascii") as handle:
                handle.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc}", EXIT_USAGE)
    summary = {
        key: response[key]
        for key in (
            "dataset", "loss", "lambda", "seed", "k", "d", "converged",
            "iterations", "grad_norm", "train_mse", "dev_mse", "test_mse",
        )
    }
    if args.out:
        summary["model"] = args.out
    print(json.dumps(summary))
    return EXIT_OK


def cmd_benchmark(args):
    payload = {
        "manifest": args.manifest,
        "losses": [s.strip() for s in args.losses.split(",") if s.strip()],
        "datasets": (
            [s.strip() for s in args.datasets.split(",")] if args.datasets else None
        ),
        "lambda_grid": (
            [float(v) for v in args.lambda_grid.split(",")]
            if args.lambda_grid
            else list(DEFAULT_LAMBDA_GRID)
        ),
        "seed": args.seed,
        "grad_tol": args.grad_tol,
        "max_iter": args.max_iter,
        "max_workers": args.workers,
    }
    report = _post(args.server, "/benchmark", payload)
    try:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2)
            handle.write("\n")
        csv_path = args.out.rsplit(".", 1)[0] + ".csv"
        with open(csv_path, "w", encoding="ascii") as handle:
            handle.write(report_to_csv(report))
    except OSError as exc:
        raise CliError(f"cannot write report: {exc}", EXIT_USAGE)
    for cell in report["cells"]:
        if cell["error"]:
            print(f"FAIL {cell['dataset']}/{cell['loss']}: {cell['error']}")
        else:
            print(
                f"{cell['dataset']}/{cell['loss']}: lambda={cell['best_lambda']:g} "
                f"dev={cell['dev_mse']:.6g} test={cell['test_mse']:.6g}"
            )
    print(json.dumps({"out": args.out, "csv": csv_path,
                      "failures": report["failures"]}))
    if report["failures"]:
        return EXIT_FAILURE
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fitzloss",
        description="Fenchel-Young and Fitzpatrick loss toolbox",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_server(p):
        p.add_argument(
            "--server",
            default=None,
            help="service URL; default runs the service in-process",
        )

    p = sub.add_parser("eval", help="evaluate one loss at (y, theta)")
    p.add_argument("--loss", required=True,
                   help="e.g. logistic, fitzpatrick-sparsemax")
    p.add_argument("--y", required=True, help="comma-separated target vector")
    p.add_argument("--theta", required=True, help="comma-separated scores")
    add_server(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("curve", help="emit lower-bound curves as CSV")
    p.add_argument("--generator", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--s-range", default="-5:5",
                   help="LO:HI; write --s-range=-5:5 for negative bounds")
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--out", required=True)
    add_server(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("check", help="run randomized property suites")
    p.add_argument("--suite", default="all",
                   help="comma-separated suite names, or all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--resolution", type=int, default=400)
    add_server(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("train", help="fit one GLM on a manifest dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--loss", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--memory", type=int, default=10)
    p.add_argument("--grad-tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="weight-matrix file to write")
    add_server(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("benchmark", help="sweep lambda per dataset and loss")
    p.add_argument("--manifest", required=True)
    p.add_argument("--losses", required=True,
                   help="comma-separated loss names")
    p.add_argument("--datasets", default=None)
    p.add_argument("--lambda-grid", default=None,
                   help="comma-separated grid; default 1e-4..1e4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grad-tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--out", required=True, help="JSON report path")
    add_server(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("serve", help="run the HTTP service with uvicorn")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except httpx.HTTPError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
