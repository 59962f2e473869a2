"""Command-line front end.

Subcommands: pid (single distribution from a file), gates (the battery),
copy (one copy-gate instance), randompdf (seeded simplex sweep), serve
(run the HTTP service).  Results are printed as one JSON document per
line so they remain machine-parseable; printing mode 1 adds stage flags
and mode 2 adds the solver's per-iteration statistics, each a strict
superset of the previous mode.

Exit codes: 0 success, 1 unusable input, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .distributions import DistributionError
from .estimator import PidResult, run_pid
from .gates import (
    GATE_NAMES,
    InvalidSize,
    copy_gate,
    expected_decomposition,
    gate,
    random_simplex_distribution,
)
from .solver import SOLVER_NAME, SolverException, SolverParams, Status

DEFAULT_SEED_ENV = "BROJA2PID_SEED"


@dataclass
class RunReport:
    """Per-instance results of a sweep plus their aggregate means."""

    results: list[PidResult] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    failures: list[tuple[int, str]] = field(default_factory=list)

    def add(self, result: PidResult, elapsed: float) -> None:
        self.results.append(result)
        self.seconds.append(elapsed)

    def aggregate(self) -> dict:
        n = len(self.results)
        if n == 0:
            return {"solved": 0, "failed": len(self.failures)}
        return {
            "si_mean": sum(r.si for r in self.results) / n,
            "uiy_mean": sum(r.uiy for r in self.results) / n,
            "uiz_mean": sum(r.uiz for r in self.results) / n,
            "ci_mean": sum(r.ci for r in self.results) / n,
            "seconds_mean": sum(self.seconds) / n,
            "solved": n,
            "failed": len(self.failures),
        }


def _parse_label(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def _freeze(label):
    if isinstance(label, list):
        return tuple(_freeze(v) for v in label)
    return label


def load_pdf(path: str) -> dict:
    """Read a distribution file.

    Accepts a JSON array of {"x":..., "y":..., "z":..., "p":...} records
    (labels may be numbers, strings or arrays) or a whitespace table with
    four columns x y z p, labels parsed as integers when possible.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    raw: dict = {}
    if stripped.startswith("[") or stripped.startswith("{"):
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("pdf", data)
        if not isinstance(data, list):
            raise ValueError("JSON input must be a list of {x, y, z, p} records")
        for rec in data:
            t = (_freeze(rec["x"]), _freeze(rec["y"]), _freeze(rec["z"]))
            raw[t] = raw.get(t, 0.0) + float(rec["p"])
        return raw
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 'x y z p', got {line!r}")
        t = tuple(_parse_label(p) for p in parts[:3])
        raw[t] = raw.get(t, 0.0) + float(parts[3])
    if not raw:
        raise ValueError("input file contains no records")
    return raw


def _solver_params(args) -> SolverParams:
    overrides = {}
    for name in (
        "feastol",
        "abstol",
        "reltol",
        "feastol_inacc",
        "abstol_inacc",
        "reltol_inacc",
        "max_iter",
    ):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return SolverParams(**overrides)


def _print_stage(args, flag: str) -> None:
    if args.output_mode >= 1:
        print(flag)


def _print_trace(args, solution) -> None:
    if args.output_mode >= 2:
        for k, rec in enumerate(solution.trace):
            print(
                f"iter {k + 1}: t={rec.t:.3e} newton={rec.newton_steps} "
                f"gap={rec.gap:.6e} bound={rec.gap_bound:.6e} "
                f"primal={rec.objective_primal:.9e} dual={rec.objective_dual:.9e}"
            )


def _run_one(args, raw: dict) -> tuple[PidResult, object]:
    _print_stage(args, "preparing model")
    _print_stage(args, "calling solver")
    result, solution = run_pid(raw, _solver_params(args))
    _print_trace(args, solution)
    return result, solution


def cmd_pid(args) -> int:
    if args.server:
        return _remote_pid(args)
    try:
        raw = load_pdf(args.input)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        result, _ = _run_one(args, raw)
    except DistributionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverException as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(result.to_returndata()))
    return 0


def _remote_pid(args) -> int:
    import httpx

    try:
        raw = load_pdf(args.input)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = {
        "pdf": [
            {"x": _thaw(x), "y": _thaw(y), "z": _thaw(z), "p": p}
            for (x, y, z), p in raw.items()
        ],
        "params": _params_payload(args),
    }
    _print_stage(args, "preparing model")
    _print_stage(args, "calling solver")
    resp = httpx.post(f"{args.server.rstrip('/')}/pid", json=payload, timeout=600.0)
    if resp.status_code >= 500:
        print(f"solver error: {resp.text}", file=sys.stderr)
        return 2
    if resp.status_code >= 400:
        print(f"error: {resp.text}", file=sys.stderr)
        return 1
    print(json.dumps(resp.json()["returndata"]))
    return 0


def _thaw(label):
    if isinstance(label, tuple):
        return [_thaw(v) for v in label]
    return label


def _params_payload(args) -> dict:
    out = {}
    for name in (
        "feastol",
        "abstol",
        "reltol",
        "feastol_inacc",
        "abstol_inacc",
        "reltol_inacc",
        "max_iter",
    ):
        value = getattr(args, name, None)
        if value is not None:
            out[name] = value
    return out


def cmd_gates(args) -> int:
    solved_all = True
    for name in GATE_NAMES:
        dist = gate(name)
        try:
            result, solution = _run_one(args, dist.entries)
        except SolverException as exc:
            print(f"solver error on {name}: {exc}", file=sys.stderr)
            solved_all = False
            continue
        expected = expected_decomposition(name)
        got = (result.si, result.uiy, result.uiz, result.ci)
        doc = {"gate": name, **result.to_returndata()}
        doc["expected"] = list(expected)
        doc["max_deviation"] = max(abs(a - b) for a, b in zip(got, expected))
        print(json.dumps(doc))
        if result.status not in (Status.OPTIMAL, Status.OPTIMAL_INACCURATE):
            solved_all = False
    return 0 if solved_all else 2


def cmd_copy(args) -> int:
    try:
        dist = copy_gate(args.m, args.n)
    except InvalidSize as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    start = time.perf_counter()
    try:
        result, _ = _run_one(args, dist.entries)
    except SolverException as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start
    print(json.dumps(result.to_returndata()))
    target_y = math.log2(args.m)
    target_z = math.log2(args.n)
    print(
        json.dumps(
            {
                "seconds": elapsed,
                "uiy_rel_dev": abs(result.uiy - target_y) / max(target_y, 1.0),
                "uiz_rel_dev": abs(result.uiz - target_z) / max(target_z, 1.0),
            }
        )
    )
    return 0


def _solve_seeded(task: tuple) -> tuple:
    """Sweep worker: solve one seeded instance (runs in a separate process
    when --jobs > 1)."""
    nx, ny, nz, seed, overrides = task
    params = SolverParams(**overrides)
    dist = random_simplex_distribution(nx, ny, nz, seed)
    start = time.perf_counter()
    try:
        result, _ = run_pid(dist.entries, params)
    except Exception as exc:
        return (seed, None, str(exc), time.perf_counter() - start)
    return (seed, result, None, time.perf_counter() - start)


def cmd_randompdf(args) -> int:
    if args.count < 1 or min(args.nx, args.ny, args.nz) < 1:
        print("error: sizes and count must be >= 1", file=sys.stderr)
        return 1
    seed0 = args.seed
    if seed0 is None:
        seed0 = int(os.environ.get(DEFAULT_SEED_ENV, "0"))
    overrides = _params_payload(args)
    tasks = [(args.nx, args.ny, args.nz, seed0 + i, overrides) for i in range(args.count)]
    report = RunReport()
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_solve_seeded, tasks))
    else:
        outcomes = [_solve_seeded(t) for t in tasks]
    rows = []
    for seed, result, error, elapsed in outcomes:
        if result is None:
            report.failures.append((seed, error))
            print(json.dumps({"seed": seed, "error": error, "seconds": elapsed}))
            continue
        report.add(result, elapsed)
        doc = {"seed": seed, **result.to_returndata(), "seconds": elapsed}
        print(json.dumps(doc))
        rows.append(doc)
    aggregate = report.aggregate()
    print(json.dumps({"aggregate": aggregate}))
    if args.csv:
        _write_csv(args.csv, rows, aggregate)
    return 0 if report.results else 2


def _write_csv(path: str, rows: list[dict], aggregate: dict) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["seed", "SI", "UIY", "UIZ", "CI", "err_primal", "err_dual", "err_gap", "solver", "seconds"]
        )
        for doc in rows:
            writer.writerow(
                [doc["seed"], doc["SI"], doc["UIY"], doc["UIZ"], doc["CI"]]
                + list(doc["Num_err"])
                + [doc["Solver"], doc["seconds"]]
            )
        if aggregate.get("solved"):
            writer.writerow(
                [
                    "mean",
                    aggregate["si_mean"],
                    aggregate["uiy_mean"],
                    aggregate["uiz_mean"],
                    aggregate["ci_mean"],
                    "",
                    "",
                    "",
                    "",
                    aggregate["seconds_mean"],
                ]
            )


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("conepid.service.app:app", host=args.host, port=args.port)
    return 0


def _add_tolerance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--feastol", type=float, help="primal/dual feasibility tolerance")
    parser.add_argument("--abstol", type=float, help="absolute duality-gap tolerance")
    parser.add_argument("--reltol", type=float, help="relative duality-gap tolerance")
    parser.add_argument("--feastol-inacc", dest="feastol_inacc", type=float,
                        help="relaxed feasibility tolerance")
    parser.add_argument("--abstol-inacc", dest="abstol_inacc", type=float,
                        help="relaxed absolute gap tolerance")
    parser.add_argument("--reltol-inacc", dest="reltol_inacc", type=float,
                        help="relaxed relative gap tolerance")
    parser.add_argument("--max-iter", dest="max_iter", type=int,
                        help="outer iteration budget")
    parser.add_argument("--cone-solver", choices=[SOLVER_NAME], default=SOLVER_NAME,
                        help="cone solver backend (only the built-in one)")
    parser.add_argument("-o", "--output-mode", type=int, choices=(0, 1, 2), default=0,
                        help="0: result only; 1: plus stage flags; 2: plus solver iterations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conepid",
        description="Bivariate partial information decomposition estimator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pid = sub.add_parser("pid", help="decompose a distribution from a file")
    p_pid.add_argument("input", help="JSON records or 'x y z p' table")
    p_pid.add_argument("--server", help="base URL of a running service to delegate to")
    _add_tolerance_flags(p_pid)
    p_pid.set_defaults(func=cmd_pid)

    p_gates = sub.add_parser("gates", help="run the paradigmatic gate battery")
    _add_tolerance_flags(p_gates)
    p_gates.set_defaults(func=cmd_gates)

    p_copy = sub.add_parser("copy", help="run one copy-gate instance")
    p_copy.add_argument("m", type=int)
    p_copy.add_argument("n", type=int)
    _add_tolerance_flags(p_copy)
    p_copy.set_defaults(func=cmd_copy)

    p_rand = sub.add_parser("randompdf", help="seeded uniform-simplex sweep")
    p_rand.add_argument("nx", type=int)
    p_rand.add_argument("ny", type=int)
    p_rand.add_argument("nz", type=int)
    p_rand.add_argument("count", type=int)
    p_rand.add_argument("--seed", type=int, default=None,
                        help=f"base seed (default: ${DEFAULT_SEED_ENV} or 0)")
    p_rand.add_argument("--jobs", type=int, default=1, help="parallel solver processes")
    p_rand.add_argument("--csv", help="write per-instance rows and the mean row here")
    _add_tolerance_flags(p_rand)
    p_rand.set_defaults(func=cmd_randompdf)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
