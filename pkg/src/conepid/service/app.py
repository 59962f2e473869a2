"""HTTP front end for the decomposition estimator.

Endpoints wrap the core library one-to-one: POST /pid for a single
distribution, POST /gates/{name} for battery instances, POST /copy and
POST /randompdf for the benchmark families.  The CLI drives the same
handler functions in-process.
"""

from __future__ import annotations

import time

from fastapi import FastAPI, HTTPException

from ..distributions import DistributionError
from ..estimator import MassLoss, PidResult, run_pid
from ..gates import (
    GATE_NAMES,
    InvalidSize,
    UnknownGate,
    copy_gate,
    expected_decomposition,
    gate,
    random_simplex_distribution,
)
from ..solver import SolverException, SolverParams
from .schemas import (
    CopyRequest,
    CopyResponse,
    GateResponse,
    InstanceReport,
    PidRequest,
    PidResponse,
    RandomPdfRequest,
    RandomPdfResponse,
    ReturnData,
    SolverOptions,
    SweepAggregate,
)

app = FastAPI(
    title="conepid",
    description="Bivariate partial information decomposition as a service.",
    version="0.1.0",
)


def _solver_params(options: SolverOptions) -> SolverParams:
    try:
        return SolverParams(**options.overrides())
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _returndata(result: PidResult) -> ReturnData:
    return ReturnData(**result.to_returndata())


def compute_pid(request: PidRequest) -> PidResponse:
    params = _solver_params(request.params)
    raw: dict = {}
    for entry in request.pdf:
        t = entry.triplet()
        raw[t] = raw.get(t, 0.0) + entry.p
    try:
        result, solution = run_pid(raw, params)
    except DistributionError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except (SolverException, MassLoss) as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    return PidResponse(
        returndata=_returndata(result),
        status=solution.status.value,
        status_detail=solution.status_detail,
        iterations=solution.iterations,
        consistency_warning=result.consistency_warning,
    )


def compute_gate(name: str, options: SolverOptions | None = None) -> GateResponse:
    try:
        dist = gate(name)
    except UnknownGate as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc
    params = _solver_params(options or SolverOptions())
    try:
        result, solution = run_pid(dist.entries, params)
    except (SolverException, MassLoss) as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    expected = expected_decomposition(name)
    got = (result.si, result.uiy, result.uiz, result.ci)
    return GateResponse(
        gate=name.upper(),
        returndata=_returndata(result),
        status=solution.status.value,
        iterations=solution.iterations,
        expected=list(expected),
        max_deviation=max(abs(a - b) for a, b in zip(got, expected)),
    )


def compute_copy(request: CopyRequest) -> CopyResponse:
    import math

    try:
        dist = copy_gate(request.m, request.n)
    except InvalidSize as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    params = _solver_params(request.params)
    start = time.perf_counter()
    try:
        result, solution = run_pid(dist.entries, params)
    except (SolverException, MassLoss) as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    seconds = time.perf_counter() - start
    target_y = math.log2(request.m)
    target_z = math.log2(request.n)
    return CopyResponse(
        returndata=_returndata(result),
        status=solution.status.value,
        iterations=solution.iterations,
        seconds=seconds,
        uiy_rel_dev=abs(result.uiy - target_y) / max(target_y, 1.0),
        uiz_rel_dev=abs(result.uiz - target_z) / max(target_z, 1.0),
    )


def compute_randompdf(request: RandomPdfRequest) -> RandomPdfResponse:
    params = _solver_params(request.params)
    instances: list[InstanceReport] = []
    sums = [0.0, 0.0, 0.0, 0.0, 0.0]
    solved = 0
    for i in range(request.count):
        seed = request.seed + i
        dist = random_simplex_distribution(request.nx, request.ny, request.nz, seed)
        start = time.perf_counter()
        try:
            result, solution = run_pid(dist.entries, params)
        except Exception as exc:  # a failed instance must not end the sweep
            instances.append(
                InstanceReport(
                    seed=seed,
                    returndata=None,
                    status="error",
                    seconds=time.perf_counter() - start,
                    error=str(exc),
                )
            )
            continue
        seconds = time.perf_counter() - start
        instances.append(
            InstanceReport(
                seed=seed,
                returndata=_returndata(result),
                status=solution.status.value,
                seconds=seconds,
            )
        )
        solved += 1
        for j, v in enumerate((result.si, result.uiy, result.uiz, result.ci, seconds)):
            sums[j] += v
    if solved == 0:
        raise HTTPException(status_code=500, detail="no instance solved")
    aggregate = SweepAggregate(
        si_mean=sums[0] / solved,
        uiy_mean=sums[1] / solved,
        uiz_mean=sums[2] / solved,
        ci_mean=sums[3] / solved,
        seconds_mean=sums[4] / solved,
        solved=solved,
        failed=request.count - solved,
    )
    return RandomPdfResponse(instances=instances, aggregate=aggregate)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/gates")
def list_gates() -> dict:
    return {"gates": list(GATE_NAMES)}


@app.post("/pid", response_model=PidResponse)
def pid_endpoint(request: PidRequest) -> PidResponse:
    return compute_pid(request)


@app.post("/gates/{name}", response_model=GateResponse)
def gate_endpoint(name: str, params: SolverOptions | None = None) -> GateResponse:
    return compute_gate(name, params)


@app.post("/copy", response_model=CopyResponse)
def copy_endpoint(request: CopyRequest) -> CopyResponse:
    return compute_copy(request)


@app.post("/randompdf", response_model=RandomPdfResponse)
def randompdf_endpoint(request: RandomPdfRequest) -> RandomPdfResponse:
    return compute_randompdf(request)
