"""Pydantic request/response models for the decomposition service.

Outcome labels travel as JSON scalars or arrays; arrays become tuples on
the way in so composite labels like (0, 1) survive the round trip.
"""

from __future__ import annotations

from typing import Any, Union

from pydantic import BaseModel, Field, field_validator

Label = Union[int, str, float, list]


def _freeze(label: Any) -> Any:
    if isinstance(label, list):
        return tuple(_freeze(v) for v in label)
    return label


class DistributionEntry(BaseModel):
    x: Label
    y: Label
    z: Label
    p: float = Field(ge=0.0)

    def triplet(self) -> tuple:
        return (_freeze(self.x), _freeze(self.y), _freeze(self.z))


class SolverOptions(BaseModel):
    feastol: float | None = Field(default=None, gt=0.0)
    abstol: float | None = Field(default=None, gt=0.0)
    reltol: float | None = Field(default=None, gt=0.0)
    feastol_inacc: float | None = Field(default=None, gt=0.0)
    abstol_inacc: float | None = Field(default=None, gt=0.0)
    reltol_inacc: float | None = Field(default=None, gt=0.0)
    max_iter: int | None = Field(default=None, ge=1)

    def overrides(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class ReturnData(BaseModel):
    """The canonical result record."""

    SI: float
    UIY: float
    UIZ: float
    CI: float
    Num_err: list[float]
    Solver: str

    @field_validator("Num_err")
    @classmethod
    def _three_components(cls, v: list[float]) -> list[float]:
        if len(v) != 3:
            raise ValueError("Num_err must have exactly three components")
        return v


class PidRequest(BaseModel):
    pdf: list[DistributionEntry]
    params: SolverOptions = SolverOptions()


class PidResponse(BaseModel):
    returndata: ReturnData
    status: str
    status_detail: str
    iterations: int
    consistency_warning: str | None = None


class GateResponse(BaseModel):
    gate: str
    returndata: ReturnData
    status: str
    iterations: int
    expected: list[float]
    max_deviation: float


class CopyRequest(BaseModel):
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    params: SolverOptions = SolverOptions()


class CopyResponse(BaseModel):
    returndata: ReturnData
    status: str
    iterations: int
    seconds: float
    uiy_rel_dev: float
    uiz_rel_dev: float


class RandomPdfRequest(BaseModel):
    nx: int = Field(ge=1)
    ny: int = Field(ge=1)
    nz: int = Field(ge=1)
    count: int = Field(ge=1)
    seed: int = 0
    params: SolverOptions = SolverOptions()


class InstanceReport(BaseModel):
    seed: int
    returndata: ReturnData | None
    status: str
    seconds: float
    error: str | None = None


class SweepAggregate(BaseModel):
    si_mean: float
    uiy_mean: float
    uiz_mean: float
    ci_mean: float
    seconds_mean: float
    solved: int
    failed: int


class RandomPdfResponse(BaseModel):
    instances: list[InstanceReport]
    aggregate: SweepAggregate
