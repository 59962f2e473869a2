"""End-to-end decomposition workflow: distribution in, four-part
decomposition plus quality audit out.

Internal computation is in nats throughout; the result is converted to bits
at this boundary.  With q* the optimizer of the entropy program:

    UIY = MI_q*(X;Y|Z)            unique information of Y
    UIZ = MI_q*(X;Z|Y)            unique information of Z
    CI  = MI_p(X;Y,Z) - MI_q*(X;Y,Z)   synergy
    SI  = MI_p(X;Y) - UIY         shared information

UIY/UIZ are computed as conditional mutual informations of the cleaned q*
rather than by entropy subtraction; the subtraction identity
SI = MI_p(X;Z) - UIZ is kept as a cross-check.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .distributions import (
    JointDistribution,
    Triplet,
    build_distribution,
    marginals,
    mutual_information,
)
from .model import TripletIndex, build_model
from .quality import NumErr
from .solver import (
    SOLVER_NAME,
    PrimalDualSolution,
    SolverParams,
    Status,
    solve,
)

LN2 = math.log(2.0)
MASS_LOSS_TOL = 1e-6
CONSISTENCY_TOL = 1e-6  # bits, on the SI cross-check


class MassLoss(ValueError):
    """Clipped optimizer mass deviates from 1 by more than the tolerance."""


@dataclass(frozen=True)
class PidResult:
    """Four-part decomposition in bits plus solver metadata.

    ``consistency_warning`` is set when the two ways of computing the
    shared information disagree beyond tolerance.
    """

    si: float
    uiy: float
    uiz: float
    ci: float
    num_err: NumErr
    solver: str
    iterations: int
    status: Status = Status.OPTIMAL
    status_detail: str = ""
    consistency_warning: str | None = None

    def to_returndata(self) -> dict:
        """The canonical result record: SI, UIY, UIZ, CI, Num_err, Solver."""
        return {
            "SI": self.si,
            "UIY": self.uiy,
            "UIZ": self.uiz,
            "CI": self.ci,
            "Num_err": list(self.num_err.as_triple()),
            "Solver": self.solver,
        }


def decompose(
    p: JointDistribution,
    qstar: np.ndarray,
    index: TripletIndex,
    num_err: NumErr,
    solver: str = SOLVER_NAME,
    iterations: int = 0,
    status: Status = Status.OPTIMAL,
    status_detail: str = "",
) -> PidResult:
    """Convert an optimizer q* (per-triplet, aligned with ``index``) into the
    decomposition.  Negative entries are clipped, zeros dropped and the rest
    renormalized before any information quantity is computed."""
    q = np.maximum(np.asarray(qstar, dtype=float), 0.0)
    mass = float(q.sum())
    if abs(mass - 1.0) > MASS_LOSS_TOL:
        raise MassLoss(f"clipped optimizer mass {mass!r} deviates from 1 beyond {MASS_LOSS_TOL}")
    entries = {
        t: float(q[i] / mass) for i, t in enumerate(index.triplets) if q[i] > 0.0
    }
    qdist = build_distribution(entries)

    uiy = mutual_information(qdist, "x;y|z")
    uiz = mutual_information(qdist, "x;z|y")
    ci = mutual_information(p, "x;yz") - mutual_information(qdist, "x;yz")
    si = mutual_information(p, "x;y") - uiy
    si_check = mutual_information(p, "x;z") - uiz

    warning = None
    if abs(si - si_check) / LN2 > CONSISTENCY_TOL:
        warning = (
            f"shared-information cross-check mismatch: "
            f"{si / LN2:.9g} vs {si_check / LN2:.9g} bits"
        )
    return PidResult(
        si=si / LN2,
        uiy=uiy / LN2,
        uiz=uiz / LN2,
        ci=ci / LN2,
        num_err=num_err,
        solver=solver,
        iterations=iterations,
        status=status,
        status_detail=status_detail,
        consistency_warning=warning,
    )


def _format_returndata(result: PidResult) -> str:
    import json

    return json.dumps(result.to_returndata())


def pid(
    pdf: Mapping[Triplet, float],
    params: SolverParams | None = None,
    output_mode: int = 0,
    stream=None,
) -> PidResult:
    """Full workflow: validate, take marginals, build the cone program,
    solve, audit, decompose.

    output_mode 0 prints the result record; 1 additionally prints stage
    flags; 2 additionally prints per-iteration solver statistics.
    """
    if output_mode not in (0, 1, 2):
        raise ValueError("output_mode must be 0, 1 or 2")
    out = stream if stream is not None else sys.stdout
    dist = build_distribution(pdf)
    if output_mode >= 1:
        print("preparing model", file=out)
    model = build_model(marginals(dist))
    if output_mode >= 1:
        print("calling solver", file=out)
    solution = solve(model, params)
    if output_mode >= 2:
        for k, rec in enumerate(solution.trace):
            print(
                f"iter {k + 1}: t={rec.t:.3e} newton={rec.newton_steps} "
                f"gap={rec.gap:.6e} bound={rec.gap_bound:.6e} "
                f"primal={rec.objective_primal:.9e} dual={rec.objective_dual:.9e}",
                file=out,
            )
    result = decompose(
        dist,
        solution.q,
        model.index,
        solution.num_err,
        solver=SOLVER_NAME,
        iterations=solution.iterations,
        status=solution.status,
        status_detail=solution.status_detail,
    )
    print(_format_returndata(result), file=out)
    return result


def run_pid(
    pdf: Mapping[Triplet, float], params: SolverParams | None = None
) -> tuple[PidResult, PrimalDualSolution]:
    """Non-printing variant of :func:`pid` that also returns the raw solve."""
    dist = build_distribution(pdf)
    model = build_model(marginals(dist))
    solution = solve(model, params)
    result = decompose(
        dist,
        solution.q,
        model.index,
        solution.num_err,
        solver=SOLVER_NAME,
        iterations=solution.iterations,
        status=solution.status,
        status_detail=solution.status_detail,
    )
    return result, solution
