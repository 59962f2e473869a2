"""Dictionary-in, dictionary-out calling convention.

``pid(pdf, **params)`` takes a plain mapping from outcome triplets to
probabilities plus keyword tolerance parameters, and returns the result
record as a dictionary with keys 'SI', 'UIY', 'UIZ', 'CI', 'Num_err' and
'Solver'.  This is a thin wrapper over the estimator; there is a single
source of numerical truth.
"""

from __future__ import annotations

from dataclasses import fields
from typing import Mapping

from . import estimator
from .solver import SolverException, SolverParams

# The keyword parameters a caller may override.
TOLERANCE_KEYS = tuple(f.name for f in fields(SolverParams))
EXTRA_KEYS = ("output", "cone_solver")

BROJA_2PID_Exception = SolverException


def pid(pdf: Mapping, **params) -> dict:
    """Compute the decomposition of ``pdf`` and return the result record.

    Recognized keyword parameters: the tolerance knobs
    feastol, abstol, reltol, feastol_inacc, abstol_inacc, reltol_inacc,
    max_iter, plus 'output' (printing mode 0/1/2) and 'cone_solver'.
    """
    unknown = [k for k in params if k not in TOLERANCE_KEYS + EXTRA_KEYS]
    if unknown:
        raise ValueError(
            f"unknown parameter(s) {unknown}; valid keys are "
            f"{list(TOLERANCE_KEYS + EXTRA_KEYS)}"
        )
    cone_solver = params.pop("cone_solver", estimator.SOLVER_NAME)
    if cone_solver not in (estimator.SOLVER_NAME, "default"):
        raise ValueError(
            f"unsupported cone solver {cone_solver!r}; only "
            f"{estimator.SOLVER_NAME!r} is available"
        )
    output = params.pop("output", 0)
    tolerances = {k: v for k, v in params.items() if k in TOLERANCE_KEYS}
    solver_params = SolverParams(**tolerances)
    result = estimator.pid(pdf, solver_params, output_mode=output)
    return result.to_returndata()
