"""Solution-quality audits: the numerical-error triple reported alongside
every decomposition.

The triple is (primal feasibility violation, dual feasibility violation,
duality-gap violation).  Primal and gap violations are maxima against zero,
the dual violation is a minimum against zero.  Coupling equations are not
audited: they merely assign values to the p-variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .distributions import MarginalPair, Symbol, Triplet
from .model import TripletIndex

# A dual multiplier mu >= -MU_DOMAIN_FLOOR has left the domain of ln(-mu);
# the audit then reports this sentinel instead of aborting, so that failed
# solves still come back with (large) error numbers.
MU_DOMAIN_FLOOR = 1e-300
DUAL_DOMAIN_SENTINEL = -1e308


@dataclass(frozen=True)
class NumErr:
    """Audit triple; ``dual_domain_violation`` flags a ln(-mu) domain breach."""

    primal_violation: float
    dual_violation: float
    gap_violation: float
    dual_domain_violation: bool = False

    def as_triple(self) -> tuple[float, float, float]:
        return (self.primal_violation, self.dual_violation, self.gap_violation)

    def max_component(self) -> float:
        return max(self.primal_violation, -self.dual_violation, self.gap_violation)


def _clipped_marginal_residuals(
    q: np.ndarray, index: TripletIndex, m: MarginalPair
) -> tuple[dict, dict]:
    qc = np.maximum(q, 0.0)
    res_y = {cell: -v for cell, v in m.b_y.items()}
    res_z = {cell: -v for cell, v in m.b_z.items()}
    for i, (x, y, z) in enumerate(index.triplets):
        res_y[(x, y)] += qc[i]
        res_z[(x, z)] += qc[i]
    return res_y, res_z


def primal_violation(q: np.ndarray, index: TripletIndex, m: MarginalPair) -> float:
    """max over cells of |q'(x,y,*) - b_y|, |q'(x,*,z) - b_z| and -q(x,y,z),
    where q' is q clipped at zero."""
    q = np.asarray(q, dtype=float)
    res_y, res_z = _clipped_marginal_residuals(q, index, m)
    worst = max(
        max(abs(v) for v in res_y.values()),
        max(abs(v) for v in res_z.values()),
    )
    return max(worst, float(np.max(-q)))


def dual_violation(
    lambda_y: Mapping[tuple[Symbol, Symbol], float],
    lambda_z: Mapping[tuple[Symbol, Symbol], float],
    mu: Mapping[Triplet, float],
) -> float:
    """min over triplets of (lambda_xy + lambda_xz + mu(*,y,z) + 1 + ln(-mu), 0).

    Entries with mu outside the domain of ln(-mu) contribute the sentinel
    -1e308; callers flag this as a dual domain violation.
    """
    mu_yz: dict[tuple[Symbol, Symbol], float] = {}
    for (x, y, z), v in mu.items():
        mu_yz[(y, z)] = mu_yz.get((y, z), 0.0) + v
    worst = 0.0
    for (x, y, z), v in mu.items():
        if v >= -MU_DOMAIN_FLOOR:
            return DUAL_DOMAIN_SENTINEL
        row = lambda_y[(x, y)] + lambda_z[(x, z)] + mu_yz[(y, z)] + 1.0 + math.log(-v)
        worst = min(worst, row)
    return worst


def gap_violation(
    q: np.ndarray,
    index: TripletIndex,
    lambda_y: Mapping[tuple[Symbol, Symbol], float],
    lambda_z: Mapping[tuple[Symbol, Symbol], float],
    m: MarginalPair,
) -> float:
    """max(-H(X|Y,Z) + lambda'b, 0), with H computed from the positive part
    of q only and lambda'b = sum lambda_y b_y + sum lambda_z b_z."""
    q = np.asarray(q, dtype=float)
    group: dict[tuple[Symbol, Symbol], float] = {}
    for i, (x, y, z) in enumerate(index.triplets):
        if q[i] > 0.0:
            group[(y, z)] = group.get((y, z), 0.0) + q[i]
    neg_h = math.fsum(
        q[i] * math.log(q[i] / group[(y, z)])
        for i, (x, y, z) in enumerate(index.triplets)
        if q[i] > 0.0
    )
    lam_b = math.fsum(lambda_y[c] * m.b_y[c] for c in m.b_y) + math.fsum(
        lambda_z[c] * m.b_z[c] for c in m.b_z
    )
    return max(neg_h + lam_b, 0.0)


def audit(
    q: np.ndarray,
    index: TripletIndex,
    lambda_y: Mapping[tuple[Symbol, Symbol], float],
    lambda_z: Mapping[tuple[Symbol, Symbol], float],
    mu: Mapping[Triplet, float],
    m: MarginalPair,
) -> NumErr:
    """Assemble the full audit triple for one primal-dual pair."""
    dv = dual_violation(lambda_y, lambda_z, mu)
    return NumErr(
        primal_violation=primal_violation(q, index, m),
        dual_violation=dv,
        gap_violation=gap_violation(q, index, lambda_y, lambda_z, m),
        dual_domain_violation=(dv == DUAL_DOMAIN_SENTINEL),
    )
