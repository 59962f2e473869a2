"""Exponential-cone primitives: membership tests for the cone and its dual,
and the degree-3 logarithmically homogeneous barrier with exact derivatives.

The cone is K = cl{(r, p, q) : q > 0, q e^{r/q} <= p}; its dual is
K* = cl{(u, v, w) : u < 0, -u e^{w/u} <= e v}.  One (r, p, q) block is
attached to every outcome triplet of the decomposition program.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class ConePoint(NamedTuple):
    r: float
    p: float
    q: float


class DualConePoint(NamedTuple):
    u: float
    v: float
    w: float


class BoundaryPoint(ArithmeticError):
    """Barrier evaluated at a point that is not strictly interior.

    Raised instead of clamping the log argument: a silently clamped barrier
    corrupts Newton directions, whereas this exception tells the solver to
    shrink its step.
    """


class BarrierEval(NamedTuple):
    value: float
    gradient: np.ndarray  # shape (3,), d/d(r, p, q)
    hessian: np.ndarray  # shape (3, 3)


def in_exp_cone(pt, tol: float) -> bool:
    """Membership in K up to an additive slack ``tol``.

    True iff (q > 0 and q e^{r/q} <= p + tol) or
    (|q| <= tol and r <= tol and p >= -tol).
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    r, p, q = pt
    if q > 0.0:
        # Equivalent log form of q e^{r/q} <= p + tol; avoids overflow in exp.
        if p + tol > 0.0 and r <= q * math.log((p + tol) / q):
            return True
    return abs(q) <= tol and r <= tol and p >= -tol


def in_dual_exp_cone(pt, tol: float) -> bool:
    """Membership in K* up to an additive slack ``tol``.

    True iff (u < 0 and -u e^{w/u} <= e v + tol) or
    (|u| <= tol and v >= -tol and w >= -tol).
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    u, v, w = pt
    if u < 0.0:
        bound = math.e * v + tol
        # -u e^{w/u} <= bound  <=>  w >= u ln(bound / -u)   (u < 0 flips)
        if bound > 0.0 and w >= u * math.log(bound / -u):
            return True
    return abs(u) <= tol and v >= -tol and w >= -tol


def barrier_batch(rpq: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Barrier F = -ln(q ln(p/q) - r) - ln p - ln q summed over blocks.

    ``rpq`` has shape (T, 3).  Returns (value, gradient (T, 3), Hessian
    blocks (T, 3, 3)).  F is logarithmically homogeneous of degree 3 per
    block.  Raises BoundaryPoint if any block is not strictly interior.
    """
    r = rpq[:, 0]
    p = rpq[:, 1]
    q = rpq[:, 2]
    if np.any(p <= 0.0) or np.any(q <= 0.0):
        raise BoundaryPoint("p or q not strictly positive")
    ell = np.log(p / q)
    s = q * ell - r
    if np.any(s <= 0.0):
        raise BoundaryPoint("cone slack q ln(p/q) - r not strictly positive")

    value = -(np.sum(np.log(s)) + np.sum(np.log(p)) + np.sum(np.log(q)))

    u = 1.0 / s
    a = q / p  # d s / d p
    lm = ell - 1.0  # d s / d q
    grad = np.empty_like(rpq)
    grad[:, 0] = u
    grad[:, 1] = -u * a - 1.0 / p
    grad[:, 2] = -u * lm - 1.0 / q

    # Hessian = u^2 * outer(ds, ds) - u * Hess(s) + diag(0, 1/p^2, 1/q^2)
    # with ds = (-1, a, lm) and Hess(s) having entries
    # s_pp = -q/p^2, s_pq = 1/p, s_qq = -1/q (zero elsewhere).
    u2 = u * u
    hess = np.empty((rpq.shape[0], 3, 3))
    hess[:, 0, 0] = u2
    hess[:, 0, 1] = hess[:, 1, 0] = -u2 * a
    hess[:, 0, 2] = hess[:, 2, 0] = -u2 * lm
    hess[:, 1, 1] = u2 * a * a + u * a / p + 1.0 / (p * p)
    hess[:, 1, 2] = hess[:, 2, 1] = u2 * a * lm - u / p
    hess[:, 2, 2] = u2 * lm * lm + u / q + 1.0 / (q * q)
    return float(value), grad, hess


def barrier_value(rpq: np.ndarray) -> float:
    """Barrier value only (used in line searches)."""
    r = rpq[:, 0]
    p = rpq[:, 1]
    q = rpq[:, 2]
    if np.any(p <= 0.0) or np.any(q <= 0.0):
        raise BoundaryPoint("p or q not strictly positive")
    s = q * np.log(p / q) - r
    if np.any(s <= 0.0):
        raise BoundaryPoint("cone slack q ln(p/q) - r not strictly positive")
    return float(-(np.sum(np.log(s)) + np.sum(np.log(p)) + np.sum(np.log(q))))


def cone_slacks(rpq: np.ndarray) -> np.ndarray:
    """Per-block slack q ln(p/q) - r (positive strictly inside K)."""
    return rpq[:, 2] * np.log(rpq[:, 1] / rpq[:, 2]) - rpq[:, 0]


def barrier(pt) -> BarrierEval:
    """Barrier value, gradient and Hessian at one strictly interior point."""
    r, p, q = pt
    value, grad, hess = barrier_batch(np.array([[r, p, q]], dtype=float))
    return BarrierEval(value, grad[0], hess[0])
