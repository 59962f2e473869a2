"""Independent brute-force reference minimizer for small instances.

Certifies the barrier solver on desk-scale problems: the feasible polytope
{q >= 0 : marginal equations hold} is parametrized by a particular solution
plus an orthonormal null-space basis, then searched exhaustively on a grid
and polished by grid-level coordinate descent.  Deliberately shares no
machinery with the barrier method it certifies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog

from .distributions import MarginalPair, Triplet
from .model import TripletIndex, admissible_triplets

NULLSPACE_RCOND = 1e-10
MAX_FREE_DIMS = 3
FEAS_SLACK = 1e-12


class DimensionTooLarge(ValueError):
    """Null space has more free dimensions than grid search can afford."""


@dataclass(frozen=True)
class PolytopeParam:
    """q0 + basis @ alpha sweeps the affine hull of the feasible polytope;
    the box [lower, upper] encloses the alpha-values with q >= 0."""

    index: TripletIndex
    q0: np.ndarray
    basis: np.ndarray  # (|T|, d), orthonormal columns
    lower: np.ndarray
    upper: np.ndarray


def _cp_equality_system(m: MarginalPair, index: TripletIndex):
    rows_y = sorted(m.b_y)
    rows_z = sorted(m.b_z, key=lambda c: (repr(c),))
    # Row order does not matter for the oracle; build densely.
    cells_y = {cell: i for i, cell in enumerate(m.b_y)}
    cells_z = {cell: i for i, cell in enumerate(m.b_z)}
    n_rows = len(cells_y) + len(cells_z)
    A = np.zeros((n_rows, len(index)))
    b = np.zeros(n_rows)
    for cell, i in cells_y.items():
        b[i] = m.b_y[cell]
    for cell, i in cells_z.items():
        b[len(cells_y) + i] = m.b_z[cell]
    for j, (x, y, z) in enumerate(index.triplets):
        A[cells_y[(x, y)], j] = 1.0
        A[len(cells_y) + cells_z[(x, z)], j] = 1.0
    return A, b


def parametrize_polytope(m: MarginalPair) -> PolytopeParam:
    """Particular solution, orthonormal null basis and alpha box bounds."""
    index = admissible_triplets(m)
    A, b = _cp_equality_system(m, index)
    q0, *_ = np.linalg.lstsq(A, b, rcond=None)
    basis = sla.null_space(A, rcond=NULLSPACE_RCOND)
    d = basis.shape[1]
    if d > MAX_FREE_DIMS:
        raise DimensionTooLarge(f"{d} free dimensions exceed the desk-scale cap {MAX_FREE_DIMS}")
    lower = np.zeros(d)
    upper = np.zeros(d)
    for i in range(d):
        for sign, out in ((1.0, lower), (-1.0, upper)):
            res = linprog(
                sign * np.eye(d)[i],
                A_ub=-basis,
                b_ub=q0,
                bounds=[(None, None)] * d,
                method="highs",
            )
            if not res.success:
                raise ValueError("polytope bound LP failed")
            out[i] = res.x[i]
    return PolytopeParam(index, q0, basis, lower, upper)


def _group_matrix(index: TripletIndex) -> np.ndarray:
    """0/1 matrix summing q over x within each (y, z) group."""
    groups: dict[tuple, int] = {}
    for (x, y, z) in index.triplets:
        groups.setdefault((y, z), len(groups))
    G = np.zeros((len(groups), len(index)))
    for j, (x, y, z) in enumerate(index.triplets):
        G[groups[(y, z)], j] = 1.0
    return G


def _objective_batch(Q: np.ndarray, G: np.ndarray) -> np.ndarray:
    """sum q ln(q / q(*,y,z)) per row of Q, with 0 ln 0 := 0."""
    Qc = np.maximum(Q, 0.0)
    marg = Qc @ G.T  # (batch, groups)
    marg_full = marg @ G  # broadcast group mass back to triplets
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(Qc > 0.0, Qc * np.log(Qc / marg_full), 0.0)
    return terms.sum(axis=1)


def brute_force_min(
    m: MarginalPair, grid_step: float
) -> tuple[dict[Triplet, float], float]:
    """Exhaustive grid minimum of the conditional-entropy objective.

    Searches q0 + basis @ alpha over the enclosing alpha box at the given
    step (both endpoints included), then runs one coordinate-descent
    refinement pass at grid_step / 100 around the incumbent.  Returns the
    best q (as a triplet map) and its objective value in nats.
    """
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    poly = parametrize_polytope(m)
    index, q0, basis = poly.index, poly.q0, poly.basis
    G = _group_matrix(index)
    d = basis.shape[1]

    if d == 0:
        q_best = np.maximum(q0, 0.0)
        obj = float(_objective_batch(q_best[None, :], G)[0])
        return {t: float(q_best[i]) for i, t in enumerate(index.triplets)}, obj

    axes = []
    for i in range(d):
        n_pts = int(math.floor((poly.upper[i] - poly.lower[i]) / grid_step)) + 1
        ax = poly.lower[i] + grid_step * np.arange(n_pts)
        if ax[-1] < poly.upper[i] - 1e-15:
            ax = np.append(ax, poly.upper[i])
        axes.append(ax)

    best_alpha = None
    best_obj = np.inf
    # Sweep the grid in batches over the first axis to bound memory.
    tail = list(itertools.product(*axes[1:])) if d > 1 else [()]
    tail_arr = np.array(tail) if d > 1 else np.zeros((1, 0))
    batch = max(1, int(2e6 // max(len(tail_arr), 1)))
    for start in range(0, len(axes[0]), batch):
        head = axes[0][start : start + batch]
        alpha = np.empty((len(head) * len(tail_arr), d))
        alpha[:, 0] = np.repeat(head, len(tail_arr))
        if d > 1:
            alpha[:, 1:] = np.tile(tail_arr, (len(head), 1))
        Q = q0[None, :] + alpha @ basis.T
        feas = np.min(Q, axis=1) >= -FEAS_SLACK
        if not np.any(feas):
            continue
        objs = _objective_batch(Q[feas], G)
        k = int(np.argmin(objs))
        if objs[k] < best_obj:
            best_obj = float(objs[k])
            best_alpha = alpha[feas][k].copy()
    if best_alpha is None:
        raise ValueError("no feasible grid point; polytope bounds inconsistent")

    # One refinement pass: coordinate descent on the fine grid.
    fine = grid_step / 100.0
    alpha = best_alpha
    for axis in range(d):
        improved = True
        while improved:
            improved = False
            for direction in (fine, -fine):
                cand = alpha.copy()
                cand[axis] += direction
                qc = q0 + basis @ cand
                if np.min(qc) < -FEAS_SLACK:
                    continue
                obj = float(_objective_batch(qc[None, :], G)[0])
                if obj < best_obj - 1e-15:
                    best_obj = obj
                    alpha = cand
                    improved = True
                    break

    q_best = np.maximum(q0 + basis @ alpha, 0.0)
    return {t: float(q_best[i]) for i, t in enumerate(index.triplets)}, best_obj
