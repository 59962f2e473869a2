"""Assembly of the exponential-cone program from a marginal pair.

Variables come in one (r, p, q) block per admissible triplet; a triplet
(x, y, z) is admissible iff b_y(x, y) > 0 and b_z(x, z) > 0.  Any feasible
q must vanish outside this set, and keeping exactly this set guarantees the
positivity assumptions of the interior starting point below.

The equality system stacks, in order: XY-marginal rows, XZ-marginal rows,
then one coupling row  sum_x' q(x', y, z) - p(x, y, z) = 0  per triplet.
All coefficients are in {-1, 0, +1}.  One marginal row per x-symbol is
linearly redundant; rows are deliberately not dropped so that the dual
multipliers stay aligned one-to-one with the marginal cells, and the solver
uses regularized linear algebra instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .distributions import (
    MarginalPair,
    Symbol,
    Triplet,
    symbol_sort_key,
    triplet_sort_key,
)


class EmptyModel(ValueError):
    """No admissible triplet."""


class InfeasiblePoint(ValueError):
    """Point does not satisfy the marginal equations to tolerance."""


@dataclass(frozen=True)
class TripletIndex:
    """Canonically ordered admissible triplets and their positions."""

    triplets: tuple[Triplet, ...]
    position: dict[Triplet, int]

    def __len__(self) -> int:
        return len(self.triplets)


@dataclass(frozen=True)
class GenericConeProgram:
    """A cone program min c'w s.t. Aw = b, w in a product of 3-dim cones."""

    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    cone_blocks: tuple[int, ...]  # start offset of each (r, p, q) block

    def __post_init__(self) -> None:
        n = self.c.shape[0]
        if self.A.shape != (self.b.shape[0], n):
            raise ValueError("inconsistent program dimensions")
        if len(self.cone_blocks) * 3 != n:
            raise ValueError("cone blocks do not tile the variable vector")


@dataclass(frozen=True)
class ExpConeModel:
    """One instance of the decomposition cone program.

    Variable layout: block i holds (r_i, p_i, q_i) at columns
    (3i, 3i+1, 3i+2), with i the triplet position in ``index``.
    Immutable after build; shareable across threads.
    """

    index: TripletIndex
    marginals: MarginalPair
    rows_y: tuple[tuple[Symbol, Symbol], ...]
    rows_z: tuple[tuple[Symbol, Symbol], ...]
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray

    @property
    def n_triplets(self) -> int:
        return len(self.index)

    @property
    def n_vars(self) -> int:
        return 3 * len(self.index)

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def to_cone_program(self) -> GenericConeProgram:
        return GenericConeProgram(
            self.c, self.A, self.b, tuple(3 * i for i in range(len(self.index)))
        )

    def q_values(self, w: np.ndarray) -> np.ndarray:
        """The q-coordinates of a stacked (T, 3) or flat (3T,) iterate."""
        return np.asarray(w).reshape(-1, 3)[:, 2]


def admissible_triplets(m: MarginalPair) -> TripletIndex:
    """Cross-support rule: (x, y, z) iff b_y(x, y) > 0 and b_z(x, z) > 0."""
    ys_of_x: dict[Symbol, list[Symbol]] = {}
    zs_of_x: dict[Symbol, list[Symbol]] = {}
    for (x, y) in m.b_y:
        ys_of_x.setdefault(x, []).append(y)
    for (x, z) in m.b_z:
        zs_of_x.setdefault(x, []).append(z)
    triplets = [
        (x, y, z)
        for x in ys_of_x
        if x in zs_of_x
        for y in ys_of_x[x]
        for z in zs_of_x[x]
    ]
    triplets.sort(key=triplet_sort_key)
    return TripletIndex(tuple(triplets), {t: i for i, t in enumerate(triplets)})


def build_model(m: MarginalPair) -> ExpConeModel:
    """Assemble objective, equality system and cone blocks for the pair."""
    index = admissible_triplets(m)
    nt = len(index)
    if nt == 0:
        raise EmptyModel("no (x, y, z) with both marginal cells positive")

    cell_key = lambda cell: (symbol_sort_key(cell[0]), symbol_sort_key(cell[1]))
    rows_y = tuple(sorted(m.b_y, key=cell_key))
    rows_z = tuple(sorted(m.b_z, key=cell_key))
    row_of_y = {cell: i for i, cell in enumerate(rows_y)}
    row_of_z = {cell: i for i, cell in enumerate(rows_z)}
    off_z = len(rows_y)
    off_c = off_z + len(rows_z)
    n_rows = off_c + nt
    n_vars = 3 * nt

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    # Group triplet positions by (y, z) for the coupling rows.
    group_of_yz: dict[tuple[Symbol, Symbol], list[int]] = {}
    for i, (x, y, z) in enumerate(index.triplets):
        rows.append(row_of_y[(x, y)])
        cols.append(3 * i + 2)
        vals.append(1.0)
        rows.append(off_z + row_of_z[(x, z)])
        cols.append(3 * i + 2)
        vals.append(1.0)
        group_of_yz.setdefault((y, z), []).append(i)
    for i, (x, y, z) in enumerate(index.triplets):
        for j in group_of_yz[(y, z)]:
            rows.append(off_c + i)
            cols.append(3 * j + 2)
            vals.append(1.0)
        rows.append(off_c + i)
        cols.append(3 * i + 1)
        vals.append(-1.0)

    A = sp.csr_matrix((vals, (rows, cols)), shape=(n_rows, n_vars))
    b = np.zeros(n_rows)
    b[: off_z] = [m.b_y[cell] for cell in rows_y]
    b[off_z:off_c] = [m.b_z[cell] for cell in rows_z]

    c = np.zeros(n_vars)
    c[0::3] = -1.0

    return ExpConeModel(index, m, rows_y, rows_z, c, A, b)


def initial_point(m: MarginalPair, index: TripletIndex | None = None) -> np.ndarray:
    """Strictly interior starting point, shape (T, 3).

    Per admissible triplet:
        q0(x,y,z) = b_y(x,y) b_z(x,z) / b_y(x,*)
        p0(x,y,z) = q0(*,y,z)
        r0(x,y,z) = q0 ln(p0/q0) - 100
    The marginal and coupling equations hold exactly (the q0 formula makes
    the row sums telescope because sum_z b_z(x,z) = b_y(x,*)), and every
    cone block has slack exactly 100.
    """
    if index is None:
        index = admissible_triplets(m)
    x_mass = m.x_mass()
    nt = len(index)
    w = np.empty((nt, 3))
    for i, (x, y, z) in enumerate(index.triplets):
        w[i, 2] = m.b_y[(x, y)] * m.b_z[(x, z)] / x_mass[x]
    # p0 = group sum of q0 over x for the shared (y, z).
    group_sum: dict[tuple[Symbol, Symbol], float] = {}
    for i, (x, y, z) in enumerate(index.triplets):
        group_sum[(y, z)] = group_sum.get((y, z), 0.0) + w[i, 2]
    for i, (x, y, z) in enumerate(index.triplets):
        w[i, 1] = group_sum[(y, z)]
    w[:, 0] = w[:, 2] * np.log(w[:, 1] / w[:, 2]) - 100.0
    return w


def embed_cp_point(q, m: MarginalPair, index: TripletIndex | None = None) -> np.ndarray:
    """Embed a feasible point of the entropy program into the cone program.

    ``q`` maps admissible triplets to probabilities (missing keys are zero).
    The image block is (q ln(q(*,y,z)/q), q(*,y,z), q) where q > 0 and
    (0, q(*,y,z), 0) where q = 0, so the cone-program objective -sum r
    equals the entropy-program objective at q.
    """
    if index is None:
        index = admissible_triplets(m)
    if hasattr(q, "entries"):
        q = q.entries
    extra = [t for t in q if t not in index.position and q[t] > 1e-12]
    if extra:
        raise InfeasiblePoint(f"mass on inadmissible triplets, e.g. {extra[0]!r}")
    qv = np.zeros(len(index))
    for t, v in q.items():
        if v < -1e-12:
            raise InfeasiblePoint(f"negative mass at {t!r}")
        if t in index.position:
            qv[index.position[t]] = max(float(v), 0.0)

    res_y: dict[tuple[Symbol, Symbol], float] = dict(m.b_y)
    res_z: dict[tuple[Symbol, Symbol], float] = dict(m.b_z)
    group_sum: dict[tuple[Symbol, Symbol], float] = {}
    for i, (x, y, z) in enumerate(index.triplets):
        res_y[(x, y)] -= qv[i]
        res_z[(x, z)] -= qv[i]
        group_sum[(y, z)] = group_sum.get((y, z), 0.0) + qv[i]
    worst = max(
        max((abs(v) for v in res_y.values()), default=0.0),
        max((abs(v) for v in res_z.values()), default=0.0),
    )
    if worst > 1e-9:
        raise InfeasiblePoint(f"marginal residual {worst:.3e} exceeds 1e-9")

    w = np.zeros((len(index), 3))
    for i, (x, y, z) in enumerate(index.triplets):
        qs = group_sum[(y, z)]
        w[i, 1] = qs
        if qv[i] > 0.0:
            w[i, 0] = qv[i] * math.log(qs / qv[i])
            w[i, 2] = qv[i]
    return w
