"""Primal path-following barrier solver for the decomposition cone program.

The method minimizes t * c'w + F(w) over the affine set Aw = b for an
increasing sequence of barrier parameters t, where F is the degree-3
logarithmically homogeneous barrier of the exponential cone applied
blockwise.  Newton steps stay in the null space of A (the start point is
exactly feasible), so primal equality residuals remain at roundoff level
throughout.

On the central path every block has cone slack exactly 1/t, the duality gap
equals (3 |T|) / t, and the multipliers of the centering KKT system scaled
by 1/t are feasible for the dual program; the solver stops once that gap
bound drops below the requested tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cone import BoundaryPoint, barrier_batch, barrier_value, cone_slacks
from .distributions import Symbol, Triplet
from .model import ExpConeModel, initial_point
from .quality import NumErr, audit

T0 = 1.0  # initial barrier parameter
SIGMA = 10.0  # barrier parameter growth per outer round
NEWTON_TOL = 1e-10  # inner tolerance on the Newton decrement
FRACTION_TO_BOUNDARY = 0.99
ARMIJO_SLOPE = 0.01
KKT_REGULARIZATION = 1e-10
DENSE_KKT_DIM = 400  # at or below this the KKT factorization runs dense
MAX_INNER_STEPS = 200
T_CEILING = 1e40
UNCENTERED_MAX = 1e-2  # a round ending above this decrement is not centered
SLACK_DIVE = 0.01  # line-search floor on cone slack, relative to 1/t

SOLVER_NAME = "conepid-expcone-barrier"


class SolverException(Exception):
    """No iterate at all could be produced for this model."""


class IllConditionedKKT(ArithmeticError):
    """The centering KKT system could not be solved reliably."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    OPTIMAL_INACCURATE = "optimal_inaccurate"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class SolverParams:
    """Tolerances and iteration budget.

    feastol: primal/dual feasibility tolerance.
    abstol / reltol: absolute / relative tolerance on the duality gap.
    *_inacc: relaxed counterparts used to grade a solution that ran out of
    iterations.  max_iter counts outer (barrier-parameter) rounds.
    """

    feastol: float = 1e-7
    abstol: float = 1e-6
    reltol: float = 1e-6
    feastol_inacc: float = 1e-3
    abstol_inacc: float = 1e-4
    reltol_inacc: float = 1e-4
    max_iter: int = 100

    def __post_init__(self) -> None:
        for name in ("feastol", "abstol", "reltol", "feastol_inacc", "abstol_inacc", "reltol_inacc"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.feastol_inacc < self.feastol:
            raise ValueError("feastol_inacc must be >= feastol")
        if self.abstol_inacc < self.abstol:
            raise ValueError("abstol_inacc must be >= abstol")
        if self.reltol_inacc < self.reltol:
            raise ValueError("reltol_inacc must be >= reltol")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class DualVariables:
    lambda_y: dict[tuple[Symbol, Symbol], float]
    lambda_z: dict[tuple[Symbol, Symbol], float]
    mu: dict[Triplet, float]
    nu: np.ndarray  # (T, 3) dual-cone blocks


@dataclass(frozen=True)
class BarrierState:
    """A strictly interior iterate with its KKT multipliers at parameter t."""

    model: ExpConeModel
    w: np.ndarray  # flat, length 3|T|
    y: np.ndarray  # equality multipliers, length n_rows
    t: float


@dataclass(frozen=True)
class IterateRecord:
    """Per-outer-round audit snapshot (the 'audited iterates')."""

    t: float
    newton_steps: int
    decrement: float
    objective_primal: float
    objective_dual: float
    gap: float
    gap_bound: float
    num_err: NumErr
    nu_in_dual_cone: bool


@dataclass(frozen=True)
class PrimalDualSolution:
    primal: np.ndarray  # (T, 3) blocks (r, p, q)
    lambda_y: dict[tuple[Symbol, Symbol], float]
    lambda_z: dict[tuple[Symbol, Symbol], float]
    mu: dict[Triplet, float]
    nu: np.ndarray  # (T, 3)
    status: Status
    status_detail: str
    iterations: int
    newton_steps: int
    objective_primal: float
    objective_dual: float
    num_err: NumErr
    trace: tuple[IterateRecord, ...] = field(repr=False, default=())

    @property
    def q(self) -> np.ndarray:
        return self.primal[:, 2]

    @property
    def duality_gap(self) -> float:
        return self.objective_primal - self.objective_dual


class _KKTSolver:
    """Centering step solver for the t-scaled KKT system

        [ H/t  A' ] [dw ]   [ -(c + grad F / t) ]
        [ A    0  ] [eta] = [ -r_eq             ]

    Working with H/t and eta = y/t keeps every residual at O(1) scale no
    matter how far the barrier parameter has grown; the raw system has
    gradients of size t and float64 residual arithmetic dies at large t.
    The augmented matrix is Ruiz-equilibrated, shifted by -delta on the
    dual diagonal (the equality system is rank-deficient by one row per
    x-symbol), factored by sparse LU, and the shift is removed again by
    iterative refinement against the exact unregularized residuals.
    """

    def __init__(self, model: ExpConeModel):
        self.A = model.A.tocsr()
        self.AT = self.A.T.tocsr()
        self.m, self.n = self.A.shape
        self.nt = self.n // 3
        self.dim = self.n + self.m
        self.dense = self.dim <= DENSE_KKT_DIM

        # Fixed sparsity of [[H/t, A'], [A, -reg I]]: Hessian blocks first,
        # then A', then A, then the dual diagonal slots.
        blk = np.arange(self.nt, dtype=np.int64) * 3
        ii, jj = np.meshgrid(np.arange(3), np.arange(3), indexing="ij")
        h_rows = (blk[:, None, None] + ii[None]).ravel()
        h_cols = (blk[:, None, None] + jj[None]).ravel()
        acoo = model.A.tocoo()
        self._a_vals = acoo.data.copy()
        dual = self.n + np.arange(self.m, dtype=np.int64)
        self._rows = np.concatenate([h_rows, acoo.col, self.n + acoo.row, dual])
        self._cols = np.concatenate([h_cols, self.n + acoo.row, acoo.col, dual])
        # Row-max machinery for Ruiz equilibration (K is symmetric).
        self._order = np.argsort(self._rows, kind="stable")
        sorted_rows = self._rows[self._order]
        starts = np.flatnonzero(np.r_[True, sorted_rows[1:] != sorted_rows[:-1]])
        self._row_starts = starts
        self._row_ids = sorted_rows[starts]

    def _assemble_data(self, hess_scaled: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [hess_scaled.ravel(), self._a_vals, self._a_vals, np.zeros(self.m)]
        )

    def _equilibrate(self, data: np.ndarray, passes: int = 2) -> np.ndarray:
        d = np.ones(self.dim)
        for _ in range(passes):
            row_max = np.zeros(self.dim)
            row_max[self._row_ids] = np.maximum.reduceat(
                np.abs(data[self._order]), self._row_starts
            )
            row_max[row_max <= 0.0] = 1.0
            s = 1.0 / np.sqrt(row_max)
            data *= s[self._rows] * s[self._cols]
            d *= s
        return d

    def _factor(self, hess_scaled: np.ndarray):
        data = self._assemble_data(hess_scaled)
        d = self._equilibrate(data)
        reg = KKT_REGULARIZATION
        for _ in range(5):
            data[-self.m :] = -reg
            try:
                if self.dense:
                    Kd = np.zeros((self.dim, self.dim))
                    np.add.at(Kd, (self._rows, self._cols), data)
                    lu = sla.lu_factor(Kd, check_finite=False)
                    return lambda rhs: d * sla.lu_solve(lu, d * rhs, check_finite=False)
                K = sp.csc_matrix(
                    (data, (self._rows, self._cols)), shape=(self.dim, self.dim)
                )
                lu = spla.splu(K)
                return lambda rhs: d * lu.solve(d * rhs)
            except (np.linalg.LinAlgError, RuntimeError):
                reg *= 100.0
        raise IllConditionedKKT("KKT factorization failed")

    def solve(self, hess_scaled: np.ndarray, g_hat: np.ndarray, r_eq: np.ndarray):
        """Return (dw, eta) with (H/t) dw + A' eta = -g_hat, A dw = -r_eq."""
        solve_k = self._factor(hess_scaled)

        def core(gv, rv):
            sol = solve_k(-np.concatenate([gv, rv]))
            return sol[: self.n], sol[self.n :]

        dw, eta = core(g_hat, r_eq)
        # Exact-residual refinement removes the dual-diagonal shift and the
        # factorization's conditioning loss.  Primal and dual residuals are
        # both O(1) in the scaled formulation but still get separate
        # targets: r_eq lives on the scale of b.
        target1 = 1e-14 * (1.0 + float(np.max(np.abs(g_hat))))
        target2 = 1e-14
        prev = np.inf
        for _ in range(10):
            r1 = (
                np.einsum("tij,tj->ti", hess_scaled, dw.reshape(-1, 3)).ravel()
                + self.AT @ eta
                + g_hat
            )
            r2 = self.A @ dw + r_eq
            n1 = float(np.max(np.abs(r1)))
            n2 = float(np.max(np.abs(r2)))
            measure = n1 / target1 + n2 / target2
            if (n1 < target1 and n2 < target2) or measure >= 0.5 * prev:
                break
            prev = measure
            e, f = core(r1, r2)
            dw += e
            eta += f
        if not (np.all(np.isfinite(dw)) and np.all(np.isfinite(eta))):
            raise IllConditionedKKT("non-finite KKT solution")
        return dw, eta


def recover_duals(state: BarrierState) -> DualVariables:
    """Dual variables at a centered iterate.

    The equality multipliers scaled by 1/t give the marginal duals
    lambda_xy, lambda_xz and the coupling duals mu.  The dual-cone blocks
    are then composed so the dual equality rows hold exactly:

        nu = (-1, -mu(x,y,z), lambda_xy + lambda_xz + mu(*,y,z))

    which is the combination whose cone membership is equivalent to the
    scalarized dual constraint lambda_xy + lambda_xz + mu(*,y,z) + 1 +
    ln(-mu) >= 0.  At an exactly centered point these values coincide with
    -grad F(w) / t, which lies strictly inside the dual cone.
    """
    model, y, t = state.model, state.y, state.t
    if not np.all(np.isfinite(y)):
        raise IllConditionedKKT("non-finite equality multipliers")
    n_y = len(model.rows_y)
    n_z = len(model.rows_z)
    eta = y / t
    lambda_y = {cell: float(eta[i]) for i, cell in enumerate(model.rows_y)}
    lambda_z = {cell: float(eta[n_y + i]) for i, cell in enumerate(model.rows_z)}
    mu_arr = eta[n_y + n_z :]
    mu = {trip: float(mu_arr[i]) for i, trip in enumerate(model.index.triplets)}
    mu_yz: dict[tuple[Symbol, Symbol], float] = {}
    for (x, yy, zz), v in mu.items():
        mu_yz[(yy, zz)] = mu_yz.get((yy, zz), 0.0) + v
    nu = np.empty((len(model.index), 3))
    nu[:, 0] = -1.0
    nu[:, 1] = -mu_arr
    for i, (x, yy, zz) in enumerate(model.index.triplets):
        nu[i, 2] = lambda_y[(x, yy)] + lambda_z[(x, zz)] + mu_yz[(yy, zz)]
    return DualVariables(lambda_y, lambda_z, mu, nu)


def duality_gap(solution: PrimalDualSolution, model: ExpConeModel) -> float:
    """c'w + b'eta; the h'theta term vanishes because h = 0 here.

    Equals -sum r + sum lambda_y b_y + sum lambda_z b_z, and is nonnegative
    for any primal/dual feasible pair (weak duality).
    """
    m = model.marginals
    lam_b = math.fsum(
        solution.lambda_y[cell] * v for cell, v in m.b_y.items()
    ) + math.fsum(solution.lambda_z[cell] * v for cell, v in m.b_z.items())
    return float(-np.sum(solution.primal[:, 0]) + lam_b)


def _nu_in_dual_cone(nu: np.ndarray, tol: float) -> bool:
    # u = -1 throughout, so membership reduces to e^{-w} <= e v + tol.
    bound = math.e * nu[:, 1] + tol
    return bool(np.all(bound > 0.0) and np.all(nu[:, 2] >= -np.log(bound)))


def _max_step_to_positivity(w: np.ndarray, dw: np.ndarray) -> float:
    """Largest step keeping the linear p > 0, q > 0 constraints."""
    wv = w.reshape(-1, 3)[:, 1:]
    dv = dw.reshape(-1, 3)[:, 1:]
    shrinking = dv < 0.0
    if not np.any(shrinking):
        return np.inf
    return float(np.min(-wv[shrinking] / dv[shrinking]))


def _center(w, t, model, kkt, max_steps=MAX_INNER_STEPS):
    """Newton-center t c'w + F(w) on Aw = b.  Returns (w, eta, steps, dec).

    All arithmetic runs on the equivalent 1/t-scaled objective
    c'w + F(w)/t, whose gradients and multipliers stay O(1) along the whole
    path; the reported decrement is still that of the unscaled barrier
    function (the quantity with the self-concordance guarantees).
    """
    c, A, b = model.c, model.A, model.b
    eta = None
    decrement = np.inf
    best_dec = np.inf
    last_phi = np.inf
    since_improved = 0
    for step in range(max_steps):
        _, grad, hess = barrier_batch(w.reshape(-1, 3))
        g_hat = c + grad.ravel() / t
        hess_scaled = hess / t
        dw, eta = kkt.solve(hess_scaled, g_hat, A @ w - b)
        lam2_scaled = float(
            np.einsum("ti,tij,tj->", dw.reshape(-1, 3), hess_scaled, dw.reshape(-1, 3))
        )
        decrement = math.sqrt(max(t * lam2_scaled, 0.0))
        if decrement <= NEWTON_TOL:
            return w, eta, step, decrement
        phi0 = float(c @ w) + barrier_value(w.reshape(-1, 3)) / t
        # Conditioning puts a floor under the reachable decrement at large
        # t; accept the iterate once neither the decrement nor the merit is
        # still improving.
        stagnant = phi0 >= last_phi - 1e-13 * (1.0 + abs(last_phi))
        last_phi = phi0
        if decrement < 0.9 * best_dec:
            best_dec = decrement
            since_improved = 0
        elif stagnant:
            since_improved += 1
            if since_improved >= 5:
                return w, eta, step, decrement
        slope = float(g_hat @ dw)
        if slope >= 0.0:
            # Numerical noise dominates; the point is as centered as the
            # linear algebra allows.
            return w, eta, step, decrement
        alpha = min(1.0, FRACTION_TO_BOUNDARY * _max_step_to_positivity(w, dw))
        # The central slack is exactly 1/t in every block; a Newton step
        # that dives far below that overshoots into territory the next
        # steps only slowly recover from, so treat it like a boundary hit
        # (unless the current slack is already down there).
        slack_floor = min(
            SLACK_DIVE / t, float(np.min(cone_slacks(w.reshape(-1, 3))))
        )
        while True:
            try:
                cand = w + alpha * dw
                phi = float(c @ cand) + barrier_value(cand.reshape(-1, 3)) / t
                if float(np.min(cone_slacks(cand.reshape(-1, 3)))) >= slack_floor and (
                    phi <= phi0 + ARMIJO_SLOPE * alpha * slope
                ):
                    break
            except BoundaryPoint:
                pass
            alpha *= 0.5
            if alpha < 1e-18:
                # Steps this small mean floating point is exhausted at this
                # t; return the current iterate and let the audits judge it.
                return w, eta, step, decrement
        w = w + alpha * dw
    return w, eta, max_steps, decrement


def _zero_duals(model: ExpConeModel) -> DualVariables:
    nt = len(model.index)
    return DualVariables(
        {cell: 0.0 for cell in model.rows_y},
        {cell: 0.0 for cell in model.rows_z},
        {trip: 0.0 for trip in model.index.triplets},
        np.zeros((nt, 3)),
    )


def solve(model: ExpConeModel, params: SolverParams | None = None) -> PrimalDualSolution:
    """Solve the primal/dual pair to the requested tolerances.

    A best-iterate solution is returned under every status; SolverException
    is raised only when not even the starting point can be produced.
    """
    if params is None:
        params = SolverParams()
    try:
        w = initial_point(model.marginals, model.index).ravel()
        barrier_value(w.reshape(-1, 3))  # must be strictly interior
    except (BoundaryPoint, FloatingPointError, KeyError, ValueError) as exc:
        raise SolverException(f"cannot construct an interior starting point: {exc}") from exc

    kkt = _KKTSolver(model)
    degree = 3 * len(model.index)
    t = T0
    trace: list[IterateRecord] = []
    total_newton = 0
    status = Status.MAX_ITERATIONS
    detail = "iteration budget exhausted"
    duals = _zero_duals(model)
    best_w = w.copy()
    best_duals = duals
    iterations = 0

    for outer in range(params.max_iter):
        try:
            w, eta, steps, decrement = _center(w, t, model, kkt)
        except (BoundaryPoint, IllConditionedKKT) as exc:
            status = Status.NUMERICAL_FAILURE
            detail = str(exc)
            break
        iterations = outer + 1
        total_newton += steps
        try:
            duals = recover_duals(BarrierState(model, w, t * eta, t))
        except IllConditionedKKT as exc:
            status = Status.NUMERICAL_FAILURE
            detail = str(exc)
            break
        best_w, best_duals = w.copy(), duals

        p_obj = float(model.c @ w)
        m = model.marginals
        d_obj = -(
            math.fsum(duals.lambda_y[cell] * v for cell, v in m.b_y.items())
            + math.fsum(duals.lambda_z[cell] * v for cell, v in m.b_z.items())
        )
        gap = p_obj - d_obj
        gap_bound = degree / t
        num_err = audit(
            w.reshape(-1, 3)[:, 2],
            model.index,
            duals.lambda_y,
            duals.lambda_z,
            duals.mu,
            m,
        )
        trace.append(
            IterateRecord(
                t=t,
                newton_steps=steps,
                decrement=decrement,
                objective_primal=p_obj,
                objective_dual=d_obj,
                gap=gap,
                gap_bound=gap_bound,
                num_err=num_err,
                nu_in_dual_cone=_nu_in_dual_cone(duals.nu, 1e-9),
            )
        )

        scale = max(abs(p_obj), abs(d_obj))
        abs_ok = gap_bound < params.abstol
        rel_ok = scale > 0.0 and gap_bound < params.reltol * scale
        feas_ok = (
            num_err.primal_violation <= params.feastol
            and num_err.dual_violation >= -params.feastol
        )
        if (abs_ok or rel_ok) and feas_ok:
            status = Status.OPTIMAL
            which = [name for name, ok in (("abstol", abs_ok), ("reltol", rel_ok)) if ok]
            detail = "gap criterion met first: " + "+".join(which)
            break
        if decrement > UNCENTERED_MAX:
            # Centering broke down at this conditioning; growing t further
            # can only corrupt the iterate.  Keep the best one we have.
            detail = f"centering stalled at decrement {decrement:.2e}"
            break
        t *= SIGMA
        if t > T_CEILING:
            detail = "barrier parameter ceiling reached"
            break
    if status not in (Status.OPTIMAL, Status.NUMERICAL_FAILURE) and trace:
        last = trace[-1]
        scale = max(abs(last.objective_primal), abs(last.objective_dual))
        gap_ok = last.gap_bound < params.abstol_inacc or (
            scale > 0.0 and last.gap_bound < params.reltol_inacc * scale
        )
        feas_ok = (
            last.num_err.primal_violation <= params.feastol_inacc
            and last.num_err.dual_violation >= -params.feastol_inacc
        )
        if gap_ok and feas_ok:
            status = Status.OPTIMAL_INACCURATE
            detail = "relaxed tolerances met at iteration budget"

    num_err = trace[-1].num_err if trace else audit(
        best_w.reshape(-1, 3)[:, 2],
        model.index,
        best_duals.lambda_y,
        best_duals.lambda_z,
        best_duals.mu,
        model.marginals,
    )
    p_obj = trace[-1].objective_primal if trace else float(model.c @ best_w)
    d_obj = trace[-1].objective_dual if trace else 0.0
    return PrimalDualSolution(
        primal=best_w.reshape(-1, 3).copy(),
        lambda_y=best_duals.lambda_y,
        lambda_z=best_duals.lambda_z,
        mu=best_duals.mu,
        nu=best_duals.nu,
        status=status,
        status_detail=detail,
        iterations=iterations,
        newton_steps=total_newton,
        objective_primal=p_obj,
        objective_dual=d_obj,
        num_err=num_err,
        trace=tuple(trace),
    )
