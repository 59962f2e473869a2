import math

import numpy as np
import pytest

from conepid.distributions import marginals
from conepid.gates import gate
from conepid.model import admissible_triplets
from conepid.quality import (
    DUAL_DOMAIN_SENTINEL,
    NumErr,
    audit,
    dual_violation,
    gap_violation,
    primal_violation,
)


def xor_setup():
    dist = gate("XOR")
    m = marginals(dist)
    index = admissible_triplets(m)
    q = np.array([dist.entries.get(t, 0.0) for t in index.triplets])
    return dist, m, index, q


class TestPrimalViolation:
    def test_exactly_feasible(self):
        _, m, index, q = xor_setup()
        assert primal_violation(q, index, m) == 0.0

    def test_small_negative_entry(self):
        _, m, index, q = xor_setup()
        i = int(np.flatnonzero(q == 0.0)[0])
        q[i] = -1e-9
        delta = primal_violation(q, index, m)
        assert 1e-9 <= delta <= 2e-9

    def test_all_zero_q_reports_largest_cell(self):
        m = marginals(gate("AND"))
        index = admissible_triplets(m)
        assert primal_violation(np.zeros(len(index)), index, m) == pytest.approx(0.5)

    def test_invariant_under_triplet_permutation(self):
        _, m, index, q = xor_setup()
        rng = np.random.default_rng(0)
        q = q + rng.uniform(-1e-4, 1e-4, len(q))
        base = primal_violation(q, index, m)
        for _ in range(5):
            perm = rng.permutation(len(q))
            permuted_index = type(index)(
                tuple(index.triplets[i] for i in perm),
                {index.triplets[i]: k for k, i in enumerate(perm)},
            )
            assert primal_violation(q[perm], permuted_index, m) == pytest.approx(
                base, abs=1e-15
            )


class TestDualViolation:
    def test_single_triplet_reference_value(self):
        # lambda = 0, mu = -1/e: 0 + 0 - 1/e + 1 + ln(1/e) = -1/e
        lam_y = {(0, 0): 0.0}
        lam_z = {(0, 0): 0.0}
        mu = {(0, 0, 0): -1.0 / math.e}
        assert dual_violation(lam_y, lam_z, mu) == pytest.approx(-1.0 / math.e)

    def test_clamped_at_zero(self):
        lam_y = {(0, 0): 5.0}
        lam_z = {(0, 0): 5.0}
        mu = {(0, 0, 0): -1.0}
        assert dual_violation(lam_y, lam_z, mu) == 0.0

    def test_log_domain_breach(self):
        _, m, index, _ = xor_setup()
        lam_y = {c: 0.0 for c in m.b_y}
        lam_z = {c: 0.0 for c in m.b_z}
        mu = {t: -1.0 for t in index.triplets}
        mu[index.triplets[0]] = 0.5
        assert dual_violation(lam_y, lam_z, mu) == DUAL_DOMAIN_SENTINEL
        ne = audit(np.ones(len(index)) / len(index), index, lam_y, lam_z, mu, m)
        assert ne.dual_domain_violation


class TestGapViolation:
    def test_exact_xor_optimum(self):
        # exact optimum: q uniform on the support, lambda' b = ln 2
        _, m, index, _ = xor_setup()
        q = np.full(len(index), 0.125)
        lam_y = {c: 0.5 * math.log(2) for c in m.b_y}
        lam_z = {c: 0.5 * math.log(2) for c in m.b_z}
        assert gap_violation(q, index, lam_y, lam_z, m) <= 1e-9

    def test_xor_optimum_zero_duals(self):
        _, m, index, _ = xor_setup()
        q = np.full(len(index), 0.125)
        lam = {c: 0.0 for c in m.b_y}
        lam_z = {c: 0.0 for c in m.b_z}
        # -H + 0 < 0, clamped to zero
        assert gap_violation(q, index, lam, lam_z, m) == 0.0

    def test_surplus_shows_up_directly(self):
        _, m, index, _ = xor_setup()
        q = np.full(len(index), 0.125)
        base = math.log(2)  # lambda'b that exactly matches H(X|Y,Z)
        lam_y = {c: 0.5 * (base + 0.1) for c in m.b_y}
        lam_z = {c: 0.5 * (base + 0.1) for c in m.b_z}
        assert gap_violation(q, index, lam_y, lam_z, m) == pytest.approx(0.1, abs=1e-12)

    def test_weak_duality_at_audit_level(self, battery):
        # primal-feasible q against dual-feasible multipliers from a
        # different solve of the same marginals
        for name, (dist, model, solution) in battery.items():
            value = gap_violation(
                solution.primal[:, 2],
                model.index,
                solution.lambda_y,
                solution.lambda_z,
                model.marginals,
            )
            assert value >= 0.0
            assert value <= 10 * 1e-6, name


class TestAudit:
    def test_optimal_solve_audits_clean(self, battery):
        for name, (_, model, solution) in battery.items():
            ne = audit(
                solution.primal[:, 2],
                model.index,
                solution.lambda_y,
                solution.lambda_z,
                solution.mu,
                model.marginals,
            )
            assert ne.primal_violation <= 1e-6
            assert ne.dual_violation >= -1e-6
            assert ne.gap_violation <= 1e-6
            assert not ne.dual_domain_violation
            assert ne.as_triple() == solution.num_err.as_triple()

    def test_signs(self):
        ne = NumErr(1e-9, -1e-9, 1e-8)
        assert ne.max_component() == 1e-8
