"""Acceptance suite: every top-level correctness and performance criterion,
each printing one PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
"""

import math
import time

import numpy as np
import pytest

from conepid.cone import barrier, barrier_batch, cone_slacks, ConePoint
from conepid.distributions import marginals, mutual_information
from conepid.estimator import LN2, decompose, run_pid
from conepid.gates import GATE_NAMES, copy_gate, gate, random_simplex_distribution
from conepid.model import admissible_triplets, build_model, initial_point
from conepid.oracle import brute_force_min
from conepid.quality import NumErr
from conepid.solver import Status

# Solutions produced while running the criteria; the duality criterion
# audits every iterate of every one of them.
AUDITED = []


def _report(name: str, ok: bool, detail: str = "") -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}")


def _solve_entries(entries, params=None):
    result, solution = run_pid(entries, params)
    AUDITED.append(solution)
    return result, solution


class TestAcceptance:
    def test_gate_battery_correctness(self):
        """XOR, RDN, UNQ and COPY reach their exact decompositions to 1e-6
        bits in under one second of solve time."""
        cases = []
        start = time.perf_counter()
        for name, expected in (
            ("XOR", (0.0, 0.0, 0.0, 1.0)),
            ("RDN", (1.0, 0.0, 0.0, 0.0)),
            ("UNQ", (0.0, 1.0, 1.0, 0.0)),
        ):
            res, sol = _solve_entries(gate(name).entries)
            got = (res.si, res.uiy, res.uiz, res.ci)
            cases.append((name, max(abs(a - b) for a, b in zip(got, expected)), sol))
        for m, n in ((2, 2), (4, 4), (2, 3)):
            res, sol = _solve_entries(copy_gate(m, n).entries)
            expected = (0.0, math.log2(m), math.log2(n), 0.0)
            got = (res.si, res.uiy, res.uiz, res.ci)
            cases.append(
                (f"COPY({m},{n})", max(abs(a - b) for a, b in zip(got, expected)), sol)
            )
        elapsed = time.perf_counter() - start
        worst = max(dev for _, dev, _ in cases)
        ok = worst <= 1e-6 and elapsed < 1.0 and all(
            s.status is Status.OPTIMAL for _, _, s in cases
        )
        _report("gate-battery", ok, f"worst dev {worst:.2e} bits, {elapsed:.3f}s")
        assert worst <= 1e-6
        assert elapsed < 1.0

    def test_and_gate_versus_oracle(self):
        """Solver decomposition matches the grid oracle to 1e-4 bits and the
        oracle objective sandwiches the solver objective."""
        dist = gate("AND")
        m = marginals(dist)
        start = time.perf_counter()
        step = 1e-5
        q_oracle, obj_oracle = brute_force_min(m, step)
        oracle_seconds = time.perf_counter() - start

        res, sol = _solve_entries(dist.entries)
        index = admissible_triplets(m)
        qv = np.array([q_oracle.get(t, 0.0) for t in index.triplets])
        oracle_res = decompose(dist, qv, index, NumErr(0.0, 0.0, 0.0))

        dev = max(
            abs(a - b)
            for a, b in zip(
                (res.si, res.uiy, res.uiz, res.ci),
                (oracle_res.si, oracle_res.uiy, oracle_res.uiz, oracle_res.ci),
            )
        )
        resolution = 2.0 * step * (1.0 + abs(math.log(step)))
        sandwich = (
            obj_oracle >= sol.objective_primal - 1e-4
            and obj_oracle <= sol.objective_primal + resolution
        )
        ok = dev <= 1e-4 and sandwich and oracle_seconds < 30.0
        _report(
            "and-vs-oracle",
            ok,
            f"dev {dev:.2e} bits, oracle obj {obj_oracle:.8f} vs solver "
            f"{sol.objective_primal:.8f}, oracle {oracle_seconds:.1f}s",
        )
        assert dev <= 1e-4
        assert sandwich
        assert oracle_seconds < 30.0

    def test_copy_scaling(self):
        """All m, n <= 20: relative deviation of the unique informations
        from log2 m and log2 n at most 1e-6, full sweep under 10 minutes."""
        start = time.perf_counter()
        worst = 0.0
        for m in range(1, 21):
            for n in range(1, 21):
                res, sol = _solve_entries(copy_gate(m, n).entries)
                ty, tz = math.log2(m), math.log2(n)
                worst = max(
                    worst,
                    abs(res.uiy - ty) / max(ty, 1.0),
                    abs(res.uiz - tz) / max(tz, 1.0),
                )
                assert sol.status is Status.OPTIMAL, (m, n, sol.status)
        elapsed = time.perf_counter() - start
        ok = worst <= 1e-6 and elapsed < 600.0
        _report("copy-scaling", ok, f"worst rel dev {worst:.2e}, {elapsed:.0f}s")
        assert worst <= 1e-6
        assert elapsed < 600.0

    def test_random_instance_robustness(self):
        """100 seeded 5x5x5 simplex instances: at least 99 Optimal with all
        audit components at most 1e-6, sum rule to 1e-6 bits throughout."""
        start = time.perf_counter()
        clean = 0
        for seed in range(100):
            dist = random_simplex_distribution(5, 5, 5, seed)
            res, sol = _solve_entries(dist.entries)
            if sol.status is not Status.OPTIMAL:
                continue
            if res.num_err.max_component() > 1e-6:
                continue
            total = mutual_information(dist, "x;yz") / LN2
            assert res.si + res.uiy + res.uiz + res.ci == pytest.approx(
                total, abs=1e-6
            ), seed
            clean += 1
        elapsed = time.perf_counter() - start
        ok = clean >= 99 and elapsed < 300.0
        _report("random-robustness", ok, f"{clean}/100 clean, {elapsed:.0f}s")
        assert clean >= 99
        assert elapsed < 300.0

    def test_timing_sanity(self):
        """One 10x10x10 instance solves in under 120 s and median solve time
        is monotone nondecreasing over alphabet sizes 4, 6, 8, 10."""
        medians = []
        biggest = 0.0
        for s in (4, 6, 8, 10):
            times = []
            for seed in range(5):
                dist = random_simplex_distribution(s, s, s, seed)
                t0 = time.perf_counter()
                res, sol = _solve_entries(dist.entries)
                dt = time.perf_counter() - t0
                times.append(dt)
                if s == 10:
                    biggest = max(biggest, dt)
                    assert sol.status is Status.OPTIMAL, (seed, sol.status_detail)
            medians.append(float(np.median(times)))
        monotone = all(a <= b for a, b in zip(medians, medians[1:]))
        ok = monotone and biggest < 120.0
        _report(
            "timing-sanity",
            ok,
            f"medians {[f'{m:.2f}' for m in medians]}s, slowest s=10 {biggest:.1f}s",
        )
        assert monotone
        assert biggest < 120.0

    def test_duality_properties(self):
        """Weak duality at every audited iterate of every run above, and a
        tight duality-gap audit at every Optimal termination."""
        assert AUDITED, "run after the criteria that populate the registry"
        min_gap = min(rec.gap for sol in AUDITED for rec in sol.trace)
        worst_gv = max(
            sol.num_err.gap_violation
            for sol in AUDITED
            if sol.status is Status.OPTIMAL
        )
        ok = min_gap >= -1e-9 and worst_gv <= 1e-5
        _report(
            "duality-properties",
            ok,
            f"min iterate gap {min_gap:.2e} nats over "
            f"{sum(len(s.trace) for s in AUDITED)} iterates, "
            f"worst gap violation {worst_gv:.2e} nats",
        )
        assert min_gap >= -1e-9
        assert worst_gv <= 1e-5

    def test_barrier_calculus(self):
        """Gradient and Hessian match central differences (h = 1e-6) to
        relative error 1e-5 on 100 random interior points; Hessian positive
        definite on all of them."""
        rng = np.random.default_rng(2024)
        pts = np.empty((100, 3))
        pts[:, 1] = np.exp(rng.uniform(-1.0, 1.0, 100))
        pts[:, 2] = pts[:, 1] * np.exp(-rng.uniform(0.0, 2.0, 100))
        slack = np.exp(rng.uniform(-2.0, 0.5, 100))
        pts[:, 0] = pts[:, 2] * np.log(pts[:, 1] / pts[:, 2]) - slack

        h = 1e-6
        worst_rel = 0.0
        for row in pts:
            ev = barrier(ConePoint(*row))
            fd_g = np.empty(3)
            fd_h = np.empty((3, 3))
            for i in range(3):
                e = np.zeros(3)
                e[i] = h
                vp, gp, _ = barrier_batch((row + e)[None, :])
                vm, gm, _ = barrier_batch((row - e)[None, :])
                fd_g[i] = (vp - vm) / (2 * h)
                fd_h[i] = (gp[0] - gm[0]) / (2 * h)
            fd_h = 0.5 * (fd_h + fd_h.T)
            rel_g = np.max(np.abs(ev.gradient - fd_g) / np.maximum(np.abs(fd_g), 1e-8))
            rel_h = np.max(np.abs(ev.hessian - fd_h) / np.maximum(np.abs(fd_h), 1e-4))
            worst_rel = max(worst_rel, rel_g, rel_h)
        eigen_min = float(np.min(np.linalg.eigvalsh(barrier_batch(pts)[2])))
        ok = worst_rel <= 1e-5 and eigen_min > 0.0
        _report(
            "barrier-calculus", ok, f"worst rel err {worst_rel:.2e}, min eig {eigen_min:.2e}"
        )
        assert worst_rel <= 1e-5
        assert eigen_min > 0.0

    def test_initialization(self):
        """The interior starting point has marginal residual at most 1e-12
        and cone slack exactly 100 in every block, across the full gate
        battery."""
        worst_residual = 0.0
        slack_exact = True
        for name in GATE_NAMES:
            m = marginals(gate(name))
            model = build_model(m)
            w = initial_point(m, model.index)
            worst_residual = max(
                worst_residual, float(np.max(np.abs(model.A @ w.ravel() - model.b)))
            )
            slack_exact = slack_exact and bool(np.all(cone_slacks(w) == 100.0))
        ok = worst_residual <= 1e-12 and slack_exact
        _report(
            "initialization",
            ok,
            f"worst residual {worst_residual:.2e}, slack exactly 100: {slack_exact}",
        )
        assert worst_residual <= 1e-12
        assert slack_exact
