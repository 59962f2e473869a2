import pytest

from conepid import build_model, gate, marginals, solve
from conepid.estimator import run_pid
from conepid.gates import GATE_NAMES


@pytest.fixture(scope="session")
def battery():
    """Solve every battery gate once; reused across test modules."""
    out = {}
    for name in GATE_NAMES:
        dist = gate(name)
        model = build_model(marginals(dist))
        solution = solve(model)
        out[name] = (dist, model, solution)
    return out


@pytest.fixture(scope="session")
def battery_results():
    """End-to-end decompositions of the battery."""
    out = {}
    for name in GATE_NAMES:
        dist = gate(name)
        out[name] = (dist,) + run_pid(dist.entries)
    return out
