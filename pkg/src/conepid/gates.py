"""Benchmark instance generators: paradigmatic logic gates, the copy gate
family, and uniform random points on the probability simplex.

Each gate maps independent uniform input bits W_i deterministically to a
triplet (x, y, z); the resulting distributions are the standard battery
used to validate decomposition estimators.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .distributions import JointDistribution, Triplet, build_distribution

GATE_NAMES = ("RDN", "UNQ", "XOR", "AND", "RDNXOR", "RDNUNQXOR", "XORAND")

# (si, uiy, uiz, ci) in bits.  AND and XORAND values confirmed against the
# brute-force oracle in the test suite; the others are exact by symmetry.
_AND_SI = 1.5 - 0.75 * math.log2(3.0)
EXPECTED_DECOMPOSITION: dict[str, tuple[float, float, float, float]] = {
    "RDN": (1.0, 0.0, 0.0, 0.0),
    "UNQ": (0.0, 1.0, 1.0, 0.0),
    "XOR": (0.0, 0.0, 0.0, 1.0),
    "AND": (_AND_SI, 0.0, 0.0, 0.5),
    "RDNXOR": (1.0, 0.0, 0.0, 1.0),
    "RDNUNQXOR": (1.0, 1.0, 1.0, 1.0),
    "XORAND": (0.5, 0.0, 0.0, 1.0),
}


class UnknownGate(ValueError):
    """Gate name not in the battery."""


class InvalidSize(ValueError):
    """Alphabet size must be a positive integer."""


def _gate_map(name: str, w: tuple[int, ...]) -> Triplet:
    if name == "RDN":
        return (w[0], w[0], w[0])
    if name == "UNQ":
        return ((w[0], w[1]), w[0], w[1])
    if name == "XOR":
        return (w[0] ^ w[1], w[0], w[1])
    if name == "AND":
        return (w[0] & w[1], w[0], w[1])
    if name == "RDNXOR":
        return ((w[0] ^ w[1], w[2]), (w[0], w[2]), (w[1], w[2]))
    if name == "RDNUNQXOR":
        return (
            (w[0] ^ w[1], w[2], w[3], w[4]),
            (w[0], w[2], w[3]),
            (w[1], w[2], w[4]),
        )
    if name == "XORAND":
        return ((w[0] ^ w[1], w[0] & w[1]), w[0], w[1])
    raise UnknownGate(f"unknown gate {name!r}; expected one of {GATE_NAMES}")


_GATE_BITS = {
    "RDN": 1,
    "UNQ": 2,
    "XOR": 2,
    "AND": 2,
    "RDNXOR": 3,
    "RDNUNQXOR": 5,
    "XORAND": 2,
}


def gate(name: str) -> JointDistribution:
    """Distribution of (X, Y, Z) under the named gate with uniform inputs."""
    key = name.upper()
    if key not in _GATE_BITS:
        raise UnknownGate(f"unknown gate {name!r}; expected one of {GATE_NAMES}")
    n_bits = _GATE_BITS[key]
    weight = 1.0 / 2**n_bits
    raw: dict[Triplet, float] = {}
    for w in itertools.product((0, 1), repeat=n_bits):
        t = _gate_map(key, w)
        raw[t] = raw.get(t, 0.0) + weight
    return build_distribution(raw)


def copy_gate(m: int, n: int) -> JointDistribution:
    """Uniform over {((y, z), y, z) : y in [m], z in [n]}."""
    if not (isinstance(m, int) and isinstance(n, int)) or m < 1 or n < 1:
        raise InvalidSize(f"copy gate sizes must be integers >= 1, got {m!r}, {n!r}")
    weight = 1.0 / (m * n)
    return build_distribution(
        {((y, z), y, z): weight for y in range(m) for z in range(n)}
    )


def random_simplex_distribution(
    nx: int, ny: int, nz: int, seed: int
) -> JointDistribution:
    """A point uniform on the (nx ny nz - 1)-simplex, deterministic per seed.

    Uniformity comes from normalizing independent standard-exponential
    draws (equivalently, a flat Dirichlet sample).
    """
    if nx < 1 or ny < 1 or nz < 1:
        raise InvalidSize("alphabet sizes must be >= 1")
    rng = np.random.default_rng(seed)
    weights = rng.standard_exponential(nx * ny * nz)
    weights /= weights.sum()
    cells = itertools.product(range(nx), range(ny), range(nz))
    return build_distribution({t: float(v) for t, v in zip(cells, weights)})


def expected_decomposition(name: str) -> tuple[float, float, float, float]:
    """Reference (SI, UIY, UIZ, CI) of a battery gate, in bits."""
    key = name.upper()
    if key not in EXPECTED_DECOMPOSITION:
        raise UnknownGate(f"unknown gate {name!r}; expected one of {GATE_NAMES}")
    return EXPECTED_DECOMPOSITION[key]
