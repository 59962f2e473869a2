"""Finite joint distributions of three variables, their marginals, and
information measures.

All information quantities in this module are measured in nats; conversion
to bits happens only at the output boundary of the estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping

Symbol = Hashable
Triplet = tuple[Symbol, Symbol, Symbol]

# Input weights may deviate from unit mass by this much before we refuse to
# renormalize silently.
NORMALIZATION_TOL = 1e-9
# After renormalization the stored mass is exact to this tolerance.
MASS_TOL = 1e-12

GROUPINGS = ("x;yz", "x;y", "x;z", "y;z", "x;y|z", "x;z|y")


class DistributionError(ValueError):
    """Base class for invalid distribution inputs."""


class NegativeProbability(DistributionError):
    """A weight was negative."""


class NotNormalized(DistributionError):
    """Weights deviate from unit mass by more than the input tolerance."""


class EmptyDistribution(DistributionError):
    """No strictly positive weight was supplied."""


class UnknownGrouping(ValueError):
    """Unrecognized mutual-information grouping."""


def symbol_sort_key(sym: Symbol) -> tuple:
    """Total order over mixed-type alphabet symbols.

    Numbers sort first (by value), then strings, then tuples element-wise,
    then anything else by repr.  The order is deterministic so that variable
    indexing, and therefore model assembly, is reproducible.
    """
    if isinstance(sym, bool) or isinstance(sym, (int, float)):
        return (0, "", float(sym))
    if isinstance(sym, str):
        return (1, sym, 0.0)
    if isinstance(sym, tuple):
        return (3, "", 0.0, tuple(symbol_sort_key(s) for s in sym))
    return (2, repr(sym), 0.0)


def triplet_sort_key(t: Triplet) -> tuple:
    return tuple(symbol_sort_key(s) for s in t)


@dataclass(frozen=True)
class JointDistribution:
    """Sparse joint distribution of (X, Y, Z).

    ``entries`` maps outcome triplets to strictly positive probabilities
    that sum to one; the three ranges list exactly the symbols occurring.
    Instances are immutable after construction and safe to share between
    threads.
    """

    entries: dict[Triplet, float]
    x_range: tuple[Symbol, ...]
    y_range: tuple[Symbol, ...]
    z_range: tuple[Symbol, ...]

    def __post_init__(self) -> None:
        total = math.fsum(self.entries.values())
        if abs(total - 1.0) > MASS_TOL:
            raise NotNormalized(f"stored mass {total!r} deviates from 1 by more than {MASS_TOL}")

    def probability(self, t: Triplet) -> float:
        return self.entries.get(t, 0.0)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class MarginalPair:
    """The XY- and XZ-marginals b_y(x, y) = p(x, y, *) and b_z(x, z) = p(x, *, z).

    These two vectors drive every constraint of the decomposition program.
    Zero-valued marginal cells are omitted.
    """

    b_y: dict[tuple[Symbol, Symbol], float]
    b_z: dict[tuple[Symbol, Symbol], float]

    def x_mass(self) -> dict[Symbol, float]:
        """P(X = x), computed from b_y."""
        out: dict[Symbol, float] = {}
        for (x, _), v in self.b_y.items():
            out[x] = out.get(x, 0.0) + v
        return out


def build_distribution(raw: Mapping[Triplet, float]) -> JointDistribution:
    """Validate a weight map, prune zero-weight triplets and renormalize.

    Weights must be nonnegative and sum to one within ``NORMALIZATION_TOL``;
    anything grosser is an error rather than something we silently fix.
    """
    for t, w in raw.items():
        if w < 0.0:
            raise NegativeProbability(f"weight of {t!r} is negative: {w!r}")
    entries = {t: float(w) for t, w in raw.items() if w > 0.0}
    if not entries:
        raise EmptyDistribution("all weights are zero")
    total = math.fsum(entries.values())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"weights sum to {total!r}, off by more than {NORMALIZATION_TOL}")
    # Renormalize only genuine drift; weights already at unit mass within
    # the storage tolerance pass through untouched, which keeps rebuilding
    # from a built distribution exactly idempotent.
    if abs(total - 1.0) > MASS_TOL:
        entries = {t: w / total for t, w in entries.items()}
    xs = sorted({t[0] for t in entries}, key=symbol_sort_key)
    ys = sorted({t[1] for t in entries}, key=symbol_sort_key)
    zs = sorted({t[2] for t in entries}, key=symbol_sort_key)
    ordered = {t: entries[t] for t in sorted(entries, key=triplet_sort_key)}
    return JointDistribution(ordered, tuple(xs), tuple(ys), tuple(zs))


def marginals(p: JointDistribution) -> MarginalPair:
    """b_y(x, y) = sum_z p(x, y, z) and b_z(x, z) = sum_y p(x, y, z)."""
    b_y: dict[tuple[Symbol, Symbol], float] = {}
    b_z: dict[tuple[Symbol, Symbol], float] = {}
    for (x, y, z), v in p.entries.items():
        b_y[(x, y)] = b_y.get((x, y), 0.0) + v
        b_z[(x, z)] = b_z.get((x, z), 0.0) + v
    key = lambda cell: (symbol_sort_key(cell[0]), symbol_sort_key(cell[1]))
    return MarginalPair(
        {c: b_y[c] for c in sorted(b_y, key=key)},
        {c: b_z[c] for c in sorted(b_z, key=key)},
    )


def _project(p: JointDistribution, keep: tuple[int, ...]) -> dict[tuple, float]:
    """Marginal over the kept coordinate positions."""
    out: dict[tuple, float] = {}
    for t, v in p.entries.items():
        cell = tuple(t[i] for i in keep)
        out[cell] = out.get(cell, 0.0) + v
    return out


def conditional_entropy_x_given_yz(q: JointDistribution) -> float:
    """H(X | Y, Z) = -sum q(x,y,z) ln(q(x,y,z) / q(*,y,z)) in nats.

    Terms with q(x,y,z) = 0 contribute nothing (0 ln 0 := 0); stored
    entries are strictly positive so no guard is needed here.
    """
    q_yz = _project(q, (1, 2))
    return -math.fsum(
        v * math.log(v / q_yz[(y, z)]) for (x, y, z), v in q.entries.items()
    )


def mutual_information(p: JointDistribution, grouping: str) -> float:
    """(Conditional) mutual information in nats for one of the recognized
    groupings: "x;yz", "x;y", "x;z", "y;z", "x;y|z", "x;z|y".
    """
    g = grouping.strip().lower().replace(" ", "").replace("(", "").replace(")", "").replace(",", "")
    if g not in GROUPINGS:
        raise UnknownGrouping(f"grouping {grouping!r}; expected one of {GROUPINGS}")
    if g == "x;yz":
        px = _project(p, (0,))
        pyz = _project(p, (1, 2))
        return math.fsum(
            v * math.log(v / (px[(x,)] * pyz[(y, z)]))
            for (x, y, z), v in p.entries.items()
        )
    if g in ("x;y", "x;z", "y;z"):
        i, j = {"x;y": (0, 1), "x;z": (0, 2), "y;z": (1, 2)}[g]
        pij = _project(p, (i, j))
        pi = _project(p, (i,))
        pj = _project(p, (j,))
        return math.fsum(
            v * math.log(v / (pi[(a,)] * pj[(b,)])) for (a, b), v in pij.items()
        )
    # Conditional MI: I(X;Y|Z) = sum q(x,y,z) ln( q(x,y,z) q(z) / (q(x,z) q(y,z)) )
    if g == "x;y|z":
        cond, first, second = 2, 0, 1
    else:  # "x;z|y"
        cond, first, second = 1, 0, 2
    p_c = _project(p, (cond,))
    p_ac = _project(p, (first, cond))
    p_bc = _project(p, (second, cond))
    total = 0.0
    terms = []
    for t, v in p.entries.items():
        a, b, c = t[first], t[second], t[cond]
        terms.append(v * math.log(v * p_c[(c,)] / (p_ac[(a, c)] * p_bc[(b, c)])))
    total = math.fsum(terms)
    return total
