"""Exact amalgamation, joint embedding, the tuple pseudometric and one-point extensions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import ratlp
from .embeddings import Embedding, is_embedding
from .structures import (
    MetricStructure,
    PointedStructure,
    Signature,
    as_rational,
    canonicalize,
    generated_substructure,
    validate,
)

__all__ = [
    "AmalgamResult",
    "AmalgamationError",
    "ExtensionRequest",
    "ExtensionError",
    "NoJointEmbedding",
    "DistanceWitness",
    "free_amalgam",
    "jep",
    "dist_n",
    "dist_n_witness",
    "extend_one_point",
    "DEFAULT_MIN_SEPARATION",
]

DEFAULT_MIN_SEPARATION = Fraction(1)


class AmalgamationError(ValueError):
    pass


class NoJointEmbedding(ValueError):
    """The two structures admit no common superstructure (e.g. clashing constants)."""


class ExtensionError(ValueError):
    pass


@dataclass(frozen=True)
class AmalgamResult:
    amalgam: MetricStructure
    left_arm: Embedding
    right_arm: Embedding


def _fresh_labels(taken: set[str], labels: Sequence[str]) -> dict[str, str]:
    out = {}
    for lab in labels:
        new = lab
        while new in taken:
            new += "'"
        taken.add(new)
        out[lab] = new
    return out


def _fill_tables(sig: Signature, dist, known: list[dict]) -> tuple[tuple[Fraction, ...], ...]:
    """Complete partial predicate tables by McShane extension, clipped to the range.

    ``known[k]`` maps index tuples to values for predicate k. On an L-Lipschitz
    partial table the result agrees with it and stays L-Lipschitz.
    """
    n = len(dist)
    tables = []
    for k, p in enumerate(sig.predicates):
        have = known[k]
        table = []
        for tup in itertools.product(range(n), repeat=p.arity):
            v = have.get(tup)
            if v is None:
                v = min(val + p.lipschitz * max(dist[i][j] for i, j in zip(tup, s))
                        for s, val in have.items())
                v = min(max(v, p.lo), p.hi)
            table.append(v)
        tables.append(tuple(table))
    return tuple(tables)


def _known_tables(s: MetricStructure, position: Sequence[int]) -> list[dict]:
    """Predicate tables of ``s`` keyed by index tuples in a larger point list."""
    out = []
    for k, p in enumerate(s.signature.predicates):
        out.append({tuple(position[i] for i in tup): s.value_at(k, tup)
                    for tup in itertools.product(range(len(s.points)), repeat=p.arity)})
    return out


def free_amalgam(
    A: PointedStructure,
    B0: MetricStructure,
    B1: MetricStructure,
    phi0: Embedding,
    phi1: Embedding,
) -> AmalgamResult:
    """Glue ``B0`` and ``B1`` along the images of ``A`` with the path metric.

    Cross distances are ``min_a d(b0, phi0(a)) + d(phi1(a), b1)``. The two arms
    agree exactly on ``A``.
    """
    sig = A.signature
    if not (sig == B0.signature == B1.signature):
        raise AmalgamationError("signature mismatch")
    if phi0.source != A or phi1.source != A:
        raise AmalgamationError("phi0 and phi1 must both have source A")
    if phi0.target != B0 or phi1.target != B1:
        raise AmalgamationError("phi0 must land in B0 and phi1 in B1")
    if not A.structure.points:
        raise AmalgamationError("empty base structure without constants; use jep")
    a_pts = A.structure.points
    img0 = [B0.index(phi0(a)) for a in a_pts]
    img1 = [B1.index(phi1(a)) for a in a_pts]
    glue = {j: i for i, j in zip(img0, img1)}
    rest = [j for j in range(len(B1.points)) if j not in glue]
    rename = _fresh_labels(set(B0.points), [B1.points[j] for j in rest])
    points = list(B0.points) + [rename[B1.points[j]] for j in rest]
    n0 = len(B0.points)
    pos1 = [glue[j] if j in glue else n0 + rest.index(j) for j in range(len(B1.points))]
    n = len(points)
    D = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n0):
        for j in range(n0):
            D[i][j] = B0.dist[i][j]
    for x in range(len(B1.points)):
        for y in range(len(B1.points)):
            D[pos1[x]][pos1[y]] = B1.dist[x][y]
    cap = sig.diameter
    for i in range(n0):
        for j in rest:
            v = min(B0.dist[i][g0] + B1.dist[g1][j] for g0, g1 in zip(img0, img1))
            if cap is not None and v > cap:
                raise AmalgamationError(
                    f"diameter cap {cap} exceeded between ({B0.points[i]}, {B1.points[j]}): {v}")
            D[i][pos1[j]] = D[pos1[j]][i] = v
    known = _known_tables(B0, range(n0))
    for k, extra in enumerate(_known_tables(B1, pos1)):
        known[k].update(extra)
    tables = _fill_tables(sig, D, known)
    consts = tuple(B0.constants)
    C = MetricStructure(sig, tuple(points), tuple(map(tuple, D)), tables, consts)
    diags = validate(C)
    if diags:
        raise AmalgamationError("free amalgam is not a valid structure: " + "; ".join(diags))
    left = Embedding(PointedStructure.full(B0), C, tuple(B0.points))
    right = Embedding(PointedStructure.full(B1), C, tuple(points[pos1[j]] for j in range(len(B1.points))))
    return AmalgamResult(C, left, right)


def jep(B0: MetricStructure, B1: MetricStructure,
        min_separation: Fraction = DEFAULT_MIN_SEPARATION) -> AmalgamResult:
    """Embed ``B0`` and ``B1`` jointly.

    Without constants this is the disjoint union with one constant cross
    distance ``c`` (half the larger diameter, raised to cover predicate gaps);
    with constants it amalgamates over the constant-generated substructure.
    """
    sig = B0.signature
    if sig != B1.signature:
        raise AmalgamationError("signature mismatch")
    if sig.constants:
        base = generated_substructure(B0, ())
        phi0 = Embedding(base, B0, base.structure.points)
        cmap0, cmap1 = B0.constant_map, B1.constant_map
        to1 = {}
        for c, p in cmap0.items():
            q = cmap1[c]
            if to1.setdefault(p, q) != q:
                raise AmalgamationError(f"constants coincide in B0 but not in B1 ({c})")
        phi1 = Embedding(base, B1, tuple(to1[p] for p in base.structure.points))
        if len(set(phi1.images)) != len(phi1.images) or not is_embedding(phi1):
            raise AmalgamationError("the constant-generated substructures of B0 and B1 differ")
        return free_amalgam(base, B0, B1, phi0, phi1)

    c = max(B0.diameter(), B1.diameter()) / 2
    need = Fraction(0)
    for k, p in enumerate(sig.predicates):
        for s in itertools.product(range(len(B0.points)), repeat=p.arity):
            for t in itertools.product(range(len(B1.points)), repeat=p.arity):
                gap = abs(B0.value_at(k, s) - B1.value_at(k, t))
                if gap == 0:
                    continue
                if p.lipschitz == 0:
                    raise AmalgamationError(
                        f"predicate {p.name} has Lipschitz constant 0 but values differ")
                need = max(need, gap / p.lipschitz)
    c = max(c, need)
    cap = sig.diameter
    if cap is not None and need > cap:
        raise AmalgamationError(f"no admissible cross distance: predicates need {need} > cap {cap}")
    if c == 0:
        c = Fraction(min_separation)
    if cap is not None and c > cap:
        c = cap
    rename = _fresh_labels(set(B0.points), B1.points)
    points = list(B0.points) + [rename[p] for p in B1.points]
    n0, n1 = len(B0.points), len(B1.points)
    n = n0 + n1
    D = [[c] * n for _ in range(n)]
    for i in range(n0):
        for j in range(n0):
            D[i][j] = B0.dist[i][j]
    for i in range(n1):
        for j in range(n1):
            D[n0 + i][n0 + j] = B1.dist[i][j]
    known = _known_tables(B0, range(n0))
    for k, extra in enumerate(_known_tables(B1, [n0 + j for j in range(n1)])):
        known[k].update(extra)
    C = MetricStructure(sig, tuple(points), tuple(map(tuple, D)), _fill_tables(sig, D, known), ())
    diags = validate(C)
    if diags:
        raise AmalgamationError("joint embedding is not a valid structure: " + "; ".join(diags))
    left = Embedding(PointedStructure.full(B0), C, tuple(B0.points))
    right = Embedding(PointedStructure.full(B1), C, tuple(rename[p] for p in B1.points))
    return AmalgamResult(C, left, right)


# -- tuple pseudometric ---------------------------------------------------------

@dataclass(frozen=True)
class DistanceWitness:
    """Optimal joint embedding realizing the tuple pseudometric."""

    value: Fraction
    cross: tuple[tuple[Fraction, ...], ...]
    amalgam: MetricStructure
    left: Embedding
    right: Embedding
    lp: ratlp.LPOutcome = field(repr=False, default=None)


def _var(i: int, j: int) -> str:
    return f"D{i}_{j}"


def _dist_lp(x: PointedStructure, y: PointedStructure) -> ratlp.LinearProgram:
    X, Y = x.structure, y.structure
    sig = X.signature
    if sig != Y.signature:
        raise ValueError("signature mismatch")
    if len(x.generators) != len(y.generators):
        raise ValueError("generator tuples have different lengths")
    if any(p.arity > 1 for p in sig.predicates):
        raise ValueError("the tuple pseudometric LP handles unary predicates only")
    nx, ny = len(X.points), len(Y.points)
    lp = ratlp.LinearProgram()
    pinned = {}
    cx, cy = X.constant_map, Y.constant_map
    for c in sig.constants:
        pinned[(X.index(cx[c]), Y.index(cy[c]))] = True
    cap = sig.diameter
    for i in range(nx):
        for j in range(ny):
            lo = Fraction(0)
            for k, p in enumerate(sig.predicates):
                gap = abs(X.value_at(k, (i,)) - Y.value_at(k, (j,)))
                if gap == 0:
                    continue
                if p.lipschitz == 0:
                    raise NoJointEmbedding(f"predicate {p.name} (Lipschitz 0) separates "
                                           f"{X.points[i]} and {Y.points[j]}")
                lo = max(lo, gap / p.lipschitz)
            if (i, j) in pinned:
                if lo > 0:
                    raise NoJointEmbedding("identified constants carry different predicate values")
                lp.add_variable(_var(i, j), 0, 0)
            else:
                lp.add_variable(_var(i, j), lo, cap)
    lp.add_variable("t", 0, None)
    dX, dY = X.dist, Y.dist
    for j in range(ny):
        for i in range(nx):
            for i2 in range(nx):
                if i2 == i:
                    continue
                # D(i,j) <= d(i,i2) + D(i2,j)
                lp.add_constraint({_var(i, j): 1, _var(i2, j): -1}, "<=", dX[i][i2])
                if i < i2:
                    # d(i,i2) <= D(i,j) + D(i2,j)
                    lp.add_constraint({_var(i, j): 1, _var(i2, j): 1}, ">=", dX[i][i2])
    for i in range(nx):
        for j in range(ny):
            for j2 in range(ny):
                if j2 == j:
                    continue
                lp.add_constraint({_var(i, j): 1, _var(i, j2): -1}, "<=", dY[j][j2])
                if j < j2:
                    lp.add_constraint({_var(i, j): 1, _var(i, j2): 1}, ">=", dY[j][j2])
    for a, b in zip(x.generators, y.generators):
        lp.add_constraint({_var(X.index(a), Y.index(b)): 1, "t": -1}, "<=", 0)
    lp.minimize({"t": 1})
    return lp


def dist_n_witness(x: PointedStructure, y: PointedStructure) -> DistanceWitness:
    """Exact value of the tuple pseudometric with an optimal joint embedding."""
    lp = _dist_lp(x, y)
    out = ratlp.solve(lp)
    if out.status != "optimal":
        raise NoJointEmbedding("no common superstructure exists (LP infeasible)")
    X, Y = x.structure, y.structure
    nx, ny = len(X.points), len(Y.points)
    cross = tuple(tuple(out.assignment[_var(i, j)] for j in range(ny)) for i in range(nx))
    rename = _fresh_labels(set(X.points), Y.points)
    points = list(X.points) + [rename[p] for p in Y.points]
    n = nx + ny
    D = [[Fraction(0)] * n for _ in range(n)]
    for i in range(nx):
        for j in range(nx):
            D[i][j] = X.dist[i][j]
    for i in range(ny):
        for j in range(ny):
            D[nx + i][nx + j] = Y.dist[i][j]
    for i in range(nx):
        for j in range(ny):
            D[i][nx + j] = D[nx + j][i] = cross[i][j]
    sig = X.signature
    tables = []
    for k, p in enumerate(sig.predicates):
        tables.append(tuple(X.value_at(k, (i,)) for i in range(nx)) +
                      tuple(Y.value_at(k, (j,)) for j in range(ny)))
    raw = MetricStructure(sig, tuple(points), tuple(map(tuple, D)), tuple(tables), X.constants)
    C = canonicalize(raw)
    rep = {}
    for q in range(n):
        for r in range(n):
            if D[q][r] == 0:
                rep[points[q]] = points[r]
                break
    left = Embedding(x, C, tuple(rep[p] for p in X.points))
    right = Embedding(y, C, tuple(rep[rename[p]] for p in Y.points))
    return DistanceWitness(out.optimum, cross, C, left, right, out)


def dist_n(x: PointedStructure, y: PointedStructure) -> Fraction:
    return dist_n_witness(x, y).value


# -- one-point extensions ------------------------------------------------------

@dataclass(frozen=True)
class ExtensionRequest:
    base: MetricStructure
    new_point: str
    distances: Mapping[str, Fraction]
    predicate_values: Mapping[str, Fraction] = field(default_factory=dict)


def extend_one_point(req: ExtensionRequest) -> MetricStructure:
    """Add one point with prescribed distances (a Katětov function) and unary values."""
    B = req.base
    sig = B.signature
    if req.new_point in B.points:
        raise ExtensionError(f"label {req.new_point!r} already used")
    f = {x: as_rational(v) for x, v in req.distances.items()}
    missing = [x for x in B.points if x not in f]
    if missing or set(f) - set(B.points):
        raise ExtensionError(f"distances must be given for exactly the base points (missing {missing})")
    cap = sig.diameter
    for x in B.points:
        if f[x] <= 0:
            raise ExtensionError(f"distance to {x} must be positive")
        if cap is not None and f[x] > cap:
            raise ExtensionError(f"distance to {x} exceeds the diameter cap {cap}")
    for x, y in itertools.combinations(B.points, 2):
        d = B.distance(x, y)
        if abs(f[x] - f[y]) > d or d > f[x] + f[y]:
            raise ExtensionError(f"Katetov condition violated at ({x}, {y})")
    vals = {}
    for p in sig.unary:
        if p.name not in req.predicate_values:
            raise ExtensionError(f"missing value for predicate {p.name}")
        v = as_rational(req.predicate_values[p.name])
        if not p.lo <= v <= p.hi:
            raise ExtensionError(f"value {v} for {p.name} outside [{p.lo}, {p.hi}]")
        for x in B.points:
            if abs(v - B.value(p.name, x)) > p.lipschitz * f[x]:
                raise ExtensionError(f"Lipschitz condition for {p.name} violated at {x}")
        vals[p.name] = v
    n = len(B.points)
    D = [list(row) + [f[B.points[i]]] for i, row in enumerate(B.dist)]
    D.append([f[x] for x in B.points] + [Fraction(0)])
    known = _known_tables(B, range(n))
    for k, p in enumerate(sig.predicates):
        if p.arity == 1:
            known[k][(n,)] = vals[p.name]
    C = MetricStructure(sig, B.points + (req.new_point,), tuple(map(tuple, D)),
                        _fill_tables(sig, D, known), B.constants)
    diags = validate(C)
    if diags:
        raise ExtensionError("; ".join(diags))
    return C
