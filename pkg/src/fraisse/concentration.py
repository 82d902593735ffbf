"""Normalized l1 powers, finite automorphism groups and concentration witnesses.

The pipeline: pick automorphisms ``g_1..g_k`` of a finite structure ``B'``,
close them into a group ``H`` with its bi-invariant metric, choose ``n``
from the bounded-differences tail bound, then sample ``h`` uniformly from
``H^n``. The diagonal map ``b -> (h_1 b, ..., h_n b)`` embeds ``B'`` into
the power ``C_n``, and by concentration the coloring is nearly constant on
``{beta ∘ g_i}`` for most samples.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .embeddings import (
    Embedding,
    automorphisms,
    compose,
    enumerate_embeddings,
    is_embedding,
    oscillation,
    push_forward,
)
from .ramsey import eps_approximates
from .structures import MetricStructure, PointedStructure, Signature, validate

__all__ = [
    "PowerStructure",
    "GroupAction",
    "ConcentrationReport",
    "WitnessResult",
    "ExtensionResult",
    "PowerDistanceColoring",
    "ResourceCapError",
    "l1_power",
    "diagonal_embedding",
    "group_closure",
    "ln_bounds",
    "concentration_n",
    "tail_below",
    "analytic_bound",
    "hoeffding_tolerance",
    "theta",
    "sample_haar",
    "find_witness",
    "restricted_generators",
    "delta_n",
    "reports_to_csv",
    "ExtensionCaps",
    "WEPResult",
    "random_power_coloring",
    "empirical_concentration",
    "levy_chain",
    "partial_automorphisms",
    "eppa_search",
    "weak_extension_witness",
]

DEFAULT_POWER_CAP = 4096
DEFAULT_GROUP_CAP = 10 ** 4
EXHAUSTIVE_LIMIT = 10 ** 4


class ResourceCapError(RuntimeError):
    pass


# -- l1 powers ---------------------------------------------------------------------

class PowerStructure:
    """``base^n`` with the normalized l1 metric and coordinate-averaged unary predicates.

    Points are tuples of base labels and are never stored; :meth:`materialize`
    builds an explicit :class:`MetricStructure` when ``|base|^n`` is small.
    """

    def __init__(self, base: MetricStructure, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        if any(p.arity > 1 for p in base.signature.predicates):
            raise ValueError("l1 powers are defined for unary predicates only")
        self.base = base
        self.n = n
        self.signature: Signature = base.signature
        self.constant_map = {c: (p,) * n for c, p in base.constants}

    def __eq__(self, other):
        return isinstance(other, PowerStructure) and self.n == other.n and self.base == other.base

    def __hash__(self):
        return hash((self.base, self.n))

    def __len__(self):
        return len(self.base.points) ** self.n

    def distance(self, x: tuple, y: tuple) -> Fraction:
        B = self.base
        return Fraction(sum(B.distance(a, b) for a, b in zip(x, y))) / self.n

    def value(self, name: str, keys) -> Fraction:
        (x,) = keys if isinstance(keys, (list, tuple)) and keys and isinstance(keys[0], tuple) else (keys,)
        return Fraction(sum(self.base.value(name, a) for a in x)) / self.n

    @staticmethod
    def label(key: tuple) -> str:
        return ",".join(key)

    def keys(self) -> Iterable[tuple]:
        return itertools.product(self.base.points, repeat=self.n)

    def materialize(self, cap: int = DEFAULT_POWER_CAP) -> MetricStructure:
        size = len(self)
        if size > cap:
            raise ResourceCapError(f"power has {size} points, above the cap {cap}")
        keys = list(self.keys())
        idx = np.array([[self.base.index(a) for a in k] for k in keys], dtype=np.int64).reshape(len(keys), self.n)
        n = self.n
        ints, den = kernels.scale(self.base.dist)
        D0 = np.array(ints, dtype=np.int64 if kernels._fits(ints, n) else object)
        cache: dict[int, Fraction] = {}

        def frac(v: int) -> Fraction:
            f = cache.get(v)
            if f is None:
                f = cache[v] = Fraction(int(v), den * n)
            return f

        # row i of the power: sum over coordinates of D0[idx[i, c], idx[:, c]]
        dist = tuple(tuple(frac(v) for v in D0[idx[i][None, :], idx].sum(axis=1).tolist())
                     for i in range(len(keys)))
        tables = []
        for k, _ in enumerate(self.signature.predicates):
            col = [self.base.value_at(k, (a,)) for a in range(len(self.base.points))]
            vi, vden = kernels.scale(col)
            V = np.array(vi, dtype=np.int64 if kernels._fits(vi, n) else object)
            sums = V[idx].sum(axis=1).tolist()
            tables.append(tuple(Fraction(int(v), vden * n) for v in sums))
        consts = tuple((c, self.label(v)) for c, v in self.constant_map.items())
        return MetricStructure(self.signature, tuple(self.label(k) for k in keys), dist,
                               tuple(tables), consts)


def l1_power(B: MetricStructure, n: int, cap: int = DEFAULT_POWER_CAP) -> PowerStructure:
    """The n-th normalized l1 power; materialized eagerly, so ``|B|^n <= cap``."""
    P = PowerStructure(B, n)
    P.structure = P.materialize(cap)
    return P


def diagonal_embedding(B: MetricStructure, gs: Sequence, target: PowerStructure | None = None) -> Embedding:
    """``b -> (g_1 b, ..., g_n b)`` into the power ``B^len(gs)``."""
    perms = [_as_perm(B, g) for g in gs]
    for p in perms:
        if not _is_automorphism(B, p):
            raise ValueError("diagonal coordinates must be automorphisms")
    C = target if target is not None else PowerStructure(B, len(perms))
    if C.n != len(perms) or C.base != B:
        raise ValueError("target power does not match")
    pts = B.points
    images = tuple(tuple(pts[p[x]] for p in perms) for x in range(len(pts)))
    return Embedding(PointedStructure.full(B), C, images)


def _as_perm(B: MetricStructure, g) -> tuple[int, ...]:
    if isinstance(g, Embedding):
        return tuple(B.index(y) for y in g.images)
    if isinstance(g, Mapping):
        return tuple(B.index(g[x]) for x in B.points)
    g = tuple(g)
    if g and isinstance(g[0], str):
        return tuple(B.index(y) for y in g)
    return g


def _is_automorphism(B: MetricStructure, p: Sequence[int]) -> bool:
    n = len(B.points)
    if sorted(p) != list(range(n)):
        return False
    e = Embedding(PointedStructure.full(B), B, tuple(B.points[i] for i in p))
    return is_embedding(e)


# -- groups ----------------------------------------------------------------------

@dataclass
class GroupAction:
    """A finite group of automorphisms of ``carrier`` with its bi-invariant metric.

    Elements are permutations of point indices; ``mult[a][b]`` is the index of
    ``a ∘ b`` (apply ``b`` first).
    """

    carrier: MetricStructure
    elements: list[tuple[int, ...]]
    generators: list[int]
    base_tuple: tuple[str, ...]
    delta: list[list[Fraction]]
    mult: list[list[int]] = field(repr=False)
    inverse: list[int] = field(repr=False)

    def __len__(self):
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def diameter(self) -> Fraction:
        return max(max(row) for row in self.delta)

    def automorphism(self, k: int) -> Embedding:
        B = self.carrier
        return Embedding(PointedStructure.full(B), B, tuple(B.points[i] for i in self.elements[k]))

    def delta_by_definition(self, a: int, b: int) -> Fraction:
        """max over h of the sup-distance between a h(b̄) and b h(b̄); for cross-checks."""
        B = self.carrier
        ids = [B.index(x) for x in self.base_tuple]
        pa, pb = self.elements[a], self.elements[b]
        return max(max(B.dist[pa[h[x]]][pb[h[x]]] for x in ids) for h in self.elements)


def group_closure(B: MetricStructure, generators: Sequence, base_tuple: Sequence[str] | None = None,
                  cap: int = DEFAULT_GROUP_CAP) -> GroupAction:
    """Subgroup of Aut(B) generated by ``generators`` (breadth-first over products)."""
    gens = [_as_perm(B, g) for g in generators]
    for g in gens:
        if not _is_automorphism(B, g):
            raise ValueError("generators must be automorphisms of B")
    n = len(B.points)
    ident = tuple(range(n))
    elements = [ident]
    pos = {ident: 0}
    queue = deque([ident])
    while queue:
        h = queue.popleft()
        for g in gens:
            hg = tuple(h[g[x]] for x in range(n))
            if hg not in pos:
                if len(elements) >= cap:
                    raise ResourceCapError(f"group closure exceeds {cap} elements")
                pos[hg] = len(elements)
                elements.append(hg)
                queue.append(hg)
    mult = [[pos[tuple(a[b[x]] for x in range(n))] for b in elements] for a in elements]
    inverse = [row.index(0) for row in mult]
    bt = tuple(base_tuple) if base_tuple is not None else B.points
    covered = set(bt) | set(B.constant_points)
    if any(p not in covered for p in B.points):
        raise ValueError("base tuple must generate the carrier")
    orbit = sorted({h[B.index(x)] for h in elements for x in bt})
    delta = kernels.delta_table(elements, B.dist, orbit)
    gen_ids = [pos[g] for g in gens]
    return GroupAction(B, elements, gen_ids, bt, delta, mult, inverse)


def theta(i: int, hbar: Sequence[int], G: GroupAction) -> tuple[int, ...]:
    """Right translation of every coordinate by generator ``i`` (0-based)."""
    if not 0 <= i < len(G.generators):
        raise IndexError(f"generator index {i} out of range")
    g = G.generators[i]
    return tuple(G.mult[h][g] for h in hbar)


def delta_n(G: GroupAction, h1: Sequence[int], h2: Sequence[int]) -> Fraction:
    return sum((G.delta[a][b] for a, b in zip(h1, h2)), Fraction(0)) / len(h1)


def sample_haar(G: GroupAction, n: int, seed: int, count: int | None = None):
    """Uniform element(s) of ``H^n``; one tuple, or a ``count x n`` array."""
    rng = np.random.default_rng(seed)
    draw = rng.integers(0, len(G.elements), size=(count or 1, n), dtype=np.int64)
    if count is None:
        return tuple(int(v) for v in draw[0])
    return draw


# -- certified logarithms and the sample-size bound -----------------------------------

_LN2_CACHE: dict[int, tuple[Fraction, Fraction]] = {}


def _atanh_bounds(y: Fraction, terms: int) -> tuple[Fraction, Fraction]:
    """Bounds on atanh(y) for 0 <= y < 1 from the odd power series."""
    s = Fraction(0)
    p = y
    y2 = y * y
    for j in range(terms):
        s += p / (2 * j + 1)
        p *= y2
    tail = p / ((2 * terms + 1) * (1 - y2))
    return s, s + tail


def ln_bounds(x, terms: int = 30) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= ln(x) <= hi`` for rational ``x > 0``."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("logarithm of a nonpositive number")
    if x < 1:
        lo, hi = ln_bounds(1 / x, terms)
        return -hi, -lo
    e = 0
    while x >= 2:
        x /= 2
        e += 1
    if terms not in _LN2_CACHE:
        lo2, hi2 = _atanh_bounds(Fraction(1, 3), terms)
        _LN2_CACHE[terms] = (2 * lo2, 2 * hi2)
    l2lo, l2hi = _LN2_CACHE[terms]
    lo, hi = _atanh_bounds((x - 1) / (x + 1), terms)
    return e * l2lo + 2 * lo, e * l2hi + 2 * hi


def concentration_n(diam, eps, k: int) -> int:
    """Least n with 2 exp(-2 n eps^2 / diam^2) < 1/k.

    Equivalently the least integer above diam^2 ln(2k) / (2 eps^2); the
    logarithm is bracketed by certified rational bounds until the integer
    part is determined.
    """
    diam, eps = Fraction(diam), Fraction(eps)
    if diam <= 0 or eps <= 0 or k < 1:
        raise ValueError("need diam > 0, eps > 0 and k >= 1")
    scale = diam * diam / (2 * eps * eps)
    terms = 20
    while True:
        lo, hi = ln_bounds(2 * k, terms)
        xlo, xhi = scale * lo, scale * hi
        if math.floor(xlo) == math.floor(xhi):
            return math.floor(xlo) + 1
        terms *= 2


def tail_below(n: int, diam, eps, k: int) -> bool:
    """Certified check of 2 exp(-2 n eps^2 / diam^2) < 1/k."""
    diam, eps = Fraction(diam), Fraction(eps)
    _, hi = ln_bounds(2 * k, 60)
    return 2 * n * eps * eps / (diam * diam) > hi


def analytic_bound(n: int, diam, eps) -> float:
    """Two-sided bounded-differences tail, capped at 1 (reporting only)."""
    diam, eps = Fraction(diam), Fraction(eps)
    return min(1.0, 2.0 * math.exp(-2.0 * n * float(eps * eps / (diam * diam))))


def hoeffding_tolerance(samples: int, confidence: float = 0.99) -> float:
    """Half-width t with P(|mean - p| > t) <= 1 - confidence for a Bernoulli mean."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * samples))


# -- colorings on powers and the witness search ------------------------------------------

class PowerDistanceColoring:
    """``min(cap, rho-distance to anchors)`` on embeddings of ``A`` into a power.

    Evaluated with the integer kernel; 1-Lipschitz by construction.
    """

    def __init__(self, power: PowerStructure, A: PointedStructure, anchors: Sequence[Embedding], cap=1):
        if not anchors:
            raise ValueError("at least one anchor is required")
        self.power = power
        self.A = A
        self.cap = Fraction(cap)
        self.anchors = tuple(anchors)
        self._anchor_idx = np.array([self._index(e) for e in anchors], dtype=np.int64)

    def _index(self, e: Embedding) -> list[list[int]]:
        B = self.power.base
        return [[B.index(c) for c in e(a)] for a in self.A.generators]

    def __call__(self, alpha: Embedding) -> Fraction:
        if alpha.target != self.power or alpha.source != self.A:
            raise KeyError("embedding outside the coloring's domain")
        probe = np.array([self._index(alpha)], dtype=np.int64)
        (v,) = kernels.rho_min_to_anchors(self.power.base.dist, probe, self._anchor_idx, self.power.n)
        return min(self.cap, v)


def _restrict_diagonal(G: GroupAction, A: PointedStructure, hbar: Sequence[int],
                       power: PowerStructure) -> Embedding:
    B = G.carrier
    pts = B.points
    images = tuple(tuple(pts[G.elements[h][B.index(a)]] for h in hbar) for a in A.structure.points)
    return Embedding(A, power, images)


def random_power_coloring(G: GroupAction, A: PointedStructure, n: int, anchors: int,
                          seed: int) -> PowerDistanceColoring:
    """Distance-to-anchors coloring of Emb(A, B'^n); anchors are random diagonal embeddings."""
    power = PowerStructure(G.carrier, n)
    draws = sample_haar(G, n, seed, count=anchors)
    S = [_restrict_diagonal(G, A, row, power) for row in draws]
    return PowerDistanceColoring(power, A, S)


@dataclass(frozen=True)
class WitnessResult:
    found: bool
    beta: Embedding | None
    oscillation: Fraction
    samples_used: int
    hbar: tuple[int, ...] | None
    best_oscillation: Fraction

    def to_text(self) -> str:
        lines = [f"found {'yes' if self.found else 'no'}",
                 f"oscillation {self.oscillation}",
                 f"best_oscillation {self.best_oscillation}",
                 f"samples {self.samples_used}"]
        if self.hbar is not None:
            lines.append("hbar " + " ".join(map(str, self.hbar)))
        return "\n".join(lines) + "\n"


def restricted_generators(G: GroupAction, A: PointedStructure) -> list[Embedding]:
    """The embeddings ``g_i|A`` of A into the carrier."""
    B = G.carrier
    out = []
    for k in G.generators:
        perm = G.elements[k]
        out.append(Embedding(A, B, tuple(B.points[perm[B.index(a)]] for a in A.structure.points)))
    return out


def find_witness(gamma: Callable[[Embedding], Fraction], A: PointedStructure, G: GroupAction,
                 n: int, eps, budget: int, seed: int, exhaustive: bool = False) -> WitnessResult:
    """Search ``h`` in ``H^n`` whose diagonal ``beta`` makes gamma 2*eps-flat on ``{beta ∘ g_i|A}``.

    Samples uniformly (or scans ``H^n`` in order when ``exhaustive`` and
    ``|H|^n`` is at most 10^4). The returned oscillation is exact.
    """
    eps = Fraction(eps)
    if eps <= 0 or budget < 1:
        raise ValueError("need eps > 0 and a positive budget")
    B = G.carrier
    power = PowerStructure(B, n)
    F = restricted_generators(G, A)
    order = len(G.elements)
    if exhaustive:
        if order ** n > EXHAUSTIVE_LIMIT:
            raise ResourceCapError(f"|H|^n = {order ** n} is above {EXHAUSTIVE_LIMIT}")
        stream: Iterable = itertools.islice(itertools.product(range(order), repeat=n), budget)
    else:
        stream = (tuple(int(v) for v in row) for row in sample_haar(G, n, seed, count=budget))
    best = None
    used = 0
    for hbar in stream:
        used += 1
        beta = diagonal_embedding(B, [G.elements[h] for h in hbar], power)
        osc = oscillation(gamma, push_forward(F, beta))
        if best is None or osc < best[0]:
            best = (osc, beta, tuple(hbar))
        if osc <= 2 * eps:
            return WitnessResult(True, beta, osc, used, tuple(hbar), osc)
    if best is None:
        return WitnessResult(False, None, Fraction(0), 0, None, Fraction(0))
    return WitnessResult(False, best[1], best[0], used, best[2], best[0])


# -- empirical concentration -----------------------------------------------------------

@dataclass(frozen=True)
class ConcentrationReport:
    group_size: int
    n: int
    samples: int
    epsilon: Fraction
    empirical_mass: Fraction
    bound: float
    seed: int
    mean: Fraction | float
    mean_exact: bool

    CSV_COLUMNS = ("group_size", "n", "epsilon", "samples", "empirical_mass", "bound", "seed")

    def row(self) -> list[str]:
        return [str(self.group_size), str(self.n), str(self.epsilon), str(self.samples),
                str(self.empirical_mass), repr(self.bound), str(self.seed)]


def reports_to_csv(reports: Sequence[ConcentrationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ConcentrationReport.CSV_COLUMNS)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def empirical_concentration(G: GroupAction, n: int, f, samples: int, eps, seed: int,
                            anchors: int = 4) -> ConcentrationReport:
    """Fraction of Haar samples of ``H^n`` where ``|f - E f| > eps``.

    ``f`` is ``"point"`` (normalized l1 distance to the identity tuple, whose
    mean is exact), ``"set"`` (distance to ``anchors`` random tuples, mean
    estimated from the samples) or a callable on element-index tuples.
    """
    eps = Fraction(eps)
    draws = sample_haar(G, n, seed, count=samples)
    diam = G.diameter()
    if callable(f):
        vals = [Fraction(f(tuple(int(v) for v in row))) for row in draws]
        mean = sum(vals, Fraction(0)) / samples
        exact = False
    else:
        if f == "point":
            centers = np.zeros((1, 1, n), dtype=np.int64)
        elif f == "set":
            centers = sample_haar(G, n, seed + 1, count=anchors).reshape(anchors, 1, n)
        else:
            raise ValueError(f"unknown function family {f!r}")
        raw = kernels.rho_min_to_anchors(G.delta, draws.reshape(samples, 1, n), centers, n)
        vals = [min(Fraction(1), v) for v in raw]
        if f == "point" and diam <= 1:
            # coordinates are i.i.d., so E f = average of delta(h, e) over h
            mean = sum((row[0] for row in G.delta), Fraction(0)) / len(G.elements)
            exact = True
        else:
            mean = sum(vals, Fraction(0)) / samples
            exact = False
    bad = sum(1 for v in vals if abs(v - mean) > eps)
    return ConcentrationReport(len(G.elements), n, samples, eps, Fraction(bad, samples),
                               analytic_bound(n, diam, eps), seed, mean, exact)


def levy_chain(G: GroupAction, ns: Sequence[int], eps, samples: int, seed: int,
               f="point") -> list[ConcentrationReport]:
    """Reports along the chain ``H^n1 <= H^n2 <= ...`` at a fixed eps."""
    return [empirical_concentration(G, n, f, samples, eps, seed + k) for k, n in enumerate(ns)]


# -- extension property search ------------------------------------------------------------

def partial_automorphisms(A: MetricStructure) -> list[dict[str, str]]:
    """Every isometry between substructures of A (constants fixed), as dicts.

    Empty domains are skipped. Order: by domain size, then domain, then image.
    """
    consts = list(A.constant_points)
    free = [p for p in A.points if p not in consts]
    out = []
    for size in range(0, len(free) + 1):
        for dom in itertools.combinations(free, size):
            labels = list(dom) + consts
            if not labels:
                continue
            sub = A.induced(labels)
            for e in enumerate_embeddings(PointedStructure.full(sub), A):
                out.append(dict(zip(sub.points, e.images)))
    return out


@dataclass(frozen=True)
class ExtensionCaps:
    max_extra_points: int = 2
    max_candidates: int = 200_000
    sum_depth: int = 2
    max_denominator: int | None = None


@dataclass(frozen=True)
class ExtensionResult:
    found: bool
    structure: MetricStructure | None
    embedding: Embedding | None
    extensions: tuple[tuple[dict, Embedding], ...]
    candidates: int
    nodes: int
    extra_points_tried: int
    distance_set: tuple[Fraction, ...]

    def stats(self) -> str:
        return (f"candidates={self.candidates} nodes={self.nodes} "
                f"extra_points_tried={self.extra_points_tried} "
                f"distance_set={','.join(map(str, self.distance_set))}")


def _distance_set(A: MetricStructure, caps: ExtensionCaps) -> list[Fraction]:
    base = sorted({A.dist[i][j] for i in range(len(A.points)) for j in range(i + 1, len(A.points))})
    if not base:
        base = [Fraction(1)]
    sums = set(base)
    frontier = set(base)
    for _ in range(caps.sum_depth - 1):
        frontier = {a + b for a in frontier for b in base}
        sums |= frontier
    cap = A.signature.diameter
    out = []
    for v in sorted(sums):
        if cap is not None and v > cap:
            continue
        if caps.max_denominator is not None and v.denominator > caps.max_denominator:
            continue
        out.append(v)
    return out


def _extends(B: MetricStructure, partial: Mapping[str, str]) -> Embedding | None:
    found = enumerate_embeddings(PointedStructure.full(B), B, fixed=partial, limit=1)
    return found.members[0] if found.members else None


def _extension_search(T: MetricStructure, required: Sequence[Mapping[str, str]],
                      caps: ExtensionCaps) -> ExtensionResult:
    if any(p.arity > 1 for p in T.signature.predicates):
        raise ValueError("extension search supports unary predicates only")
    dset = _distance_set(T, caps)
    unary = T.signature.unary
    value_sets = [sorted({T.value_at(k, (i,)) for i in range(len(T.points))} or {p.lo})
                  for k, p in enumerate(T.signature.predicates)]
    stats = {"candidates": 0, "nodes": 0}

    def check(B: MetricStructure):
        stats["candidates"] += 1
        exts = []
        for p in required:
            g = _extends(B, p)
            if g is None:
                return None
            exts.append((dict(p), g))
        return exts

    def labels_for(m: int) -> list[str]:
        out, k = [], 1
        while len(out) < m:
            lab = f"e{k}"
            if lab not in T.points:
                out.append(lab)
            k += 1
        return out

    tried = 0
    for m in range(0, caps.max_extra_points + 1):
        tried = m
        new = labels_for(m)
        result = _grow(T, new, dset, value_sets, unary, check, stats, caps)
        if result is not None:
            B, exts = result
            emb = Embedding(PointedStructure.full(T), B, T.points)
            return ExtensionResult(True, B, emb, tuple(exts), stats["candidates"], stats["nodes"],
                                   m, tuple(dset))
        if stats["candidates"] >= caps.max_candidates:
            break
    return ExtensionResult(False, None, None, (), stats["candidates"], stats["nodes"], tried,
                           tuple(dset))


def _grow(T, new, dset, value_sets, unary, check, stats, caps):
    """Depth-first over distance rows and unary values of the new points."""
    sig = T.signature
    base_n = len(T.points)
    dist = [list(r) for r in T.dist]
    vals = [[T.value_at(k, (i,)) for i in range(base_n)] for k in range(len(sig.predicates))]

    def place(t: int):
        if stats["candidates"] >= caps.max_candidates:
            return None
        if t == len(new):
            S = MetricStructure(sig, T.points + tuple(new), tuple(map(tuple, dist)),
                                tuple(tuple(v) for v in vals), T.constants)
            exts = check(S)
            return (S, exts) if exts is not None else None
        size = base_n + t
        for row in itertools.product(dset, repeat=size):
            stats["nodes"] += 1
            if not _katetov(dist, row):
                continue
            for i in range(size):
                dist[i].append(row[i])
            dist.append(list(row) + [Fraction(0)])
            for choice in itertools.product(*value_sets):
                if all(abs(choice[k] - vals[k][i]) <= p.lipschitz * row[i]
                       for k, p in enumerate(sig.predicates) for i in range(size)):
                    for k in range(len(vals)):
                        vals[k].append(choice[k])
                    got = place(t + 1)
                    for k in range(len(vals)):
                        vals[k].pop()
                    if got is not None:
                        return got
            dist.pop()
            for i in range(size):
                dist[i].pop()
            if stats["candidates"] >= caps.max_candidates:
                return None
        return None

    return place(0)


def _katetov(dist, row) -> bool:
    n = len(row)
    for i in range(n):
        for j in range(i + 1, n):
            d = dist[i][j]
            if abs(row[i] - row[j]) > d or d > row[i] + row[j]:
                return False
    return True


def eppa_search(A: MetricStructure, caps: ExtensionCaps = ExtensionCaps()) -> ExtensionResult:
    """Smallest B found (within caps) in which every partial automorphism of A extends.

    ``found == False`` is a legitimate outcome reported with search statistics.
    """
    return _extension_search(A, partial_automorphisms(A), caps)


@dataclass(frozen=True)
class WEPResult:
    found: bool
    structure: MetricStructure | None
    automorphisms: tuple[Embedding, ...]
    group: GroupAction | None
    search: ExtensionResult


def weak_extension_witness(A: PointedStructure, alphas: Sequence[Embedding], eps,
                           caps: ExtensionCaps = ExtensionCaps()) -> WEPResult:
    """Automorphisms of some ``B' ⊇ T`` approximating the embeddings ``alphas: A -> T``.

    ``T`` is the common target of ``alphas`` and must contain A's labels. The
    partial maps ``a -> alpha_i(a)`` are extended exactly, so the approximation
    holds for every ``eps >= 0``.
    """
    if not alphas:
        raise ValueError("at least one embedding is required")
    T = alphas[0].target
    for a in alphas:
        if a.target != T or a.source != A:
            raise ValueError("all alphas must be embeddings of A into one structure")
    missing = [p for p in A.structure.points if p not in T.points]
    if missing:
        raise ValueError(f"A's points {missing} are not points of the alphas' target")
    if A.structure != T.induced(A.structure.points):
        raise ValueError("A must be a substructure of the alphas' target")
    required = [dict(zip(A.structure.points, a.images)) for a in alphas]
    res = _extension_search(T, required, caps)
    if not res.found:
        return WEPResult(False, None, (), None, res)
    Bp = res.structure
    gs = tuple(g for _, g in res.extensions)
    group = group_closure(Bp, gs)
    primes = [g.restrict(A) for g in gs]
    originals = [Embedding(A, Bp, a.images) for a in alphas]
    assert eps_approximates(Bp, primes, A, originals, eps)
    return WEPResult(True, Bp, gs, group, res)
