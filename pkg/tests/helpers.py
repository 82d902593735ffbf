"""Random generators shared by the test modules."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from hypothesis import strategies as st

from fraisse.structures import MetricStructure, PointedStructure, Predicate, Signature

P_UNARY = Predicate("P", 1, 1, 0, 1)
R_BINARY = Predicate("R", 2, 2, 0, 1)

SIG_EMPTY = Signature()
SIG_P = Signature((P_UNARY,))
SIG_PR = Signature((P_UNARY, R_BINARY))
SIG_PC = Signature((P_UNARY,), ("c",))


def path_closure(D):
    n = len(D)
    D = [row[:] for row in D]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if D[i][k] + D[k][j] < D[i][j]:
                    D[i][j] = D[i][k] + D[k][j]
    return D


def random_metric(rng: random.Random, n: int, den: int, top: int = 2):
    """Shortest-path closure of random weights in (0, top] with denominator ``den``."""
    D = [[Fraction(0)] * n for _ in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        D[i][j] = D[j][i] = Fraction(rng.randint(1, top * den), den)
    return path_closure(D)


def lipschitz_values(rng: random.Random, D, den: int, L=1, lo=0, hi=1):
    """Random values on a grid, pushed down to an L-Lipschitz function."""
    n = len(D)
    raw = [Fraction(rng.randint(lo * den, hi * den), den) for _ in range(n)]
    return [max(Fraction(lo), min(raw[y] + L * D[x][y] for y in range(n))) for x in range(n)]


def random_structure(rng: random.Random, max_points: int = 6, max_den: int = 12,
                     sig: Signature | None = None, labels: str = "p") -> MetricStructure:
    if sig is None:
        sig = rng.choice([SIG_EMPTY, SIG_P, SIG_PR, SIG_PC])
    n = rng.randint(1, max_points)
    den = rng.randint(1, max_den)
    D = random_metric(rng, n, den)
    points = [f"{labels}{i}" for i in range(n)]
    consts = {c: rng.choice(points) for c in sig.constants}
    anchor = [points.index(v) for v in consts.values()]
    preds = {}
    for p in sig.predicates:
        if p.arity == 1:
            vals = lipschitz_values(rng, D, den)
            # vanish at the constants so that structures over one signature amalgamate
            vals = [min([v] + [D[i][a] for a in anchor]) for i, v in enumerate(vals)]
            preds[p.name] = dict(zip(points, vals))
        else:
            preds[p.name] = {(points[i], points[j]): min(Fraction(1), D[i][j])
                             for i in range(n) for j in range(n)}
    return MetricStructure.build(sig, points, D, predicates=preds, constants=consts)


def random_pointed(rng: random.Random, arity: int, max_den: int = 4, sig: Signature = SIG_P,
                   labels: str = "x") -> PointedStructure:
    """A structure generated by ``arity`` distinct points (plus constants)."""
    extra = len(sig.constants)
    while True:
        s = random_structure(rng, max_points=arity + extra, max_den=max_den, sig=sig, labels=labels)
        free = [p for p in s.points if p not in s.constant_points]
        if len(free) >= arity and len(s.points) == arity + len(s.constant_points):
            return PointedStructure(s, tuple(rng.sample(free, arity)))


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@st.composite
def structures(draw, max_points=5, max_den=12, sig=None):
    return random_structure(random.Random(draw(seeds)), max_points, max_den, sig)


def random_ramsey_instance(rng: random.Random, max_domain: int = 4, max_betas: int = 6):
    """A Ramsey instance with |Emb(A, C)| <= max_domain and 1 <= |Emb(B, C)| <= max_betas."""
    from fraisse.embeddings import enumerate_embeddings
    from fraisse.ramsey import RamseyInstance

    while True:
        den = rng.choice([1, 2, 3, 4])
        m = rng.randint(2, 4)
        C = MetricStructure.build(SIG_EMPTY, [f"c{i}" for i in range(m)],
                                  random_metric(rng, m, den, top=1))
        if rng.random() < 0.5:
            A = PointedStructure(C.induced([C.points[0]]).relabel({C.points[0]: "a"}), ("a",))
        else:
            A = PointedStructure(C.induced(list(C.points[:2])).relabel(
                {C.points[0]: "a0", C.points[1]: "a1"}), ("a0", "a1"))
        k = rng.randint(len(A.generators) + 1, len(C.points)) if len(C.points) > len(A.generators) else len(C.points)
        labels = rng.sample(list(C.points), k)
        B = C.induced(labels).relabel({p: "b" + p for p in labels})
        domain = enumerate_embeddings(A, C)
        betas = enumerate_embeddings(PointedStructure.full(B), C)
        if not (len(domain) <= max_domain and 1 <= len(betas) <= max_betas):
            continue
        embs = list(enumerate_embeddings(A, B))
        if len(embs) < 2:
            continue
        F = rng.sample(embs, rng.randint(2, len(embs)))
        eps = Fraction(1, rng.choice([2, 3, 4]))
        return RamseyInstance(A, B, tuple(F), eps, C)


def random_extension(rng: random.Random, s: MetricStructure, label: str, den: int = 4) -> MetricStructure:
    """Add one point at distance max_j d(x, z_j) + r_j, a Katetov function for any r_j > 0."""
    from fraisse.amalgamation import ExtensionRequest, extend_one_point

    zs = rng.sample(list(s.points), rng.randint(1, len(s.points)))
    rs = [Fraction(rng.randint(1, 2 * den), den) for _ in zs]
    f = {x: max(s.distance(x, z) + r for z, r in zip(zs, rs)) for x in s.points}
    vals = {p.name: s.value(p.name, zs[0]) for p in s.signature.unary}
    return extend_one_point(ExtensionRequest(s, label, f, vals))


def random_amalgamation_instance(rng: random.Random, sig: Signature | None = None):
    """(A, B0, B1, phi0, phi1) with both arms grown from A by one-point extensions."""
    from fraisse.embeddings import Embedding

    if sig is None:
        sig = rng.choice([SIG_EMPTY, SIG_P, SIG_PR, SIG_PC])
    base = random_structure(rng, max_points=3, max_den=4, sig=sig, labels="a")
    B0 = base
    for k in range(rng.randint(0, 3)):
        B0 = random_extension(rng, B0, f"n{k}")
    B1 = base
    for k in range(rng.randint(0, 3)):
        B1 = random_extension(rng, B1, f"n{k}")
    # rename the copy of A inside B1 so the arms use different labels
    B1 = B1.relabel({p: "b" + p for p in base.points})
    A = PointedStructure.full(base)
    phi0 = Embedding(A, B0, base.points)
    phi1 = Embedding(A, B1, tuple("b" + p for p in base.points))
    return A, B0, B1, phi0, phi1
