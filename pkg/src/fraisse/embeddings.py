"""Embedding sets, the generator metric on them, push-forwards and automorphisms.

An :class:`Embedding` stores the image of every source point, in the order
of ``source.structure.points``. Targets are anything exposing
``distance(x, y)``, ``value(name, keys)``, ``signature`` and
``constant_map``: a :class:`~fraisse.structures.MetricStructure`, or a lazy
power from :mod:`fraisse.concentration`.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from . import kernels
from .structures import MetricStructure, PointedStructure

__all__ = [
    "Embedding",
    "EmbeddingSet",
    "EnumerationLimitError",
    "enumerate_embeddings",
    "is_embedding",
    "rho",
    "push_forward",
    "oscillation",
    "automorphisms",
    "compose",
    "identity",
    "DEFAULT_NODE_CAP",
]

DEFAULT_NODE_CAP = 10 ** 6


def node_budget(default: int) -> int:
    """``FRAISSE_NODE_BUDGET`` overrides the default search caps."""
    raw = os.environ.get("FRAISSE_NODE_BUDGET")
    return int(raw) if raw else default


class EnumerationLimitError(RuntimeError):
    def __init__(self, nodes: int, cap: int):
        super().__init__(f"embedding search aborted after {nodes} candidate nodes (cap {cap})")
        self.nodes = nodes
        self.cap = cap


@dataclass(frozen=True)
class Embedding:
    source: PointedStructure
    target: object
    images: tuple

    def __call__(self, label: str):
        return self.images[self.source.structure.index(label)]

    @property
    def generator_images(self) -> tuple:
        return tuple(self(g) for g in self.source.generators)

    def as_dict(self) -> dict:
        return dict(zip(self.source.structure.points, self.images))

    def restrict(self, sub: PointedStructure) -> "Embedding":
        """Restriction to a substructure whose labels are source labels."""
        return Embedding(sub, self.target, tuple(self(p) for p in sub.structure.points))


@dataclass(frozen=True)
class EmbeddingSet:
    source: PointedStructure
    target: object
    members: tuple[Embedding, ...]
    nodes: int = 0

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, k) -> Embedding:
        return self.members[k]

    def index(self, e: Embedding) -> int:
        if not hasattr(self, "_pos"):
            object.__setattr__(self, "_pos", {m.images: k for k, m in enumerate(self.members)})
        try:
            return self._pos[e.images]
        except KeyError:
            raise ValueError("embedding is not a member of this set") from None

    def rho_matrix(self) -> list[list[Fraction]]:
        return [[rho(a, b) for b in self.members] for a in self.members]

    def diameter(self) -> Fraction:
        return max((max(row) for row in self.rho_matrix()), default=Fraction(0))


def _compat(A: MetricStructure, B: MetricStructure, fixed: Mapping[str, str] | None):
    sig = A.signature
    unary = [k for k, p in enumerate(sig.predicates) if p.arity == 1]
    cmap_a = A.constant_map
    cmap_b = B.constant_map
    forced: dict[int, int] = {}
    for c, p in cmap_a.items():
        forced[A.index(p)] = B.index(cmap_b[c])
    for src, tgt in (fixed or {}).items():
        i, t = A.index(src), B.index(tgt)
        if forced.get(i, t) != t:
            return None
        forced[i] = t
    rows = []
    for i in range(len(A.points)):
        row = []
        for t in range(len(B.points)):
            ok = forced.get(i, t) == t and all(
                A.value_at(k, (i,)) == B.value_at(k, (t,)) for k in unary)
            row.append(ok)
        rows.append(row)
    return rows


def _higher_arity_ok(A: MetricStructure, B: MetricStructure, assign: Sequence[int]) -> bool:
    for k, p in enumerate(A.signature.predicates):
        if p.arity < 2:
            continue
        for tup in itertools.product(range(len(A.points)), repeat=p.arity):
            if A.value_at(k, tup) != B.value_at(k, tuple(assign[i] for i in tup)):
                return False
    return True


def enumerate_embeddings(
    A: PointedStructure,
    B: MetricStructure,
    max_nodes: int | None = None,
    fixed: Mapping[str, str] | None = None,
    limit: int = 0,
) -> EmbeddingSet:
    """All embeddings of ``A`` into ``B`` in lexicographic order of target indices.

    ``fixed`` pins some source points to target points (used to extend partial
    maps). ``limit`` > 0 stops after that many members.
    """
    if isinstance(A, MetricStructure):
        A = PointedStructure.full(A)
    if A.signature != B.signature:
        raise ValueError("signature mismatch between source and target")
    cap = node_budget(DEFAULT_NODE_CAP) if max_nodes is None else max_nodes
    src = A.structure
    compat = _compat(src, B, fixed)
    if compat is None:
        return EmbeddingSet(A, B, ())
    has_higher = any(p.arity > 1 for p in src.signature.predicates)
    maps, nodes, aborted = kernels.search_embeddings(
        src.dist, B.dist, compat, cap, 0 if has_higher else limit)
    if aborted:
        raise EnumerationLimitError(nodes, cap)
    members = []
    for assign in maps:
        if has_higher and not _higher_arity_ok(src, B, assign):
            continue
        members.append(Embedding(A, B, tuple(B.points[t] for t in assign)))
        if limit and len(members) >= limit:
            break
    return EmbeddingSet(A, B, tuple(members), nodes)


def is_embedding(e: Embedding) -> bool:
    """Independent re-check: injective, isometric, value and constant preserving."""
    S = e.source.structure
    T = e.target
    pts = S.points
    if len(set(e.images)) != len(e.images):
        return False
    for x, y in itertools.combinations(pts, 2):
        if S.distance(x, y) != T.distance(e(x), e(y)):
            return False
    for p in S.signature.predicates:
        for tup in itertools.product(pts, repeat=p.arity):
            if S.value(p.name, tup) != T.value(p.name, tuple(e(x) for x in tup)):
                return False
    tmap = T.constant_map
    for c, x in S.constants:
        if e(x) != tmap[c]:
            return False
    return True


def rho(alpha: Embedding, beta: Embedding) -> Fraction:
    """Sup-distance between the images of the generator tuple."""
    if alpha.source.generators != beta.source.generators or alpha.source != beta.source:
        raise ValueError("embeddings have different sources")
    if alpha.target is not beta.target and alpha.target != beta.target:
        raise ValueError("embeddings have different targets")
    T = alpha.target
    return max((T.distance(alpha(g), beta(g)) for g in alpha.source.generators),
               default=Fraction(0))


def compose(beta: Embedding, delta: Embedding) -> Embedding:
    """``beta ∘ delta``; delta's target must be beta's source structure."""
    mid = beta.source.structure
    if delta.target is not mid and delta.target != mid:
        raise ValueError("composition mismatch: delta does not land in beta's source")
    return Embedding(delta.source, beta.target,
                     tuple(beta.images[mid.index(y)] for y in delta.images))


def push_forward(F: Iterable[Embedding], beta: Embedding) -> list[Embedding]:
    out = []
    seen = set()
    for delta in F:
        e = compose(beta, delta)
        if e.images not in seen:
            seen.add(e.images)
            out.append(e)
    return out


def oscillation(gamma: Callable[[Embedding], Fraction], S: Sequence[Embedding]) -> Fraction:
    """max - min of ``gamma`` over ``S``."""
    if not S:
        raise ValueError("oscillation over an empty set")
    vals = []
    for e in S:
        try:
            vals.append(gamma(e))
        except KeyError:
            raise ValueError("embedding outside the coloring's domain") from None
    return max(vals) - min(vals)


def identity(B: MetricStructure) -> Embedding:
    return Embedding(PointedStructure.full(B), B, B.points)


def automorphisms(B: MetricStructure, max_nodes: int | None = None) -> list[Embedding]:
    """All automorphisms of ``B``; the identity comes first."""
    return list(enumerate_embeddings(PointedStructure.full(B), B, max_nodes))
