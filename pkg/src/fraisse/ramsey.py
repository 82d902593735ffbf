"""Colorings of embedding sets and exact approximate-Ramsey instance checks.

The central routine, :func:`worst_coloring`, computes

    max over 1-Lipschitz colorings g of Emb(A, C)
        min over beta in Emb(B, C) of  oscillation(g, F(beta))

exactly. The oscillation on ``F(beta)`` is the largest ordered gap
``g(beta∘a_i) - g(beta∘a_j)``, so fixing one ordered pair per ``beta``
turns the max-min into a single LP (maximize ``v`` subject to each chosen
gap being at least ``v``). The search branches over these choices, one
``beta`` at a time, and prunes with the LP value of the partial choice.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import ratlp
from .embeddings import (
    Embedding,
    EmbeddingSet,
    compose,
    enumerate_embeddings,
    node_budget,
    oscillation,
    push_forward,
    rho,
)
from .structures import MetricStructure, PointedStructure, serialize, serialize_pointed

__all__ = [
    "Coloring",
    "DistanceColoring",
    "RamseyInstance",
    "VerifierReport",
    "InconclusiveSearch",
    "INFINITY",
    "DEFAULT_NODE_BUDGET",
    "worst_coloring",
    "check_arp_instance",
    "best_beta",
    "random_coloring",
    "eps_approximates",
    "is_coloring",
]

INFINITY = math.inf
DEFAULT_NODE_BUDGET = 10 ** 5


class InconclusiveSearch(RuntimeError):
    def __init__(self, report: "VerifierReport"):
        super().__init__(f"search budget exhausted after {report.nodes_explored} nodes; "
                         f"worst value in [{report.worst_value}, {report.upper_bound}]")
        self.report = report


@dataclass(frozen=True)
class Coloring:
    """A [0,1]-valued map on an enumerated embedding set."""

    domain: EmbeddingSet
    values: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))
        if len(self.values) != len(self.domain):
            raise ValueError("one value per domain member is required")
        if any(v < 0 or v > 1 for v in self.values):
            raise ValueError("coloring values must lie in [0, 1]")

    def __call__(self, alpha: Embedding) -> Fraction:
        T = self.domain.target
        if alpha.target is not T and alpha.target != T:
            raise KeyError("embedding outside the coloring's domain")
        try:
            return self.values[self.domain.index(alpha)]
        except ValueError:
            raise KeyError("embedding outside the coloring's domain") from None

    @classmethod
    def constant(cls, domain: EmbeddingSet, value=0) -> "Coloring":
        return cls(domain, (Fraction(value),) * len(domain))


def is_coloring(gamma: Coloring) -> bool:
    """Values in [0,1] and 1-Lipschitz for the generator metric."""
    members = gamma.domain.members
    vals = gamma.values
    if any(v < 0 or v > 1 for v in vals):
        return False
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            if abs(vals[i] - vals[j]) > rho(members[i], members[j]):
                return False
    return True


class DistanceColoring:
    """``min(1, distance to a set of anchor embeddings)``; 1-Lipschitz on any domain."""

    def __init__(self, anchors: Sequence[Embedding], cap=1):
        if not anchors:
            raise ValueError("at least one anchor is required")
        self.anchors = tuple(anchors)
        self.cap = Fraction(cap)

    def __call__(self, alpha: Embedding) -> Fraction:
        return min(self.cap, min(rho(alpha, s) for s in self.anchors))


@dataclass(frozen=True)
class RamseyInstance:
    A: PointedStructure
    B: MetricStructure
    F: tuple[Embedding, ...]
    epsilon: Fraction
    C: MetricStructure

    def __post_init__(self):
        object.__setattr__(self, "F", tuple(self.F))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if not self.F:
            raise ValueError("F must be nonempty")
        if len({f.images for f in self.F}) != len(self.F):
            raise ValueError("F members must be pairwise distinct")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        sig = self.A.signature
        if not (sig == self.B.signature == self.C.signature):
            raise ValueError("A, B and C must share one signature")
        for f in self.F:
            if f.source != self.A or f.target != self.B:
                raise ValueError("F members must be embeddings of A into B")

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(serialize_pointed(self.A).encode())
        h.update(serialize(self.B).encode())
        h.update(serialize(self.C).encode())
        for f in self.F:
            h.update((" ".join(f.images) + "\n").encode())
        h.update(str(self.epsilon).encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class VerifierReport:
    worst_value: Fraction | float
    worst_coloring: Coloring
    holds: bool
    best_beta: Embedding | None
    nodes_explored: int
    status: str = "exact"            # exact | inconclusive | no-embedding
    upper_bound: Fraction | float | None = None
    digest: str = ""
    epsilon: Fraction | None = None

    @property
    def conclusive(self) -> bool:
        return self.status != "inconclusive"

    def to_text(self) -> str:
        lines = [
            f"instance {self.digest}",
            f"status {self.status}",
            f"epsilon {self.epsilon}",
            f"worst_value {_fmt_value(self.worst_value)}",
            f"upper_bound {_fmt_value(self.upper_bound)}",
            f"holds {'yes' if self.holds else 'no'}",
            f"nodes {self.nodes_explored}",
        ]
        if self.best_beta is not None:
            lines.append("best_beta " + " ".join(f"{k}->{v}" for k, v in self.best_beta.as_dict().items()))
        for e, v in zip(self.worst_coloring.domain, self.worst_coloring.values):
            lines.append(f"color {' '.join(map(str, e.generator_images))} {v}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["digest", "status", "worst_value", "upper_bound", "holds", "nodes",
                    "embedding", "color"])
        for e, v in zip(self.worst_coloring.domain, self.worst_coloring.values):
            w.writerow([self.digest, self.status, _fmt_value(self.worst_value),
                        _fmt_value(self.upper_bound), int(self.holds), self.nodes_explored,
                        " ".join(map(str, e.generator_images)), str(v)])
        return buf.getvalue()


def _fmt_value(v) -> str:
    if v is None:
        return "-"
    if v == INFINITY:
        return "inf"
    return str(v)


class _Problem:
    """Pre-enumerated data for one instance."""

    def __init__(self, inst: RamseyInstance, max_nodes: int | None):
        self.inst = inst
        self.domain = enumerate_embeddings(inst.A, inst.C, max_nodes)
        self.betas = enumerate_embeddings(PointedStructure.full(inst.B), inst.C, max_nodes)
        self.images = [[self.domain.index(compose(beta, d)) for d in inst.F]
                       for beta in self.betas]
        N = len(self.domain)
        self.rho = self.domain.rho_matrix()
        self.N = N

    def base_lp(self) -> ratlp.LinearProgram:
        lp = ratlp.LinearProgram()
        for p in range(self.N):
            lp.add_variable(f"g{p}", 0, 1)
        lp.add_variable("v", None, 1)
        for p in range(self.N):
            for q in range(p + 1, self.N):
                r = self.rho[p][q]
                if r < 1:
                    lp.add_constraint({f"g{p}": 1, f"g{q}": -1}, "<=", r)
                    lp.add_constraint({f"g{q}": 1, f"g{p}": -1}, "<=", r)
        lp.maximize({"v": 1})
        return lp

    def solve(self, selection: dict[int, tuple[int, int]]):
        lp = self.base_lp()
        for k in sorted(selection):
            p, q = selection[k]
            lp.add_constraint({f"g{p}": 1, f"g{q}": -1, "v": -1}, ">=", 0)
        out = ratlp.solve(lp)
        assert out.status == "optimal", out.status
        gamma = tuple(out.assignment[f"g{p}"] for p in range(self.N))
        return out.optimum, gamma

    def osc(self, gamma, k: int) -> Fraction:
        vals = [gamma[p] for p in self.images[k]]
        return max(vals) - min(vals)


def worst_coloring(inst: RamseyInstance, node_budget_: int | None = None,
                   max_nodes: int | None = None) -> VerifierReport:
    """Exact worst-case coloring value of a Ramsey instance by branch and bound.

    A node budget overrun yields ``status == "inconclusive"`` together with the
    best lower bound found and a valid upper bound.
    """
    budget = node_budget(DEFAULT_NODE_BUDGET) if node_budget_ is None else node_budget_
    prob = _Problem(inst, max_nodes)
    digest = inst.digest()
    eps = inst.epsilon
    if not prob.betas.members:
        gamma = Coloring.constant(prob.domain)
        return VerifierReport(INFINITY, gamma, False, None, 0, "no-embedding", INFINITY,
                              digest, eps)
    if len(inst.F) == 1 or prob.N == 0:
        gamma = Coloring.constant(prob.domain)
        return VerifierReport(Fraction(0), gamma, True, prob.betas[0], 0, "exact",
                              Fraction(0), digest, eps)

    best_val = Fraction(0)
    best_gamma = (Fraction(0),) * prob.N
    nodes = 0
    # each stack entry: (selection, bound inherited from parent)
    stack: list[tuple[dict, Fraction]] = [({}, Fraction(1))]
    status = "exact"
    while stack:
        selection, bound = stack.pop()
        if bound <= best_val:
            continue
        if nodes >= budget:
            stack.append((selection, bound))
            status = "inconclusive"
            break
        nodes += 1
        v, gamma = prob.solve(selection)
        oscs = [prob.osc(gamma, k) for k in range(len(prob.betas))]
        achieved = min(oscs)
        if achieved > best_val:
            best_val, best_gamma = achieved, gamma
        if v <= best_val:
            continue
        k = next((k for k in range(len(prob.betas)) if k not in selection and oscs[k] < v), None)
        if k is None:
            continue
        img = prob.images[k]
        children = []
        for i in img:
            for j in img:
                if i == j or prob.rho[i][j] <= best_val:
                    continue
                children.append((-(gamma[i] - gamma[j]), i, j))
        children.sort()
        for _, i, j in reversed(children):
            child = dict(selection)
            child[k] = (i, j)
            stack.append((child, v))
    upper = best_val
    if status == "inconclusive":
        upper = max([best_val] + [b for _, b in stack])
    coloring = Coloring(prob.domain, best_gamma)
    beta, _ = best_beta(coloring, inst, _betas=prob.betas)
    return VerifierReport(best_val, coloring, best_val <= eps and status == "exact", beta,
                          nodes, status, upper, digest, eps)


def check_arp_instance(inst: RamseyInstance, node_budget_: int | None = None) -> bool:
    """``worst_value <= epsilon`` (closed comparison)."""
    rep = worst_coloring(inst, node_budget_)
    if rep.status == "inconclusive":
        if rep.upper_bound <= inst.epsilon:
            return True
        if rep.worst_value > inst.epsilon:
            return False
        raise InconclusiveSearch(rep)
    return rep.worst_value <= inst.epsilon


def best_beta(gamma, inst: RamseyInstance, _betas: EmbeddingSet | None = None):
    """The ``beta`` in Emb(B, C) minimizing the oscillation of ``gamma`` on F(beta)."""
    betas = _betas if _betas is not None else enumerate_embeddings(
        PointedStructure.full(inst.B), inst.C)
    if not betas.members:
        raise ValueError("Emb(B, C) is empty")
    best = None
    for beta in betas:
        o = oscillation(gamma, push_forward(inst.F, beta))
        if best is None or o < best[1]:
            best = (beta, o)
    return best


def random_coloring(domain: EmbeddingSet, seed: int) -> Coloring:
    """``min(1, rho-distance to a random nonempty subset of the domain)``."""
    if not domain.members:
        raise ValueError("empty domain")
    rng = np.random.default_rng(seed)
    while True:
        mask = rng.random(len(domain)) < 0.5
        if mask.any():
            break
    R = domain.rho_matrix()
    anchors = [k for k in range(len(domain)) if mask[k]]
    vals = tuple(min(Fraction(1), min(R[p][s] for s in anchors)) for p in range(len(domain)))
    return Coloring(domain, vals)


def eps_approximates(Bp: MetricStructure, primes: Sequence[Embedding], A: PointedStructure,
                     originals: Sequence[Embedding], eps) -> bool:
    """Every ``primes[i]`` moves the generators of A by at most ``eps`` from ``originals[i]``.

    Distances are measured in ``Bp``, which must contain the images of both lists.
    """
    eps = Fraction(eps)
    if len(primes) != len(originals):
        raise ValueError("primes and originals differ in length")
    for p, o in zip(primes, originals):
        if p.source.generators != A.generators or o.source.generators != A.generators:
            raise ValueError("all embeddings must have source tuple A")
        gap = max((Bp.distance(p(a), o(a)) for a in A.generators), default=Fraction(0))
        if gap > eps:
            return False
    return True
