"""Brute-force reference computations, independent of the LP engine."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from fraisse.structures import PointedStructure


# -- worst coloring: projected grid ---------------------------------------------------

def grid_worst_value(rho, images, step: Fraction) -> Fraction:
    """Max over grid colorings (projected to 1-Lipschitz) of min over beta of the oscillation.

    ``rho`` is the generator-distance matrix on Emb(A, C); ``images[k]`` lists
    the members of F(beta_k) as indices. Every candidate is a genuine
    1-Lipschitz coloring, so the result is a lower bound on the true value
    that misses it by at most ``step``.
    """
    N = len(rho)
    levels = int(1 / step)
    den = step.denominator
    for row in rho:
        for r in row:
            den = den * r.denominator // math.gcd(den, r.denominator)
    unit = den * step  # grid step in integer units
    R = np.array([[int(min(Fraction(1), r) * den) for r in row] for row in rho], dtype=np.int64)
    grid = np.array(list(itertools.product(range(levels + 1), repeat=N)), dtype=np.int64) * int(unit)
    # McShane projection: g'(a) = min_b g(b) + rho(a, b)
    proj = np.min(grid[:, None, :] + R[None, :, :], axis=2)
    best = None
    for imgs in images:
        sub = proj[:, imgs]
        osc = sub.max(axis=1) - sub.min(axis=1)
        best = osc if best is None else np.minimum(best, osc)
    return Fraction(int(best.max()), den)


# -- tuple pseudometric: path-metric feasibility ---------------------------------------

def joint_feasible(x: PointedStructure, y: PointedStructure, t: Fraction) -> bool:
    """Is there a joint pseudometric with d(x_i, y_i) <= t for every i?

    The shortest-path metric with bridges of length t is the largest
    candidate; it works iff it leaves both sides unchanged and respects the
    unary Lipschitz bounds.
    """
    X, Y = x.structure, y.structure
    nx, ny = len(X.points), len(Y.points)
    n = nx + ny
    INF = None
    D = [[INF] * n for _ in range(n)]
    for i in range(nx):
        for j in range(nx):
            D[i][j] = X.dist[i][j]
    for i in range(ny):
        for j in range(ny):
            D[nx + i][nx + j] = Y.dist[i][j]

    def bridge(i, j, v):
        cur = D[i][nx + j]
        if cur is None or v < cur:
            D[i][nx + j] = D[nx + j][i] = v

    for a, b in zip(x.generators, y.generators):
        bridge(X.index(a), Y.index(b), t)
    cx, cy = X.constant_map, Y.constant_map
    for c in X.signature.constants:
        bridge(X.index(cx[c]), Y.index(cy[c]), Fraction(0))
    for k in range(n):
        for i in range(n):
            if D[i][k] is None:
                continue
            for j in range(n):
                if D[k][j] is None:
                    continue
                v = D[i][k] + D[k][j]
                if D[i][j] is None or v < D[i][j]:
                    D[i][j] = v
    for i in range(nx):
        for j in range(nx):
            if D[i][j] != X.dist[i][j]:
                return False
    for i in range(ny):
        for j in range(ny):
            if D[nx + i][nx + j] != Y.dist[i][j]:
                return False
    cap = X.signature.diameter
    for i in range(nx):
        for j in range(ny):
            d = D[i][nx + j]
            if d is None:
                if cap is None:
                    continue
                d = cap
            if cap is not None and d > cap:
                d = cap
            for k, p in enumerate(X.signature.predicates):
                if abs(X.value_at(k, (i,)) - Y.value_at(k, (j,))) > p.lipschitz * d:
                    return False
    return True


def grid_dist(x: PointedStructure, y: PointedStructure, step=Fraction(1, 16), top=Fraction(8)):
    """Least grid value t with a feasible joint embedding."""
    t = Fraction(0)
    while t <= top:
        if joint_feasible(x, y, t):
            return t
        t += step
    return None


# -- misc ------------------------------------------------------------------------

def closure_by_brute_force(perms):
    """All products of the given permutations (as tuples), by repeated squaring-free BFS."""
    n = len(perms[0])
    group = {tuple(range(n))}
    changed = True
    while changed:
        changed = False
        for h in list(group):
            for g in perms:
                hg = tuple(h[g[x]] for x in range(n))
                if hg not in group:
                    group.add(hg)
                    changed = True
    return group


def naive_validate(s) -> list[str]:
    """Direct transcription of the axioms, one pair or triple at a time."""
    out = []
    pts, D, n = s.points, s.dist, len(s.points)
    fmt = lambda ids: "(" + ", ".join(pts[i] for i in ids) + ")"
    cap = s.signature.diameter
    for i in range(n):
        if D[i][i] != 0:
            out.append(f"nonzero self-distance at {pts[i]}")
    for i in range(n):
        for j in range(i + 1, n):
            if D[i][j] != D[j][i]:
                out.append(f"asymmetric distance between ({pts[i]}, {pts[j]})")
            if D[i][j] < 0 or D[j][i] < 0:
                out.append(f"negative distance between ({pts[i]}, {pts[j]})")
            elif D[i][j] == 0:
                out.append(f"indiscernible points ({pts[i]}, {pts[j]})")
            if cap is not None and D[i][j] > cap:
                out.append(f"distance exceeds diameter cap {cap} at ({pts[i]}, {pts[j]})")
    tri = set()
    # ordered pairs i < k with a distinct midpoint; asymmetry has its own diagnostic
    for i, j, k in itertools.product(range(n), repeat=3):
        if i < k and j not in (i, k) and D[i][k] > D[i][j] + D[j][k]:
            tri.add(f"triangle inequality violated at ({pts[i]}, {pts[j]}, {pts[k]})")
    for p, table in zip(s.signature.predicates, s.tables):
        tuples = list(itertools.product(range(n), repeat=p.arity))
        for t, v in zip(tuples, table):
            if not (p.lo <= v <= p.hi):
                out.append(f"value {v} of {p.name} at {fmt(t)} outside [{p.lo}, {p.hi}]")
        for a, b in itertools.combinations(range(len(tuples)), 2):
            gap = abs(table[a] - table[b])
            sup = max((D[x][y] for x, y in zip(tuples[a], tuples[b])), default=0)
            if gap != 0 and gap > p.lipschitz * sup:
                out.append(f"Lipschitz violated for {p.name} at {fmt(tuples[a])}, {fmt(tuples[b])}")
    return out, tri
