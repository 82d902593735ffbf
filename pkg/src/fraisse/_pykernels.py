"""Pure-Python kernels. Same contracts as the compiled ``_ckernels`` module.

All inputs are integer-scaled (a common denominator has been factored out by
the caller) and given as nested lists of ``int``.
"""


def triangle_violations(D):
    """Triples (i, j, k), i < k, j distinct, with D[i][k] > D[i][j] + D[j][k]."""
    n = len(D)
    out = []
    for i in range(n):
        Di = D[i]
        for k in range(i + 1, n):
            dik = Di[k]
            for j in range(n):
                if j != i and j != k and dik > Di[j] + D[j][k]:
                    out.append((i, j, k))
    return out


def search_embeddings(DA, DB, compat, max_nodes, limit):
    """Backtracking enumeration of distance-preserving injections.

    Source point i may go to target t only if compat[i][t]. Results come in
    lexicographic order of target indices. Returns (maps, nodes, aborted);
    ``aborted`` is set when more than ``max_nodes`` candidates were tried.
    ``limit`` > 0 stops after that many maps.
    """
    m = len(DA)
    N = len(DB)
    out = []
    if m == 0:
        return [()], 0, False
    assign = [0] * m
    used = [False] * N
    nxt = [0] * m
    nodes = 0
    i = 0
    nxt[0] = 0
    while i >= 0:
        placed = False
        t = nxt[i]
        ci = compat[i]
        DAi = DA[i]
        while t < N:
            if not used[t] and ci[t]:
                nodes += 1
                if nodes > max_nodes:
                    return out, nodes, True
                DBt = DB[t]
                ok = True
                for j in range(i):
                    if DAi[j] != DBt[assign[j]]:
                        ok = False
                        break
                if ok:
                    assign[i] = t
                    used[t] = True
                    nxt[i] = t + 1
                    placed = True
                    break
            t += 1
        if not placed:
            i -= 1
            if i >= 0:
                used[assign[i]] = False
            continue
        if i == m - 1:
            out.append(tuple(assign))
            if limit and len(out) >= limit:
                return out, nodes, False
            used[assign[i]] = False
        else:
            i += 1
            nxt[i] = 0
    return out, nodes, False


def delta_table(perms, D, orbit):
    """T[a][b] = max over x in orbit of D[perms[a][x]][perms[b][x]]."""
    H = len(perms)
    T = [[0] * H for _ in range(H)]
    for a in range(H):
        pa = perms[a]
        for b in range(a + 1, H):
            pb = perms[b]
            best = 0
            for x in orbit:
                v = D[pa[x]][pb[x]]
                if v > best:
                    best = v
            T[a][b] = best
            T[b][a] = best
    return T


def rho_min_to_anchors(D, probes, anchors):
    """For each probe, min over anchors of max_j sum_i D[probe[j][i]][anchor[j][i]].

    probes: P x q x n, anchors: S x q x n (q tuple positions, n coordinates).
    """
    out = []
    for pr in probes:
        best = None
        for an in anchors:
            worst = 0
            for pj, aj in zip(pr, an):
                s = 0
                for x, y in zip(pj, aj):
                    s += D[x][y]
                if s > worst:
                    worst = s
                if best is not None and worst >= best:
                    break
            if best is None or worst < best:
                best = worst
        out.append(best)
    return out
