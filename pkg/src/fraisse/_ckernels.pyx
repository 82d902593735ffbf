# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels over int64-scaled data. Mirrors fraisse._pykernels."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

ctypedef cnp.int64_t i64


def triangle_violations(const i64[:, ::1] D):
    cdef Py_ssize_t n = D.shape[0]
    cdef Py_ssize_t i, j, k
    cdef i64 dik
    out = []
    for i in range(n):
        for k in range(i + 1, n):
            dik = D[i, k]
            for j in range(n):
                if j != i and j != k and dik > D[i, j] + D[j, k]:
                    out.append((i, j, k))
    return out


def search_embeddings(const i64[:, ::1] DA, const i64[:, ::1] DB,
                      const cnp.uint8_t[:, ::1] compat, long long max_nodes, long long limit):
    cdef Py_ssize_t m = DA.shape[0]
    cdef Py_ssize_t N = DB.shape[0]
    cdef Py_ssize_t i, j, t
    cdef long long nodes = 0
    cdef bint placed, ok
    out = []
    if m == 0:
        return [()], 0, False
    cdef Py_ssize_t *assign = <Py_ssize_t *> malloc(m * sizeof(Py_ssize_t))
    cdef Py_ssize_t *nxt = <Py_ssize_t *> malloc(m * sizeof(Py_ssize_t))
    cdef char *used = <char *> malloc(N + 1)
    try:
        for t in range(N):
            used[t] = 0
        i = 0
        nxt[0] = 0
        while i >= 0:
            placed = False
            t = nxt[i]
            while t < N:
                if not used[t] and compat[i, t]:
                    nodes += 1
                    if nodes > max_nodes:
                        return out, nodes, True
                    ok = True
                    for j in range(i):
                        if DA[i, j] != DB[t, assign[j]]:
                            ok = False
                            break
                    if ok:
                        assign[i] = t
                        used[t] = 1
                        nxt[i] = t + 1
                        placed = True
                        break
                t += 1
            if not placed:
                i -= 1
                if i >= 0:
                    used[assign[i]] = 0
                continue
            if i == m - 1:
                out.append(tuple([assign[j] for j in range(m)]))
                if limit and len(out) >= limit:
                    return out, nodes, False
                used[assign[i]] = 0
            else:
                i += 1
                nxt[i] = 0
        return out, nodes, False
    finally:
        free(assign)
        free(nxt)
        free(used)


def delta_table(const i64[:, ::1] perms, const i64[:, ::1] D, const i64[::1] orbit):
    cdef Py_ssize_t H = perms.shape[0]
    cdef Py_ssize_t K = orbit.shape[0]
    cdef Py_ssize_t a, b, r, x
    cdef i64 best, v
    T = np.zeros((H, H), dtype=np.int64)
    cdef i64[:, ::1] Tv = T
    for a in range(H):
        for b in range(a + 1, H):
            best = 0
            for r in range(K):
                x = orbit[r]
                v = D[perms[a, x], perms[b, x]]
                if v > best:
                    best = v
            Tv[a, b] = best
            Tv[b, a] = best
    return T


def rho_min_to_anchors(const i64[:, ::1] D, const i64[:, :, ::1] probes,
                       const i64[:, :, ::1] anchors):
    cdef Py_ssize_t P = probes.shape[0]
    cdef Py_ssize_t S = anchors.shape[0]
    cdef Py_ssize_t q = probes.shape[1]
    cdef Py_ssize_t n = probes.shape[2]
    cdef Py_ssize_t p, s, j, i
    cdef i64 best, worst, acc
    cdef bint have
    out = np.empty(P, dtype=np.int64)
    cdef i64[::1] ov = out
    for p in range(P):
        have = False
        best = 0
        for s in range(S):
            worst = 0
            for j in range(q):
                acc = 0
                for i in range(n):
                    acc += D[probes[p, j, i], anchors[s, j, i]]
                if acc > worst:
                    worst = acc
                if have and worst >= best:
                    break
            if not have or worst < best:
                best = worst
                have = True
        ov[p] = best
    return out
