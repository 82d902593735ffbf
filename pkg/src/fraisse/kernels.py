"""Kernel dispatch: compiled ``_ckernels`` when available, pure Python otherwise.

Callers pass exact rationals; this module factors out a common denominator
and hands integer data to the selected backend. Data whose scaled magnitude
could overflow int64 is routed to the Python backend, which uses unbounded
integers. Set ``FRAISSE_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import math
import os
from fractions import Fraction

import numpy as np

from . import _pykernels

try:
    if os.environ.get("FRAISSE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python kernels forced by FRAISSE_PURE_PYTHON")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"
_INT64_SAFE = 2 ** 62


def use_backend(name: str | None) -> None:
    """Switch backends at runtime (``"cython"`` / ``"python"``); for tests and benchmarks."""
    global BACKEND
    if name == "cython" and _ckernels is None:
        raise RuntimeError("compiled kernels are not built")
    BACKEND = name or ("cython" if _ckernels is not None else "python")


def compiled_available() -> bool:
    return _ckernels is not None


def scale(values) -> tuple[list, int]:
    """Scale a nested list of Fractions by the lcm of their denominators."""
    flat = _flatten(values)
    den = 1
    for d in {_rat(v).denominator for v in flat}:
        den = math.lcm(den, d)
    factors: dict[int, int] = {}
    return _scale_nested(values, den, factors), den


def _rat(v):
    # ints and Fractions already carry numerator/denominator
    return v if isinstance(v, (int, Fraction)) else Fraction(v)


def _flatten(values):
    out = []
    stack = [values]
    while stack:
        v = stack.pop()
        if isinstance(v, (list, tuple)):
            stack.extend(v)
        else:
            out.append(v)
    return out


def _scale_nested(values, den, factors):
    if isinstance(values, (list, tuple)):
        return [_scale_nested(v, den, factors) for v in values]
    f = _rat(values)
    q = f.denominator
    k = factors.get(q)
    if k is None:
        k = factors[q] = den // q
    return f.numerator * k


def _fits(ints, factor: int = 2) -> bool:
    flat = _flatten(ints)
    top = max((abs(v) for v in flat), default=0)
    return top * max(factor, 1) < _INT64_SAFE


def _compiled(ints, factor: int = 2) -> bool:
    return BACKEND == "cython" and _fits(ints, factor)


def triangle_violations(D) -> list[tuple[int, int, int]]:
    ints, _ = scale(D)
    if _compiled(ints):
        return _ckernels.triangle_violations(np.asarray(ints, dtype=np.int64).reshape(len(ints), len(ints)))
    return _pykernels.triangle_violations(ints)


def search_embeddings(DA, DB, compat, max_nodes: int, limit: int = 0):
    """Distance-preserving injections of A into B (see ``_pykernels``).

    DA and DB are rational matrices; they are scaled by one shared denominator.
    """
    ints, _ = scale([list(map(list, DA)), list(map(list, DB))])
    ia, ib = ints
    if _compiled(ints):
        m, N = len(ia), len(ib)
        a = np.asarray(ia, dtype=np.int64).reshape(m, m)
        b = np.asarray(ib, dtype=np.int64).reshape(N, N)
        c = np.asarray(compat, dtype=np.uint8).reshape(m, N)
        return _ckernels.search_embeddings(a, b, c, int(max_nodes), int(limit))
    return _pykernels.search_embeddings(ia, ib, [list(map(bool, row)) for row in compat],
                                        max_nodes, limit)


def delta_table(perms, D, orbit) -> list[list[Fraction]]:
    ints, den = scale(D)
    if _compiled(ints):
        H = len(perms)
        p = np.asarray(perms, dtype=np.int64).reshape(H, len(D))
        T = _ckernels.delta_table(p, np.asarray(ints, dtype=np.int64).reshape(len(D), len(D)),
                                  np.asarray(orbit, dtype=np.int64))
        T = T.tolist()
    else:
        T = _pykernels.delta_table([list(p) for p in perms], ints, list(orbit))
    return [[Fraction(v, den) for v in row] for row in T]


def rho_min_to_anchors(D, probes, anchors, n_coords: int) -> list[Fraction]:
    """min over anchors of the sup over tuple positions of the normalized l1 distance.

    ``D`` is the base distance matrix (rational); probes and anchors are index
    arrays of shape (P, q, n) and (S, q, n).
    """
    ints, den = scale(D)
    if _compiled(ints, factor=2 * max(n_coords, 1)):
        k = len(ints)
        sums = _ckernels.rho_min_to_anchors(
            np.asarray(ints, dtype=np.int64).reshape(k, k),
            np.ascontiguousarray(probes, dtype=np.int64),
            np.ascontiguousarray(anchors, dtype=np.int64),
        ).tolist()
    else:
        sums = _pykernels.rho_min_to_anchors(ints, _as_lists(probes), _as_lists(anchors))
    return [Fraction(s, den * n_coords) for s in sums]


def _as_lists(arr):
    if isinstance(arr, np.ndarray):
        return arr.tolist()
    return [[list(r) for r in block] for block in arr]
