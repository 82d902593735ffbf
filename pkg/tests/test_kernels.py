import random
from fractions import Fraction

import numpy as np
import pytest

from fraisse import _pykernels, kernels

from helpers import random_metric

needs_compiled = pytest.mark.skipif(not kernels.compiled_available(), reason="extension not built")


@pytest.fixture
def restore_backend():
    yield
    kernels.use_backend(None)


def run_both(fn, *args):
    kernels.use_backend("python")
    a = fn(*args)
    kernels.use_backend("cython")
    b = fn(*args)
    return a, b


@needs_compiled
def test_triangle_parity(restore_backend):
    rng = random.Random(0)
    for _ in range(50):
        n = rng.randint(1, 7)
        D = [[Fraction(0) if i == j else Fraction(rng.randint(1, 9), rng.randint(1, 4))
              for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i):
                D[i][j] = D[j][i]
        a, b = run_both(kernels.triangle_violations, D)
        assert a == b


@needs_compiled
def test_search_parity(restore_backend):
    rng = random.Random(1)
    for _ in range(40):
        DA = random_metric(rng, rng.randint(1, 3), 2, top=1)
        DB = random_metric(rng, rng.randint(2, 6), 2, top=1)
        compat = [[True] * len(DB) for _ in DA]
        a, b = run_both(kernels.search_embeddings, DA, DB, compat, 10 ** 6, 0)
        assert [list(m) for m in a[0]] == [list(m) for m in b[0]]
        assert a[1] == b[1] and a[2] == b[2]


@needs_compiled
def test_delta_and_rho_parity(restore_backend):
    rng = random.Random(2)
    D = random_metric(rng, 5, 3)
    perms = [tuple(rng.sample(range(5), 5)) for _ in range(6)]
    a, b = run_both(kernels.delta_table, perms, D, list(range(5)))
    assert a == b
    probes = np.array(rng.choices(range(5), k=4 * 2 * 7), dtype=np.int64).reshape(4, 2, 7)
    anchors = np.array(rng.choices(range(5), k=3 * 2 * 7), dtype=np.int64).reshape(3, 2, 7)
    a, b = run_both(kernels.rho_min_to_anchors, D, probes, anchors, 7)
    assert a == b


def test_rho_min_definition():
    D = [[Fraction(0), Fraction(1, 2)], [Fraction(1, 2), Fraction(0)]]
    probes = np.array([[[0, 0, 1]]], dtype=np.int64)
    anchors = np.array([[[0, 1, 1]], [[1, 1, 1]]], dtype=np.int64)
    (v,) = kernels.rho_min_to_anchors(D, probes, anchors, 3)
    assert v == Fraction(1, 6)


def test_scale_and_overflow_fallback(restore_backend):
    ints, den = kernels.scale([[Fraction(1, 3), Fraction(1, 2)]])
    assert den == 6 and ints == [[2, 3]]
    big = Fraction(1, 2 ** 70)
    D = [[Fraction(0), big, big], [big, Fraction(0), 3 * big], [big, 3 * big, Fraction(0)]]
    assert kernels.triangle_violations(D) == _pykernels.triangle_violations(kernels.scale(D)[0])
    assert kernels.triangle_violations(D) == [(1, 0, 2)]


def test_lexicographic_order():
    D = [[Fraction(0)]]
    DB = [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]
    maps, nodes, aborted = kernels.search_embeddings(D, DB, [[True, True]], 100, 0)
    assert [list(m) for m in maps] == [[0], [1]] and not aborted
    maps, nodes, aborted = kernels.search_embeddings(D, DB, [[True, True]], 1, 0)
    assert aborted
