import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from fraisse.embeddings import Embedding, enumerate_embeddings, oscillation, push_forward, rho
from fraisse.ramsey import (
    Coloring,
    DistanceColoring,
    InconclusiveSearch,
    RamseyInstance,
    _Problem,
    best_beta,
    check_arp_instance,
    eps_approximates,
    is_coloring,
    random_coloring,
    worst_coloring,
)
from fraisse.structures import PointedStructure, metric_space

from helpers import random_ramsey_instance, seeds
from oracles import grid_worst_value

F = Fraction


def two_point_instance(eps=F(1, 2), C=None):
    A = PointedStructure.full(metric_space(["a"], [[0]]))
    B = metric_space(["x", "y"], [[0, 1], [1, 0]])
    C = C or B
    Fs = tuple(enumerate_embeddings(A, B))
    return RamseyInstance(A, B, Fs, eps, C)


def test_two_point_example_is_one():
    rep = worst_coloring(two_point_instance())
    assert rep.worst_value == 1 and rep.status == "exact" and not rep.holds
    assert is_coloring(rep.worst_coloring)
    assert sorted(rep.worst_coloring.values) == [0, 1]
    assert check_arp_instance(two_point_instance()) is False


def test_singleton_F_is_zero():
    inst = two_point_instance()
    inst = RamseyInstance(inst.A, inst.B, inst.F[:1], F(1, 10), inst.C)
    rep = worst_coloring(inst)
    assert rep.worst_value == 0 and rep.holds
    assert check_arp_instance(inst) is True


def test_close_copy_gives_small_value():
    # C contains a copy of B at distance 1/4, so F(beta) has rho-diameter 1/4 there
    A = PointedStructure.full(metric_space(["a"], [[0]]))
    B = metric_space(["x", "y"], [[0, F(1, 4)], [F(1, 4), 0]])
    C = metric_space(["p", "q", "r"], {("p", "q"): F(1, 4), ("q", "r"): 1, ("p", "r"): 1})
    inst = RamseyInstance(A, B, tuple(enumerate_embeddings(A, B)), F(1, 4), C)
    rep = worst_coloring(inst)
    assert rep.worst_value == F(1, 4) and rep.holds


def test_no_embedding_of_B():
    A = PointedStructure.full(metric_space(["a"], [[0]]))
    B = metric_space(["x", "y"], [[0, 2], [2, 0]])
    C = metric_space(["p", "q"], [[0, 1], [1, 0]])
    inst = RamseyInstance(A, B, tuple(enumerate_embeddings(A, B)), F(1, 2), C)
    rep = worst_coloring(inst)
    assert rep.status == "no-embedding" and not rep.holds


def test_budget_overrun_is_inconclusive():
    rng = random.Random(11)
    for _ in range(40):
        inst = random_ramsey_instance(rng)
        exact = worst_coloring(inst)
        if exact.nodes_explored > 2:
            break
    rep = worst_coloring(inst, node_budget_=1)
    assert rep.status == "inconclusive"
    assert rep.worst_value <= exact.worst_value <= rep.upper_bound
    assert not rep.holds


def test_check_arp_inconclusive_raises(monkeypatch):
    rng = random.Random(11)
    for _ in range(40):
        inst = random_ramsey_instance(rng)
        exact = worst_coloring(inst)
        if exact.nodes_explored > 2 and exact.worst_value > 0:
            break
    tight = RamseyInstance(inst.A, inst.B, inst.F, exact.worst_value, inst.C)
    rep = worst_coloring(tight, node_budget_=1)
    if rep.worst_value <= tight.epsilon < rep.upper_bound:
        with pytest.raises(InconclusiveSearch):
            check_arp_instance(tight, node_budget_=1)


def test_report_digest_deterministic():
    a, b = worst_coloring(two_point_instance()), worst_coloring(two_point_instance())
    assert a.to_text() == b.to_text() and a.to_csv() == b.to_csv()
    assert len(a.digest) == 16
    assert "worst_value 1" in a.to_text()


def test_instance_validation():
    inst = two_point_instance()
    with pytest.raises(ValueError):
        RamseyInstance(inst.A, inst.B, (), F(1, 2), inst.C)
    with pytest.raises(ValueError):
        RamseyInstance(inst.A, inst.B, inst.F + inst.F[:1], F(1, 2), inst.C)
    with pytest.raises(ValueError):
        RamseyInstance(inst.A, inst.B, inst.F, F(0), inst.C)


def test_coloring_domain_and_lipschitz():
    inst = two_point_instance()
    dom = enumerate_embeddings(inst.A, inst.C)
    with pytest.raises(ValueError):
        Coloring(dom, (F(0), F(2)))
    g = Coloring(dom, (F(0), F(1)))
    other = Embedding(inst.A, metric_space(["z"], [[0]]), ("z",))
    with pytest.raises(KeyError):
        g(other)
    assert Coloring.constant(dom, F(1, 2))(dom[0]) == F(1, 2)


def test_random_coloring_whole_domain_is_zero():
    inst = two_point_instance()
    dom = enumerate_embeddings(inst.A, inst.C)
    for seed in range(30):
        g = random_coloring(dom, seed)
        assert is_coloring(g)
        if all(v == 0 for v in g.values):
            break
    else:
        pytest.fail("no seed selected the whole domain")


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_random_coloring_is_lipschitz(seed):
    inst = random_ramsey_instance(random.Random(seed))
    dom = enumerate_embeddings(inst.A, inst.C)
    assert is_coloring(random_coloring(dom, seed))


def scan_best(gamma, inst):
    betas = enumerate_embeddings(PointedStructure.full(inst.B), inst.C)
    return min(oscillation(gamma, push_forward(inst.F, b)) for b in betas)


def test_best_beta_examples():
    inst = two_point_instance()
    dom = enumerate_embeddings(inst.A, inst.C)
    beta, osc = best_beta(Coloring.constant(dom), inst)
    assert osc == 0 and beta.images == ("x", "y")
    gamma = DistanceColoring([dom[0]])
    beta, osc = best_beta(gamma, inst)
    assert osc == scan_best(gamma, inst) == 1


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_best_beta_matches_scan(seed):
    rng = random.Random(seed)
    inst = random_ramsey_instance(rng)
    dom = enumerate_embeddings(inst.A, inst.C)
    gamma = DistanceColoring([rng.choice(list(dom))])
    beta, osc = best_beta(gamma, inst)
    assert osc == scan_best(gamma, inst)
    assert oscillation(gamma, push_forward(inst.F, beta)) == osc


def test_eps_approximates_examples():
    Bp = metric_space(["p", "q"], [[0, F(1, 2)], [F(1, 2), 0]])
    A = PointedStructure.full(metric_space(["a"], [[0]]))
    e, f = enumerate_embeddings(A, Bp)
    assert eps_approximates(Bp, [e], A, [e], 0)
    assert not eps_approximates(Bp, [e], A, [f], F(1, 4))
    assert eps_approximates(Bp, [e], A, [f], F(1, 2))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_worst_value_within_oracle_step(seed):
    inst = random_ramsey_instance(random.Random(seed))
    rep = worst_coloring(inst)
    prob = _Problem(inst, None)
    step = inst.epsilon / 4
    g = grid_worst_value(prob.rho, prob.images, step)
    assert g <= rep.worst_value <= g + step
    assert is_coloring(rep.worst_coloring)
    # the reported coloring achieves the reported value
    assert scan_best(rep.worst_coloring, inst) == rep.worst_value


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_large_eps_always_holds(seed):
    inst = random_ramsey_instance(random.Random(seed))
    dom = enumerate_embeddings(inst.A, inst.C)
    diam = max(min(F(1), rho(a, b)) for a in dom for b in dom)
    if diam == 0:
        return
    wide = RamseyInstance(inst.A, inst.B, inst.F, diam, inst.C)
    assert check_arp_instance(wide)
