import numpy as np
import pytest

from seriagraph.combinatorics import all_partitions_count
from seriagraph.enumeration import EnumerationRequest, solve_single
from seriagraph.model import Evaluator, UnimodalityCriterion, canonicalize, matrix_from_rows
from seriagraph.multigroup import (MultigroupConstraints, Partition, ScaleRefused,
                                   enumerate_all_partitions, enumerate_partitions,
                                   solve_agglomerative, solve_exact, valid_orderings)
from seriagraph.planted import planted_order, planted_two_groups, shuffled

from oracles import bell_triangle, naive_feasible_partitions, naive_valid_orderings, stirling2_closed_form


def test_partition_examples():
    assert sum(1 for _ in enumerate_partitions(10, 3)) == 9330
    assert [p.rgs for p in enumerate_partitions(4, 2)] == [
        (0, 0, 0, 1), (0, 0, 1, 0), (0, 0, 1, 1), (0, 1, 0, 0),
        (0, 1, 0, 1), (0, 1, 1, 0), (0, 1, 1, 1)]
    assert [p.rgs for p in enumerate_partitions(5, 5)] == [(0, 1, 2, 3, 4)]
    with pytest.raises(ValueError):
        list(enumerate_partitions(3, 4))


def test_partition_counts_match_stirling():
    for n in range(1, 10):
        total = 0
        for m in range(1, n + 1):
            parts = [p.rgs for p in enumerate_partitions(n, m)]
            assert len(parts) == stirling2_closed_form(n, m)
            assert parts == sorted(parts) and len(set(parts)) == len(parts)
            assert all(Partition(p).group_count == m for p in parts)
            total += len(parts)
        assert total == bell_triangle(n)[n]


def test_all_partitions():
    assert sum(1 for _ in enumerate_all_partitions(3)) == 5
    assert [p.rgs for p in enumerate_all_partitions(1)] == [(0,)]
    rgs = [p.rgs for p in enumerate_all_partitions(6)]
    assert rgs == sorted(rgs) and len(rgs) == all_partitions_count(6)


def test_partition_type():
    p = Partition((0, 1, 0, 2))
    assert p.groups() == [(0, 2), (1,), (3,)]
    assert Partition.from_groups([(3,), (1,), (0, 2)], 4) == p
    with pytest.raises(ValueError):
        Partition((0, 2))
    with pytest.raises(ValueError):
        Partition((1, 0))


def _random_matrix(seed, n, k=3, hi=6):
    counts = np.random.default_rng(seed).integers(0, hi, size=(n, k))
    counts[:, 0] += 1
    return matrix_from_rows(counts.tolist())


@pytest.mark.parametrize("seed", range(6))
def test_valid_orderings_matches_naive(seed):
    m = _random_matrix(seed, 7)
    ev = Evaluator(m)
    members = sorted(np.random.default_rng(seed).choice(7, size=5, replace=False).tolist())
    got = valid_orderings(ev, members)
    assert got == sorted(naive_valid_orderings(m.counts.tolist(), members))
    first = valid_orderings(ev, members, first_only=True)
    assert first == got[:1]


@pytest.mark.parametrize("seed, n", [(0, 5), (1, 6), (2, 7), (3, 7), (4, 8)])
def test_exact_feasible_set_matches_naive(seed, n):
    m = _random_matrix(seed, n, hi=4)
    sols = solve_exact(m)
    got = {frozenset(frozenset(g.members) for g in s.groups) for s in sols}
    assert got == naive_feasible_partitions(m.counts.tolist())
    keys = [(s.group_count, s.singleton_count, s.partition.rgs) for s in sols]
    assert keys == sorted(keys)


def test_exact_solution_structure():
    m = _random_matrix(7, 7)
    sols = solve_exact(m)
    assert sols[-1].group_count <= 7
    assert any(s.group_count == 7 for s in sols)  # all singletons
    for s in sols:
        members = sorted(i for g in s.groups for i in g.members)
        assert members == list(range(7))
        for g in s.groups:
            assert g.report.valid
            assert g.ordering.perm == min(naive_valid_orderings(m.counts.tolist(), g.members))


def test_exact_single_group_when_everything_seriates():
    rng = np.random.default_rng(4)
    m, _ = shuffled(planted_order(7, 4, rng), rng)
    top = solve_exact(m)[0]
    assert top.group_count == 1


@pytest.mark.parametrize("seed", range(4))
def test_exact_recovers_two_planted_groups(seed):
    m, labels = planted_two_groups((5, 3), np.random.default_rng(seed))
    top = solve_exact(m)[0]
    planted = {frozenset(i for i, l in enumerate(labels) if l == g) for g in (0, 1)}
    assert {frozenset(g.members) for g in top.groups} == planted


def test_exact_constraints():
    m = _random_matrix(3, 6)
    sols = solve_exact(m, cons=MultigroupConstraints(min_group_size=2, max_groups=3))
    for s in sols:
        assert s.group_count <= 3
        assert all(len(g.members) >= 2 for g in s.groups)
    everything = solve_exact(m)
    expected = [s for s in everything
                if s.group_count <= 3 and all(len(g.members) >= 2 for g in s.groups)]
    assert [s.partition for s in sols] == [s.partition for s in expected]


def test_exact_all_orderings_and_limit():
    m = _random_matrix(11, 6)
    sols = solve_exact(m, all_orderings=True)
    for s in sols[:20]:
        for g in s.groups:
            assert [o.perm for o in g.alternatives] == sorted(
                naive_valid_orderings(m.counts.tolist(), g.members))
    top = solve_exact(m, limit=5)
    assert [s.partition for s in top] == [s.partition for s in sols[:5]]


def test_exact_scale_gate():
    m = _random_matrix(0, 13)
    with pytest.raises(ScaleRefused, match="2.8e\\+07"):
        solve_exact(m)


def test_exact_worker_invariance():
    m = _random_matrix(21, 8, hi=5)
    runs = [solve_exact(m, workers=w) for w in (1, 2, 8)]
    assert runs[0] == runs[1] == runs[2]


def test_group_reports_are_mirror_invariant():
    m = _random_matrix(5, 7)
    ev = Evaluator(m)
    for s in solve_exact(m)[:50]:
        for g in s.groups:
            assert ev.evaluate(g.ordering.perm[::-1]) == g.report


# -- heuristic ----------------------------------------------------------------

def _assert_sound(m, sol, criterion=UnimodalityCriterion()):
    members = sorted(i for g in sol.groups for i in g.members)
    assert members == list(range(m.n))
    ev = Evaluator(m, criterion)
    for g in sol.groups:
        assert sorted(g.ordering.perm) == list(g.members)
        assert ev.evaluate(g.ordering.perm).valid
        assert g.report.valid
    assert sol.partition == Partition.from_groups([g.members for g in sol.groups], m.n)


def test_heuristic_trivial_sizes():
    one = solve_agglomerative(matrix_from_rows([[1, 2]]))
    assert [g.members for g in one.groups] == [(0,)]
    two = solve_agglomerative(matrix_from_rows([[1, 2], [5, 1]]))
    assert [g.members for g in two.groups] == [(0, 1)]


def test_heuristic_recovers_single_planted_order():
    rng = np.random.default_rng(8)
    for _ in range(20):
        m, where = shuffled(planted_order(9, int(rng.integers(3, 7)), rng), rng)
        sol = solve_agglomerative(m)
        assert len(sol.groups) == 1
        valid = [o for o, _ in solve_single(EnumerationRequest(m)).solutions]
        assert sol.groups[0].ordering in valid
        if len(valid) == 1:
            assert sol.groups[0].ordering == canonicalize(where)


@pytest.mark.parametrize("seed", range(4))
def test_heuristic_recovers_two_planted_groups(seed):
    m, labels = planted_two_groups((6, 6), np.random.default_rng(seed))
    sol = solve_agglomerative(m)
    exact = solve_exact(m, limit=1)[0]
    planted = {frozenset(i for i, l in enumerate(labels) if l == g) for g in (0, 1)}
    assert {frozenset(g.members) for g in sol.groups} == planted
    assert {frozenset(g.members) for g in exact.groups} == planted


@pytest.mark.parametrize("seed", range(10))
def test_heuristic_soundness_random(seed):
    n = 4 + seed
    m = _random_matrix(seed, n, k=4, hi=10)
    sol = solve_agglomerative(m)
    _assert_sound(m, sol)
    assert len(sol.groups) <= n


def test_heuristic_soundness_bootstrap():
    crit = UnimodalityCriterion("bootstrap", seed=2)
    for seed in range(3):
        m = _random_matrix(seed, 9, k=3, hi=30)
        _assert_sound(m, solve_agglomerative(m, crit), crit)


def test_heuristic_is_deterministic():
    m = _random_matrix(99, 11, k=4, hi=8)
    assert solve_agglomerative(m) == solve_agglomerative(m)
