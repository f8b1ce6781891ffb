"""Seriation with several solution groups.

Two solvers: an exact one that checks every set partition (feasible
only for a dozen or so assemblages) and a greedy agglomerative one that
grows groups from valid three-assemblage seeds by single insertions.
"""
from __future__ import annotations

import heapq
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

from .combinatorics import all_partitions_count, estimate_time, format_count
from .model import (STRICT, AssemblageMatrix, EvaluationReport, Evaluator, Ordering,
                    UnimodalityCriterion, canonicalize)

EXACT_LIMIT = 12


class ScaleRefused(RuntimeError):
    """Raised when exact partition search is too large to run without an override."""


@dataclass(frozen=True)
class Partition:
    rgs: tuple[int, ...]

    def __post_init__(self):
        rgs = tuple(int(x) for x in self.rgs)
        top = -1
        for x in rgs:
            if not 0 <= x <= top + 1:
                raise ValueError(f"not a restricted-growth string: {rgs}")
            top = max(top, x)
        object.__setattr__(self, "rgs", rgs)

    @property
    def group_count(self) -> int:
        return max(self.rgs) + 1 if self.rgs else 0

    def groups(self) -> list[tuple[int, ...]]:
        out: list[list[int]] = [[] for _ in range(self.group_count)]
        for i, g in enumerate(self.rgs):
            out[g].append(i)
        return [tuple(g) for g in out]

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]], n: int) -> "Partition":
        labels = [-1] * n
        for g in sorted((sorted(g) for g in groups), key=lambda g: g[0]):
            label = max(labels) + 1
            for i in g:
                labels[i] = label
        return cls(tuple(labels))


@dataclass(frozen=True)
class Group:
    members: tuple[int, ...]
    ordering: Ordering
    report: EvaluationReport
    alternatives: tuple[Ordering, ...] = ()


@dataclass(frozen=True)
class GroupedSolution:
    groups: tuple[Group, ...]
    partition: Partition

    @property
    def group_count(self) -> int:
        return len(self.groups)

    @property
    def singleton_count(self) -> int:
        return sum(1 for g in self.groups if len(g.members) == 1)


@dataclass(frozen=True)
class MultigroupConstraints:
    min_group_size: int = 1
    max_groups: int | None = None
    mode: str = "exact"

    def __post_init__(self):
        if self.min_group_size < 1:
            raise ValueError("min_group_size must be at least 1")
        if self.max_groups is not None and self.max_groups < 1:
            raise ValueError("max_groups must be positive")
        if self.mode not in ("exact", "agglomerative"):
            raise ValueError(f"unknown multigroup mode {self.mode!r}")


def enumerate_partitions(n: int, m: int) -> Iterator[Partition]:
    """Partitions of ``n`` items into exactly ``m`` groups, in lexicographic RGS order."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if m > n:
        raise ValueError(f"cannot split {n} items into {m} non-empty groups")
    rgs = [0] * n

    def fill(i: int, top: int) -> Iterator[Partition]:
        if i == n:
            if top == m - 1:
                yield Partition(tuple(rgs))
            return
        # labels still to introduce must fit in the remaining slots
        for v in range(0, min(top + 1, m - 1) + 1):
            new_top = max(top, v)
            if (m - 1 - new_top) > (n - i - 1):
                continue
            rgs[i] = v
            yield from fill(i + 1, new_top)

    yield from fill(1, 0)


def enumerate_all_partitions(n: int) -> Iterator[Partition]:
    """Every set partition of ``n`` items, in lexicographic RGS order."""
    if n < 1:
        raise ValueError("n must be positive")
    rgs = [0] * n

    def fill(i: int, top: int) -> Iterator[Partition]:
        if i == n:
            yield Partition(tuple(rgs))
            return
        for v in range(top + 2):
            rgs[i] = v
            yield from fill(i + 1, max(top, v))

    yield from fill(1, 0)


# -- per-group search ---------------------------------------------------------

def valid_orderings(evaluator: Evaluator, members: Sequence[int],
                    first_only: bool = False) -> list[tuple[int, ...]]:
    """Valid canonical orderings of ``members`` in lexicographic order.

    Depth-first over prefixes: once a class column has gone down and
    then up again no extension can repair it, so such prefixes are cut.
    Yields the same set as filtering every canonical permutation.
    """
    members = sorted(members)
    if len(members) <= 1:
        return [tuple(members)]
    top = members[-1]
    found: list[tuple[int, ...]] = []
    prefix: list[int] = []
    used = set()
    k = evaluator.k

    def extend(state) -> bool:
        if len(prefix) == len(members):
            if prefix[0] < prefix[-1]:
                found.append(tuple(prefix))
                return first_only
            return False
        for x in members:
            if x in used:
                continue
            if not prefix:
                if x == top:
                    continue
                nxt = (False,) * k
            else:
                nxt = evaluator.step(prefix[-1], x, state)
                if nxt is None:
                    continue
            prefix.append(x)
            used.add(x)
            done = extend(nxt)
            prefix.pop()
            used.discard(x)
            if done:
                return True
        return False

    extend(None)
    return found


def _subset_orderings(args):
    evaluator, subsets, want_all = args
    return [valid_orderings(evaluator, s, first_only=not want_all) for s in subsets]


def _feasible_subsets(evaluator: Evaluator, n: int, min_size: int, want_all: bool,
                      workers: int) -> dict[int, list[tuple[int, ...]]]:
    """Bitmask -> valid orderings for every subset that has at least one."""
    masks = [mask for mask in range(1, 1 << n) if bin(mask).count("1") >= min_size]
    subsets = [tuple(i for i in range(n) if mask >> i & 1) for mask in masks]
    if workers > 1 and len(subsets) > 1:
        chunks = [subsets[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_subset_orderings, [(evaluator, c, want_all) for c in chunks]))
        results = [None] * len(subsets)
        for w, part in enumerate(parts):
            results[w::workers] = part
    else:
        results = _subset_orderings((evaluator, subsets, want_all))
    return {mask: orders for mask, orders in zip(masks, results) if orders}


def _partitions_from(feasible: dict[int, list], n: int, max_groups: int | None
                     ) -> Iterator[list[int]]:
    """Partitions (as lists of bitmasks) whose every block is feasible.

    Each step places the lowest unassigned item together with a feasible
    subset of the remaining items.
    """
    by_low: dict[int, list[int]] = {}
    for mask in sorted(feasible):
        low = (mask & -mask).bit_length() - 1
        by_low.setdefault(low, []).append(mask)
    full = (1 << n) - 1
    blocks: list[int] = []

    def place(used: int) -> Iterator[list[int]]:
        if used == full:
            yield list(blocks)
            return
        if max_groups is not None and len(blocks) >= max_groups:
            return
        free = ~used & full
        low = (free & -free).bit_length() - 1
        for mask in by_low.get(low, ()):
            if mask & used:
                continue
            blocks.append(mask)
            yield from place(used | mask)
            blocks.pop()

    yield from place(0)


def _make_group(evaluator: Evaluator, orders: list[tuple[int, ...]], want_all: bool) -> Group:
    first = orders[0]
    return Group(
        members=tuple(sorted(first)),
        ordering=Ordering(first),
        report=evaluator.evaluate(first),
        alternatives=tuple(Ordering(o) for o in orders) if want_all else (),
    )


def solve_exact(matrix: AssemblageMatrix, criterion: UnimodalityCriterion = STRICT,
                cons: MultigroupConstraints | None = None, *, override: bool = False,
                workers: int = 1, all_orderings: bool = False,
                limit: int | None = None) -> list[GroupedSolution]:
    """All feasible partitions, best first: fewest groups, fewest singletons, then RGS."""
    cons = cons or MultigroupConstraints()
    n = matrix.n
    if n > EXACT_LIMIT and not override:
        bell = all_partitions_count(n)
        est = estimate_time(bell)
        raise ScaleRefused(
            f"refusing exact partition search over {n} assemblages: {format_count(bell)} "
            f"partitions, ~{format_count(est.seconds)} s (~{format_count(est.years)} years) "
            f"at 64 cores and 5 ms per test (model-based estimate)")
    evaluator = Evaluator(matrix, criterion)
    feasible = _feasible_subsets(evaluator, n, cons.min_group_size, all_orderings, workers)

    def key(blocks: list[int]):
        part = _rgs_from_masks(blocks, n)
        singles = sum(1 for b in blocks if b & (b - 1) == 0)
        return (len(blocks), singles, part)

    stream = (key(blocks) + (blocks,) for blocks in _partitions_from(feasible, n, cons.max_groups))
    if limit is not None:
        ranked = heapq.nsmallest(limit, stream, key=lambda t: t[:3])
    else:
        ranked = sorted(stream, key=lambda t: t[:3])

    groups_cache: dict[int, Group] = {}
    out = []
    for _, _, rgs, blocks in ranked:
        groups = []
        for b in sorted(blocks, key=lambda b: b & -b):
            if b not in groups_cache:
                groups_cache[b] = _make_group(evaluator, feasible[b], all_orderings)
            groups.append(groups_cache[b])
        out.append(GroupedSolution(tuple(groups), Partition(rgs)))
    return out


def _rgs_from_masks(blocks: list[int], n: int) -> tuple[int, ...]:
    labels = [0] * n
    for label, b in enumerate(sorted(blocks, key=lambda b: b & -b)):
        for i in range(n):
            if b >> i & 1:
                labels[i] = label
    return tuple(labels)


# -- agglomerative heuristic -------------------------------------------------

def _insertions(order: tuple[int, ...], x: int) -> Iterator[tuple[int, tuple[int, ...]]]:
    for pos in range(len(order) + 1):
        yield pos, order[:pos] + (x,) + order[pos:]


def _seeds(evaluator: Evaluator, pool: list[int]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    seeds = []
    for triple in itertools.combinations(pool, 3):
        for perm in itertools.permutations(triple):
            if perm[0] < perm[-1] and evaluator.is_valid(perm):
                seeds.append((triple, perm))
    return seeds


def _extension_count(evaluator: Evaluator, order: tuple[int, ...], pool: list[int]) -> int:
    members = set(order)
    return sum(1 for x in pool if x not in members
               for _, cand in _insertions(order, x) if evaluator.is_valid(cand))


def _grow(evaluator: Evaluator, order: tuple[int, ...], pool: list[int]) -> tuple[int, ...]:
    """Insert one assemblage at a time while the ordering stays valid.

    When no single insertion fits, the group is re-seriated from scratch
    with each outside assemblage in turn (lowest index first); the first
    enlarged group with any valid ordering continues the growth. This
    only fires when plain insertion has stalled, so earlier placements
    that happened to block a compatible assemblage get undone.
    """
    members = set(order)
    while True:
        best = None
        for x in pool:
            if x in members:
                continue
            for pos, cand in _insertions(order, x):
                if not evaluator.is_valid(cand):
                    continue
                key = (evaluator.evaluate(cand).score, x, pos)
                if best is None or key < best[0]:
                    best = (key, cand)
        if best is not None:
            order = canonicalize(best[1]).perm
            members.add(best[0][1])
            continue
        for x in pool:
            if x in members:
                continue
            found = valid_orderings(evaluator, sorted(members | {x}), first_only=True)
            if found:
                order = found[0]
                members.add(x)
                break
        else:
            return order


def solve_agglomerative(matrix: AssemblageMatrix, criterion: UnimodalityCriterion = STRICT,
                        cons: MultigroupConstraints | None = None) -> GroupedSolution:
    """Greedy grouping: seed with the most extensible valid triple, grow by insertion, repeat."""
    cons = cons or MultigroupConstraints(mode="agglomerative")
    evaluator = Evaluator(matrix, criterion)
    remaining = list(range(matrix.n))
    orders: list[tuple[int, ...]] = []
    while len(remaining) >= 3:
        seeds = _seeds(evaluator, remaining)
        if not seeds:
            break
        # most extensible seed first, then smallest triple, then smallest ordering
        _, _, seed = min((-_extension_count(evaluator, perm, remaining), triple, perm)
                         for triple, perm in seeds)
        order = _grow(evaluator, seed, remaining)
        orders.append(order)
        taken = set(order)
        remaining = [i for i in remaining if i not in taken]
    if len(remaining) == 2 and evaluator.is_valid(tuple(remaining)):
        orders.append(tuple(remaining))
    else:
        orders.extend((i,) for i in remaining)

    groups = []
    for order in sorted(orders, key=min):
        perm = canonicalize(order).perm
        groups.append(Group(tuple(sorted(perm)), Ordering(perm), evaluator.evaluate(perm)))
    partition = Partition.from_groups([g.members for g in groups], matrix.n)
    return GroupedSolution(tuple(groups), partition)
