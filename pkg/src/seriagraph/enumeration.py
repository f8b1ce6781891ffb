"""Exhaustive single-group seriation over canonical permutations.

The search space is cut into blocks that share their first two
positions. Blocks are dealt round-robin to worker processes, each
worker evaluates its blocks as numpy batches, and the merge sorts by
(score, permutation), so output does not depend on the worker count.
"""
from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .combinatorics import (ComputeBudget, TimeEstimate, estimate_time, format_count,
                            unique_seriation_count)
from .model import (STRICT, AssemblageMatrix, EvaluationReport, Evaluator, Ordering,
                    UnimodalityCriterion)

PRACTICAL_LIMIT = 13
_TAIL = 8  # positions permuted from a precomputed index table
_CHUNK = 200_000


class FeasibilityRefused(RuntimeError):
    """Raised when an exhaustive search is too large to run without an override."""


@dataclass(frozen=True)
class EnumerationRequest:
    matrix: AssemblageMatrix
    criterion: UnimodalityCriterion = STRICT
    mode: str = "all_valid"
    worker_count: int = 1
    feasibility_override: bool = False

    def __post_init__(self):
        if self.mode not in ("all_valid", "best_scoring"):
            raise ValueError(f"unknown enumeration mode {self.mode!r}")
        if self.worker_count < 1:
            raise ValueError("worker_count must be at least 1")


@dataclass
class EnumerationResult:
    solutions: list[tuple[Ordering, EvaluationReport]]
    tested_count: int
    elapsed_seconds: float = 0.0


@dataclass(frozen=True)
class FeasibilityReport:
    n: int
    count: int
    estimate: TimeEstimate
    tier: str
    advisory: str

    def describe(self) -> str:
        return (f"n={self.n}: {format_count(self.count)} unique orderings, "
                f"~{format_count(self.estimate.seconds)} s "
                f"(~{format_count(self.estimate.years)} years) "
                f"[{self.tier}; model-based estimate] {self.advisory}")


def feasibility_report(n: int, budget: ComputeBudget | None = None) -> FeasibilityReport:
    budget = budget or ComputeBudget()
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    count = unique_seriation_count(n)
    est = estimate_time(count, budget)
    if n <= 10:
        tier, advice = "comfortable", "exhaustive testing of every ordering is quick"
    elif n <= PRACTICAL_LIMIT:
        tier, advice = "limit", "exhaustive testing is feasible but expensive"
    else:
        tier, advice = "infeasible", "combinatorial explosion; use enumeration only on sub-problems"
    advice += f" (assumes {budget.cores} cores at {budget.seconds_per_test} s per test)"
    return FeasibilityReport(n, count, est, tier, advice)


def canonical_permutations(n: int) -> Iterator[Ordering]:
    """Every permutation with first < last (or the single one for n = 1), lexicographically."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if n == 1:
        yield Ordering((0,))
        return
    for perm in itertools.permutations(range(n)):
        if perm[0] < perm[-1]:
            yield Ordering(perm)


def _blocks(n: int) -> list[tuple[int, int]]:
    blocks = []
    for a, b in itertools.permutations(range(n), 2):
        if n == 2 and b < a:
            continue
        if n > 2 and a == n - 1:
            continue  # nothing larger is left to close the ordering
        blocks.append((a, b))
    return blocks


def _block_perms(n: int, prefix: tuple[int, int]) -> Iterator[np.ndarray]:
    """Canonical permutations that start with ``prefix``, in lexicographic chunks."""
    rest = [i for i in range(n) if i not in prefix]
    if not rest:
        yield np.asarray([prefix], dtype=np.int64)
        return
    tail_len = min(len(rest), _TAIL)
    head_len = len(rest) - tail_len
    tail_idx = np.asarray(list(itertools.permutations(range(tail_len))), dtype=np.int64)
    for head in itertools.permutations(rest, head_len):
        pool = np.asarray([i for i in rest if i not in head], dtype=np.int64)
        tails = pool[tail_idx]
        tails = tails[tails[:, -1] > prefix[0]]
        if not len(tails):
            continue
        fixed = np.asarray(prefix + head, dtype=np.int64)
        for start in range(0, len(tails), _CHUNK):
            chunk = tails[start:start + _CHUNK]
            yield np.hstack([np.broadcast_to(fixed, (len(chunk), len(fixed))), chunk])


def _run_block(evaluator: Evaluator, n: int, prefix: tuple[int, int], mode: str):
    tested = 0
    best = np.inf
    found: list[tuple[float, tuple[int, ...]]] = []
    for perms in _block_perms(n, prefix):
        tested += len(perms)
        valid, scores = evaluator.batch_scores(perms)
        if mode == "all_valid":
            rows = np.nonzero(valid)[0]
        else:
            low = scores.min()
            if low > best:
                continue
            if low < best:
                best, found = low, []
            rows = np.nonzero(scores == low)[0]
        found.extend((float(scores[r]), tuple(perms[r].tolist())) for r in rows)
    return tested, found


_WORKER_EVALUATOR: Evaluator | None = None


def _init_worker(evaluator: Evaluator) -> None:
    global _WORKER_EVALUATOR
    _WORKER_EVALUATOR = evaluator


def _run_blocks(args):
    n, prefixes, mode = args
    return [_run_block(_WORKER_EVALUATOR, n, p, mode) for p in prefixes]


def _merge(block_results, mode: str) -> tuple[int, list[tuple[float, tuple[int, ...]]]]:
    tested = 0
    found = []
    for t, f in block_results:
        tested += t
        found.extend(f)
    if mode == "best_scoring" and found:
        low = min(s for s, _ in found)
        found = [item for item in found if item[0] == low]
    found.sort()
    return tested, found


def solve_single(req: EnumerationRequest, budget: ComputeBudget | None = None) -> EnumerationResult:
    n = req.matrix.n
    if n > PRACTICAL_LIMIT and not req.feasibility_override:
        raise FeasibilityRefused(
            f"refusing exhaustive search over {n} assemblages: "
            + feasibility_report(n, budget).describe())
    started = time.perf_counter()
    evaluator = Evaluator(req.matrix, req.criterion)
    if n == 1:
        report = evaluator.evaluate((0,))
        return EnumerationResult([(Ordering((0,)), report)], 1, time.perf_counter() - started)

    blocks = _blocks(n)
    workers = min(req.worker_count, len(blocks))
    if workers == 1:
        results = [_run_block(evaluator, n, p, req.mode) for p in blocks]
    else:
        shares = [(n, blocks[w::workers], req.mode) for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(evaluator,)) as pool:
            per_worker = list(pool.map(_run_blocks, shares))
        results = [r for share in per_worker for r in share]
    tested, found = _merge(results, req.mode)
    solutions = [(Ordering(perm), evaluator.evaluate(perm)) for _, perm in found]
    return EnumerationResult(solutions, tested, time.perf_counter() - started)


def solve_single_reference(matrix: AssemblageMatrix, criterion: UnimodalityCriterion = STRICT,
                           mode: str = "all_valid") -> EnumerationResult:
    """Single-threaded, unbatched path: one evaluation per canonical permutation."""
    evaluator = Evaluator(matrix, criterion)
    scored = []
    tested = 0
    for o in canonical_permutations(matrix.n):
        tested += 1
        report = evaluator.evaluate(o.perm)
        if mode == "all_valid" and not report.valid:
            continue
        scored.append((report.score, o.perm, report))
    if mode == "best_scoring" and scored:
        low = min(s for s, _, _ in scored)
        scored = [item for item in scored if item[0] == low]
    scored.sort(key=lambda t: (t[0], t[1]))
    return EnumerationResult([(Ordering(p), r) for _, p, r in scored], tested)


def default_workers() -> int:
    env = os.environ.get("SERIAGRAPH_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
