"""Assemblage data, canonical orderings and the unimodality test.

An ordering is valid when every class column, read down the ordering,
rises and then falls at most once. Comparisons between frequencies go
through a pair of integer/float "bounds" arrays so that strict mode
(exact rational comparison) and bootstrap mode (confidence-interval
comparison) share one evaluation path: ``x`` is above ``y`` when
``lo[x] > hi[y]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np


class InstanceInvalid(ValueError):
    """Raised when an assemblage matrix or ordering is malformed."""


@dataclass(frozen=True, eq=False)
class AssemblageMatrix:
    ids: tuple[str, ...]
    counts: np.ndarray
    classes: tuple[str, ...] = ()

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        counts = np.asarray(self.counts)
        if counts.ndim != 2:
            raise InstanceInvalid("counts must be a 2-d matrix")
        n, k = counts.shape
        if n < 1 or k < 1:
            raise InstanceInvalid(f"need at least one assemblage and one class, got {n}x{k}")
        if len(ids) != n:
            raise InstanceInvalid(f"{len(ids)} ids for {n} rows")
        if any(not i for i in ids):
            raise InstanceInvalid("assemblage ids must be non-empty")
        if len(set(ids)) != n:
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InstanceInvalid(f"duplicate assemblage ids: {', '.join(dupes)}")
        if counts.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(counts, 1), 0)):
                raise InstanceInvalid("counts must be integers")
        counts = counts.astype(np.int64)
        if (counts < 0).any():
            i, j = np.argwhere(counts < 0)[0]
            raise InstanceInvalid(f"negative count {counts[i, j]} at assemblage {ids[i]!r}, class {j}")
        totals = counts.sum(axis=1)
        if (totals == 0).any():
            i = int(np.argmax(totals == 0))
            raise InstanceInvalid(f"assemblage {ids[i]!r} has no specimens")
        classes = tuple(self.classes) or tuple(f"c{j}" for j in range(k))
        if len(classes) != k:
            raise InstanceInvalid(f"{len(classes)} class names for {k} columns")
        counts.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "classes", classes)

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def k(self) -> int:
        return self.counts.shape[1]

    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def __eq__(self, other):
        if not isinstance(other, AssemblageMatrix):
            return NotImplemented
        return (self.ids == other.ids and self.classes == other.classes
                and np.array_equal(self.counts, other.counts))

    __hash__ = None


@dataclass(frozen=True)
class FrequencyMatrix:
    values: np.ndarray
    row_totals: np.ndarray


def frequencies(m: AssemblageMatrix) -> FrequencyMatrix:
    totals = m.row_totals()
    if (totals <= 0).any():
        raise InstanceInvalid("zero row total")
    values = m.counts / totals[:, None]
    return FrequencyMatrix(values=values, row_totals=totals)


def exact_ranks(m: AssemblageMatrix) -> np.ndarray:
    """Dense per-column ranks of the exact rational frequencies.

    Equal fractions get equal ranks, so rank comparison is exact
    frequency comparison with no floating-point ties or near-misses.
    """
    totals = [int(t) for t in m.row_totals()]
    ranks = np.zeros(m.counts.shape, dtype=np.int64)
    for j in range(m.k):
        col = [Fraction(int(m.counts[i, j]), totals[i]) for i in range(m.n)]
        levels = {v: r for r, v in enumerate(sorted(set(col)))}
        ranks[:, j] = [levels[v] for v in col]
    return ranks


@dataclass(frozen=True)
class Ordering:
    perm: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(int(i) for i in self.perm))

    def __len__(self):
        return len(self.perm)

    def __iter__(self):
        return iter(self.perm)

    def reversed(self) -> "Ordering":
        return Ordering(self.perm[::-1])

    @property
    def is_canonical(self) -> bool:
        return len(self.perm) < 2 or self.perm[0] < self.perm[-1]


def canonicalize(o: Ordering | Sequence[int]) -> Ordering:
    if not isinstance(o, Ordering):
        o = Ordering(tuple(o))
    if len(set(o.perm)) != len(o.perm):
        raise InstanceInvalid(f"not a permutation: {o.perm}")
    return o if o.is_canonical else o.reversed()


def is_unimodal(seq: Sequence[float], tie: Callable[[float, float], bool] | None = None) -> bool:
    """True when ``seq`` is non-decreasing up to some peak and non-increasing after it.

    ``tie(a, b)`` declares neighbours equal; by default only exact equality does.
    """
    if not seq:
        raise ValueError("empty sequence")
    if tie is None:
        tie = lambda a, b: a == b  # noqa: E731
    descending = False
    for a, b in zip(seq, seq[1:]):
        if tie(a, b):
            continue
        if b < a:
            descending = True
        elif descending:
            return False
    return True


@dataclass(frozen=True)
class UnimodalityCriterion:
    mode: str = "strict"
    alpha: float = 0.05
    replicates: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("strict", "bootstrap"):
            raise ValueError(f"unknown criterion mode {self.mode!r}")
        if self.mode == "bootstrap":
            self.bootstrap_config()  # validates

    def bootstrap_config(self):
        from .bootstrap import BootstrapConfig
        return BootstrapConfig(alpha=self.alpha, replicates=self.replicates, seed=self.seed)

    def as_dict(self) -> dict:
        if self.mode == "strict":
            return {"mode": "strict"}
        return {"mode": self.mode, "alpha": self.alpha,
                "replicates": self.replicates, "seed": self.seed}


STRICT = UnimodalityCriterion()


@dataclass(frozen=True)
class Violation:
    class_index: int
    position_pair: tuple[int, int]
    magnitude: float


@dataclass(frozen=True)
class EvaluationReport:
    valid: bool
    violations: tuple[Violation, ...] = ()
    score: float = 0.0


class Evaluator:
    """Unimodality checks for one matrix under one criterion.

    Builds the comparison bounds once; every method is pure afterwards,
    and instances pickle cleanly for use in worker processes.
    """

    def __init__(self, matrix: AssemblageMatrix, criterion: UnimodalityCriterion = STRICT):
        self.matrix = matrix
        self.criterion = criterion
        self.points = frequencies(matrix).values
        if criterion.mode == "strict":
            ranks = exact_ranks(matrix)
            self.lo = self.hi = ranks
        else:
            from .bootstrap import matrix_intervals
            lower, upper = matrix_intervals(matrix, criterion.bootstrap_config())
            self.lo, self.hi = lower, upper
        self._lo_rows = self.lo.tolist()
        self._hi_rows = self.hi.tolist()
        self.k = matrix.k

    def step(self, a: int, b: int, descended: tuple[bool, ...]) -> tuple[bool, ...] | None:
        """Advance the per-class automaton by the pair (a, b); None if any class breaks."""
        lo_a, hi_a = self._lo_rows[a], self._hi_rows[a]
        lo_b, hi_b = self._lo_rows[b], self._hi_rows[b]
        out = list(descended)
        for j in range(self.k):
            if out[j]:
                if lo_b[j] > hi_a[j]:
                    return None
            elif lo_a[j] > hi_b[j]:
                out[j] = True
        return tuple(out)

    def is_valid(self, perm: Sequence[int]) -> bool:
        state = (False,) * self.k
        for a, b in zip(perm, perm[1:]):
            state = self.step(a, b, state)
            if state is None:
                return False
        return True

    def evaluate(self, perm: Sequence[int]) -> EvaluationReport:
        perm = list(perm)
        if len(set(perm)) != len(perm):
            raise InstanceInvalid(f"repeated assemblage in ordering {perm}")
        if any(not 0 <= p < self.matrix.n for p in perm):
            raise InstanceInvalid(f"ordering {perm} references unknown rows")
        viol, mags = self._batch(np.asarray([perm], dtype=np.int64))
        score = float(_score(mags)[0])
        pos, cls = np.nonzero(viol[0])
        violations = tuple(
            Violation(int(c), (int(p), int(p) + 1), float(mags[0, p, c]))
            for p, c in sorted(zip(pos.tolist(), cls.tolist()), key=lambda t: (t[1], t[0]))
        )
        return EvaluationReport(valid=not violations, violations=violations, score=score)

    def _batch(self, perms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lo = self.lo[perms]
        hi = self.hi[perms]
        pts = self.points[perms]
        desc = lo[:, :-1] > hi[:, 1:]
        asc = lo[:, 1:] > hi[:, :-1]
        seen = np.logical_or.accumulate(desc, axis=1)
        viol = asc & seen
        mags = np.where(viol, pts[:, 1:] - pts[:, :-1], 0.0)
        return viol, mags

    def batch_scores(self, perms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Validity mask and scores for a (P, L) array of orderings."""
        if perms.shape[1] < 2:
            return np.ones(len(perms), dtype=bool), np.zeros(len(perms))
        viol, mags = self._batch(perms)
        valid = ~viol.any(axis=(1, 2))
        return valid, _score(mags)


def _score(mags: np.ndarray) -> np.ndarray:
    """Total violation magnitude per ordering; 0 for valid ones.

    Ranking invalid orderings this way is a local convention, not an
    established seriation measure.
    """
    # positions first, then classes; same reduction for batch and single
    return mags.sum(axis=1).sum(axis=1) if mags.shape[1] else np.zeros(mags.shape[0])


def evaluate_ordering(m: AssemblageMatrix, o: Ordering | Sequence[int],
                      c: UnimodalityCriterion = STRICT,
                      evaluator: Evaluator | None = None) -> EvaluationReport:
    perm = o.perm if isinstance(o, Ordering) else tuple(o)
    if len(perm) != m.n or sorted(perm) != list(range(m.n)):
        raise InstanceInvalid(f"ordering of length {len(perm)} is not a permutation of {m.n} rows")
    if evaluator is None:
        evaluator = Evaluator(m, c)
    return evaluator.evaluate(perm)


def matrix_from_rows(rows: Iterable[Sequence[int]], ids: Sequence[str] | None = None,
                     classes: Sequence[str] | None = None) -> AssemblageMatrix:
    counts = np.asarray([list(r) for r in rows], dtype=np.int64)
    if ids is None:
        ids = [f"a{i}" for i in range(counts.shape[0])]
    return AssemblageMatrix(tuple(ids), counts, tuple(classes or ()))
