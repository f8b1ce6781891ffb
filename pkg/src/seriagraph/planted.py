"""Synthetic instances with a known valid structure, for testing and demos."""
from __future__ import annotations

import numpy as np

from .model import AssemblageMatrix


def planted_order(n: int, k: int, rng: np.random.Generator, scale: int = 12) -> AssemblageMatrix:
    """An n x k matrix whose rows, in index order, seriate perfectly.

    Classes occupy consecutive runs of a line of cells (random run
    lengths); assemblage t counts the cells of each class inside a
    window that slides right as t grows. The overlap of a sliding
    window with a fixed run is a trapezoid, so every column is
    unimodal, and every row has the same total (the window length).
    """
    widths = rng.integers(1, scale + 1, size=k)
    edges = np.concatenate([[0], np.cumsum(widths)])
    span = int(edges[-1])
    window = int(rng.integers(max(1, span // 4), max(1, span // 2) + 1))
    travel = span - window
    starts = np.sort(rng.choice(np.arange(travel + 1), size=n, replace=travel + 1 < n))
    counts = np.zeros((n, k), dtype=np.int64)
    for t, s in enumerate(starts.tolist()):
        lo, hi = s, s + window
        counts[t] = np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0, None)
    return AssemblageMatrix(tuple(f"a{i}" for i in range(n)), counts)


def shuffled(matrix: AssemblageMatrix, rng: np.random.Generator) -> tuple[AssemblageMatrix, list[int]]:
    """Rows permuted at random; returns the new matrix and the new position of each old row."""
    perm = rng.permutation(matrix.n)
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(matrix.n)
    out = AssemblageMatrix(tuple(matrix.ids[i] for i in perm), matrix.counts[perm], matrix.classes)
    return out, inverse.tolist()


def _monotone_block(size: int, rng: np.random.Generator, total: int, floor: int) -> np.ndarray:
    """Rows of a 4-class group: two dominant classes trading off, two minor ones.

    The dominant pair is strictly increasing/decreasing along the
    group order and the minor pair does the same with small counts, so
    the group has a single valid ordering up to reversal.
    """
    minor_total = size + 1
    major_total = total - minor_total
    a = np.sort(rng.choice(np.arange(floor, major_total - floor + 1), size=size, replace=False))
    t = np.arange(size)
    return np.column_stack([a, major_total - a, t + 1, size - t])


def planted_two_groups(sizes: tuple[int, int], rng: np.random.Generator,
                       total: int = 1000) -> tuple[AssemblageMatrix, list[int]]:
    """Two planted groups over four classes with disjoint dominant classes.

    Group 0 dominates classes 0-1 and group 1 classes 2-3. Any mixed
    group of three or more is invalid, so the planted split is the only
    two-group solution. Returns the shuffled matrix and each row's group label.
    """
    floor = total // 5
    a = _monotone_block(sizes[0], rng, total, floor)
    b = _monotone_block(sizes[1], rng, total, floor)[:, [2, 3, 0, 1]]
    counts = np.vstack([a, b])
    labels = np.array([0] * sizes[0] + [1] * sizes[1])
    perm = rng.permutation(len(counts))
    matrix = AssemblageMatrix(tuple(f"a{i}" for i in range(len(counts))), counts[perm])
    return matrix, labels[perm].tolist()
