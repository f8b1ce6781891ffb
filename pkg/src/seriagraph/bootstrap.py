"""Sample-size-aware tolerance for frequency comparisons.

Each assemblage row is resampled multinomially at its own sample size;
the percentile interval of each class's resampled frequency becomes the
tolerance band for that cell. Two cells differ significantly only when
their bands are disjoint.

Every row gets its own generator, seeded from the configured seed and a
digest of the row's counts, so intervals do not depend on which rows
are evaluated, in what order, or in which process.
"""
from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class BootstrapConfig:
    alpha: float = 0.05
    replicates: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.replicates < 100:
            raise ValueError(f"at least 100 bootstrap replicates required, got {self.replicates}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.replicates < 1000:
            warnings.warn(f"{self.replicates} bootstrap replicates; intervals will be noisy below 1000",
                          stacklevel=3)


@dataclass(frozen=True)
class FrequencyInterval:
    lower: float
    upper: float
    point: float
    sample_size: int


def _row_seed(counts_row: Sequence[int], seed: int) -> np.random.SeedSequence:
    digest = hashlib.sha256(",".join(str(int(c)) for c in counts_row).encode()).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, *words])


def _row_bounds(counts_row: Sequence[int], cfg: BootstrapConfig):
    counts = np.asarray(counts_row, dtype=np.int64)
    total = int(counts.sum())
    if total < 1:
        raise ValueError("cannot bootstrap a row with no specimens")
    point = counts / total
    rng = np.random.Generator(np.random.PCG64(_row_seed(counts.tolist(), cfg.seed)))
    draws = rng.multinomial(total, point, size=cfg.replicates) / total
    lower, upper = np.quantile(draws, [cfg.alpha / 2, 1 - cfg.alpha / 2], axis=0)
    # percentile bands can miss the observed value on very small samples
    lower = np.minimum(lower, point)
    upper = np.maximum(upper, point)
    return lower, upper, point, total


def bootstrap_intervals(counts_row: Sequence[int], cfg: BootstrapConfig) -> list[FrequencyInterval]:
    lower, upper, point, total = _row_bounds(counts_row, cfg)
    return [FrequencyInterval(float(lo), float(hi), float(p), total)
            for lo, hi, p in zip(lower, upper, point)]


def significantly_greater(a: FrequencyInterval, b: FrequencyInterval) -> bool:
    return a.lower > b.upper


def matrix_intervals(matrix, cfg: BootstrapConfig) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper band arrays (n x k) for every cell of ``matrix``."""
    lower = np.empty(matrix.counts.shape)
    upper = np.empty(matrix.counts.shape)
    for i, row in enumerate(matrix.counts.tolist()):
        lower[i], upper[i], _, _ = _row_bounds(row, cfg)
    return lower, upper
