"""Exact solution-space counts for single and multi-group seriation.

All counts are plain Python integers, so nothing overflows even at the
n=100 end of the tables (about 4.4e232). Wall-clock estimates convert
counts to :class:`decimal.Decimal` at enough precision to keep the
conversion exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Context, Decimal, localcontext

SECONDS_PER_YEAR = Decimal(31_557_600)  # 365.25 days

STIRLING_MAX_N = 512


@dataclass(frozen=True)
class ComputeBudget:
    cores: int = 64
    seconds_per_test: Decimal = Decimal("0.005")

    def __post_init__(self):
        if self.cores < 1:
            raise ValueError(f"cores must be positive, got {self.cores}")
        per_test = Decimal(str(self.seconds_per_test))
        if per_test <= 0:
            raise ValueError(f"seconds_per_test must be positive, got {per_test}")
        object.__setattr__(self, "seconds_per_test", per_test)


@dataclass(frozen=True)
class TimeEstimate:
    seconds: Decimal
    years: Decimal


def factorial(n: int) -> int:
    if n < 0:
        raise ValueError(f"factorial of negative number {n}")
    return math.factorial(n)


def unique_seriation_count(n: int) -> int:
    """Orderings of ``n`` assemblages up to mirror reversal (n!/2, or 1 for n < 2)."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n < 2:
        return 1
    return math.factorial(n) // 2


class StirlingTable:
    """Dense triangular table of S(n, m), grown row by row on demand.

    Rows are appended with S(n, m) = m*S(n-1, m) + S(n-1, m-1). Reads
    after the table has been grown are safe to share between threads;
    growth itself is not synchronised.
    """

    def __init__(self, max_n: int = STIRLING_MAX_N):
        self.max_n = max_n
        self._rows: list[list[int]] = [[1]]

    def _grow(self, n: int) -> None:
        if n > self.max_n:
            raise ValueError(f"n={n} exceeds the configured Stirling table cap {self.max_n}")
        rows = self._rows
        while len(rows) <= n:
            prev = rows[-1]
            k = len(rows)
            row = [0] * (k + 1)
            for m in range(1, k + 1):
                above = prev[m] if m < k else 0
                row[m] = m * above + prev[m - 1]
            rows.append(row)

    def row(self, n: int) -> list[int]:
        if n < 0:
            raise ValueError(f"n must be non-negative, got {n}")
        self._grow(n)
        return self._rows[n]

    def __call__(self, n: int, m: int) -> int:
        if m < 0:
            raise ValueError(f"m must be non-negative, got {m}")
        if m > n:
            return 0
        return self.row(n)[m]


_TABLE = StirlingTable()


def stirling2(n: int, m: int) -> int:
    """Number of ways to split ``n`` items into ``m`` non-empty unlabeled groups."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return _TABLE(n, m)


def all_partitions_count(n: int) -> int:
    """Sum of S(n, i) over i = 1..n, i.e. the Bell number."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return sum(_TABLE.row(n)[1:])


def total_multigroup_solutions(n: int) -> int:
    """Worst-case multi-group solution count: sum of S(n, m) * (n-m-1)!.

    Terms whose factorial argument would be negative (m = n) are
    dropped; that is the only reading that gives 15 at n = 4. The factor
    is kept as n-m-1 even though m-1 singletons leave n-m+1 assemblages
    for the largest group, so the published totals are reproduced.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    row = _TABLE.row(n)
    return sum(row[m] * math.factorial(n - m - 1) for m in range(1, n))


def stirling_row_argmax(n: int) -> int:
    """Smallest m in 1..n maximising S(n, m)."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    row = _TABLE.row(n)
    best = 1
    for m in range(2, n + 1):
        if row[m] > row[best]:
            best = m
    return best


def estimate_time(count: int, budget: ComputeBudget | None = None) -> TimeEstimate:
    if budget is None:
        budget = ComputeBudget()
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    with localcontext() as ctx:
        # exact for power-of-two core counts; never below 30 digits
        ctx.prec = max(30, len(str(count)) + 20)
        seconds = Decimal(count) * budget.seconds_per_test / Decimal(budget.cores)
        years = seconds / SECONDS_PER_YEAR
    return TimeEstimate(seconds=seconds, years=years)


def format_count(value: int | Decimal | float, sig_digits: int = 2) -> str:
    """Render a number the way ``printf("%.<sig>g")`` would, without float overflow.

    >>> format_count(580606446, 2)
    '5.8e+08'
    >>> format_count(12, 2)
    '12'
    """
    if sig_digits < 1:
        raise ValueError(f"sig_digits must be positive, got {sig_digits}")
    d = Decimal(value) if not isinstance(value, float) else Decimal(repr(value))
    if d < 0:
        raise ValueError(f"counts are non-negative, got {value}")
    if d == 0:
        return "0"
    r = Context(prec=sig_digits, rounding=ROUND_HALF_EVEN).plus(d)
    exp = r.adjusted()
    if -4 <= exp < sig_digits:
        text = f"{r:.{max(sig_digits - 1 - exp, 0)}f}"
        if "." in text:
            text = text.rstrip("0").rstrip(".")
        return text
    mantissa = f"{r.scaleb(-exp):.{sig_digits - 1}f}"
    if "." in mantissa:
        mantissa = mantissa.rstrip("0").rstrip(".")
    return f"{mantissa}e{exp:+03d}"
