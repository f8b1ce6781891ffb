"""Monospaced battleship diagrams."""
from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal

FILL = "#"
EMPTY = "."
GUTTER = "  "


def bar_width(freq: float, width: int) -> int:
    return int((Decimal(repr(float(freq))) * width).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def bar(freq: float, width: int) -> str:
    """A bar of round(freq * width) fill characters centred in ``width`` columns."""
    w = bar_width(freq, width)
    if w == 0:
        left = (width - 1) // 2
        return " " * left + EMPTY + " " * (width - left - 1)
    left = (width - w) // 2
    return " " * left + FILL * w + " " * (width - w - left)


def render_group(labels, classes, rows, width: int = 20) -> list[str]:
    """One text line per assemblage; ``rows`` holds each assemblage's class frequencies."""
    label_w = max([len(x) for x in labels] + [2])
    head = " " * label_w + GUTTER + GUTTER.join(c[:width].center(width) for c in classes)
    lines = [head.rstrip()]
    for label, freqs in zip(labels, rows):
        cells = GUTTER.join(bar(f, width) for f in freqs)
        lines.append((label.ljust(label_w) + GUTTER + cells).rstrip())
    return lines


def render_document(doc: dict, width: int = 20) -> str:
    if width < 1:
        raise ValueError("width must be positive")
    solutions = doc.get("solutions") or []
    if not solutions:
        raise ValueError("document holds no solutions")
    inst = doc["instance"]
    ids, classes, counts = inst["ids"], inst["classes"], inst["counts"]
    out = []
    groups = solutions[0]["groups"]
    for gi, group in enumerate(groups, start=1):
        order = group["ordering"]
        rows = [[c / sum(counts[i]) for c in counts[i]] for i in order]
        out.append(f"group {gi} ({len(order)} assemblages)")
        out.extend(render_group([ids[i] for i in order], classes, rows, width))
        out.append("")
    return "\n".join(out)
