"""CSV ingestion and JSON solution documents."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .combinatorics import TimeEstimate
from .enumeration import EnumerationResult
from .model import AssemblageMatrix, EvaluationReport, InstanceInvalid, UnimodalityCriterion
from .multigroup import GroupedSolution

SCHEMA_VERSION = "1"


class InputError(ValueError):
    """A malformed input table; the message names the offending row and column."""


def read_table(path: str | Path) -> AssemblageMatrix:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    return parse_table(text, source=str(path))


def parse_table(text: str, source: str = "<input>") -> AssemblageMatrix:
    rows = list(csv.reader(text.splitlines()))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise InputError(f"{source}: empty table")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "id":
        raise InputError(f"{source}, line 1: header must start with 'id'")
    classes = header[1:]
    if not classes:
        raise InputError(f"{source}, line 1: no class columns")
    ids, counts = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise InputError(f"{source}, line {lineno}: expected {len(header)} fields, got {len(row)}")
        ident = row[0].strip()
        if not ident:
            raise InputError(f"{source}, line {lineno}, column 'id': empty id")
        if ident in ids:
            raise InputError(f"{source}, line {lineno}, column 'id': duplicate id {ident!r}")
        values = []
        for name, cell in zip(classes, row[1:]):
            cell = cell.strip()
            try:
                v = int(cell)
            except ValueError:
                raise InputError(f"{source}, line {lineno}, column {name!r}: "
                                 f"{cell!r} is not an integer count") from None
            if v < 0:
                raise InputError(f"{source}, line {lineno}, column {name!r}: negative count {v}")
            values.append(v)
        if not any(values):
            raise InputError(f"{source}, line {lineno}: assemblage {ident!r} has no specimens")
        ids.append(ident)
        counts.append(values)
    if not ids:
        raise InputError(f"{source}: no assemblage rows")
    try:
        return AssemblageMatrix(tuple(ids), np.asarray(counts, dtype=np.int64), tuple(classes))
    except InstanceInvalid as exc:
        raise InputError(f"{source}: {exc}") from exc


def write_table(matrix: AssemblageMatrix) -> str:
    lines = [",".join(("id",) + matrix.classes)]
    for ident, row in zip(matrix.ids, matrix.counts.tolist()):
        lines.append(",".join([ident] + [str(v) for v in row]))
    return "\n".join(lines) + "\n"


# -- documents ---------------------------------------------------------------

def instance_block(matrix: AssemblageMatrix) -> dict:
    body = {"ids": list(matrix.ids), "classes": list(matrix.classes),
            "counts": matrix.counts.tolist()}
    digest = hashlib.sha256(json.dumps(body, sort_keys=True, separators=(",", ":")).encode())
    return {"digest": digest.hexdigest(), **body}


def matrix_from_document(doc: dict) -> AssemblageMatrix:
    inst = doc["instance"]
    return AssemblageMatrix(tuple(inst["ids"]), np.asarray(inst["counts"], dtype=np.int64),
                            tuple(inst["classes"]))


def _report(report: EvaluationReport) -> dict:
    return {
        "valid": report.valid,
        "score": report.score,
        "violations": [{"class_index": v.class_index, "position_pair": list(v.position_pair),
                        "magnitude": v.magnitude} for v in report.violations],
    }


def _estimate(est: TimeEstimate) -> dict:
    return {"seconds": str(est.seconds), "years": str(est.years)}


def seriation_document(matrix: AssemblageMatrix, criterion: UnimodalityCriterion,
                       mode: str, result: EnumerationResult, count: int,
                       estimate: TimeEstimate) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "seriate",
        "instance": instance_block(matrix),
        "criterion": criterion.as_dict(),
        "search": {"mode": mode, "tested_count": result.tested_count},
        "counts": {"unique_seriations": count, "estimate": _estimate(estimate)},
        "solutions": [
            {"groups": [{"members": sorted(o.perm), "ordering": list(o.perm),
                         "labels": [matrix.ids[i] for i in o.perm], **_report(r)}]}
            for o, r in result.solutions
        ],
    }


def _group(matrix: AssemblageMatrix, g) -> dict:
    out = {"members": list(g.members), "ordering": list(g.ordering.perm),
           "labels": [matrix.ids[i] for i in g.ordering.perm], **_report(g.report)}
    if g.alternatives:
        out["alternatives"] = [list(o.perm) for o in g.alternatives]
    return out


def multigroup_document(matrix: AssemblageMatrix, criterion: UnimodalityCriterion,
                        mode: str, solutions: list[GroupedSolution],
                        partition_count: int | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "multigroup",
        "instance": instance_block(matrix),
        "criterion": criterion.as_dict(),
        "search": {"mode": mode},
        "solutions": [
            {"rgs": list(s.partition.rgs), "groups": [_group(matrix, g) for g in s.groups]}
            for s in solutions
        ],
    }
    if partition_count is not None:
        doc["counts"] = {"partitions": partition_count}
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def loads(text: str) -> dict:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise InputError("not a solution document")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {doc['schema_version']!r}")
    return doc
