"""On-disk formats (see FORMATS.md).

Floats are written with 17 significant digits so every value round-trips
bit-exactly. Files are UTF-8 with LF line endings; ids are 1-based.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import ParseError, SchemaError
from .types import Assignment, Dataset, EmpiricalFeatureSet, GocTrace, validate_dataset

META = "meta.json"
CANDIDATES = "candidates.csv"
TRUTH = "truth.csv"


def fmt(x) -> str:
    return format(float(x), ".17g")


def _writer(path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def _read_rows(path, expected_header=None, prefix_header=None):
    """Yield ``(line_number, row)`` after checking the header."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("file is empty", path, 1) from None
        if expected_header is not None and header != expected_header:
            raise SchemaError(f"header {header} does not match expected {expected_header}", path, 1)
        if prefix_header is not None and header[: len(prefix_header)] != prefix_header:
            raise SchemaError(f"header {header} must start with {prefix_header}", path, 1)
        rows = [(reader.line_num, row) for row in reader if row]
    return header, rows


def _num(text, path, line, cast=float):
    try:
        return cast(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as {cast.__name__}", path, line) from None


def write_truth(path, labels) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(["individual", "true_cluster"])
        for i, lab in enumerate(labels, start=1):
            w.writerow([i, int(lab)])


def read_truth(path) -> np.ndarray:
    _, rows = _read_rows(path, ["individual", "true_cluster"])
    out = []
    for line, row in rows:
        if len(row) != 2:
            raise SchemaError(f"expected 2 fields, found {len(row)}", path, line)
        i = _num(row[0], path, line, int)
        if i != len(out) + 1:
            raise ParseError(f"individual ids must be consecutive from 1; found {i}", path, line)
        out.append(_num(row[1], path, line, int))
    return np.array(out, dtype=np.int64)


def save_dataset(d: Dataset, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "n": d.n,
        "q": d.feature_dim,
        "K_star": d.K_star,
        "seed": d.seed,
        "standardized": d.standardized,
        "norm_meta": d.norm_meta,
    }
    with open(directory / META, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    fh, w = _writer(directory / CANDIDATES)
    with fh:
        w.writerow(["individual", "candidate"] + [f"f{k}" for k in range(1, d.feature_dim + 1)] + ["penalty"])
        for s in d.sets:
            for j in range(s.m):
                w.writerow([s.individual_id, j + 1] + [fmt(x) for x in s.candidates[j]] + [fmt(s.penalties[j])])
    truth = directory / TRUTH
    if d.true_labels is not None:
        write_truth(truth, d.true_labels)
    elif truth.exists():
        truth.unlink()


def load_dataset(directory) -> Dataset:
    directory = Path(directory)
    try:
        with open(directory / META, encoding="utf-8") as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", directory / META, exc.lineno) from None
    for key in ("n", "q", "standardized"):
        if key not in meta:
            raise SchemaError(f"missing key {key!r}", directory / META)
    q = int(meta["q"])
    path = directory / CANDIDATES
    header = ["individual", "candidate"] + [f"f{k}" for k in range(1, q + 1)] + ["penalty"]
    _, rows = _read_rows(path, header)

    groups: dict[int, list] = {}
    order: list[int] = []
    for line, row in rows:
        if len(row) != len(header):
            raise SchemaError(f"expected {len(header)} fields, found {len(row)}", path, line)
        ind = _num(row[0], path, line, int)
        cand = _num(row[1], path, line, int)
        vals = [_num(x, path, line) for x in row[2:]]
        if ind not in groups:
            if order and ind < order[-1]:
                raise ParseError("rows must be grouped by individual in increasing order", path, line)
            groups[ind] = []
            order.append(ind)
        elif ind != order[-1]:
            raise ParseError("rows must be grouped by individual", path, line)
        if cand != len(groups[ind]) + 1:
            raise ParseError(f"candidate ids must be consecutive from 1; found {cand}", path, line)
        groups[ind].append(vals)
    sets = []
    for ind in order:
        arr = np.array(groups[ind], dtype=float)
        sets.append(EmpiricalFeatureSet(arr[:, :q], arr[:, q], ind))
    if len(sets) != int(meta["n"]):
        raise SchemaError(f"meta.json declares n={meta['n']} but {len(sets)} individuals found", path)
    truth = read_truth(directory / TRUTH) if (directory / TRUTH).exists() else None
    d = Dataset(
        tuple(sets),
        true_labels=truth,
        standardized=bool(meta["standardized"]),
        norm_meta=meta.get("norm_meta"),
        seed=meta.get("seed"),
    )
    validate_dataset(d)
    return d


ASSIGNMENT_HEADER = ["individual", "cluster", "selected"]


def write_assignment(path, a: Assignment) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(ASSIGNMENT_HEADER)
        for i, lab in enumerate(a.labels, start=1):
            sel = "" if a.selected is None else int(a.selected[i - 1])
            w.writerow([i, int(lab), sel])


def read_assignment(path) -> Assignment:
    _, rows = _read_rows(path, prefix_header=["individual", "cluster"])
    labels, sel = [], []
    for line, row in rows:
        if len(row) < 2:
            raise SchemaError("expected at least 2 fields", path, line)
        labels.append(_num(row[1], path, line, int))
        if len(row) > 2 and row[2] != "":
            sel.append(_num(row[2], path, line, int))
    labels = np.array(labels, dtype=np.int64)
    selected = np.array(sel, dtype=np.int64) if len(sel) == len(labels) and sel else None
    return Assignment(labels, int(labels.max()) if labels.size else 0, selected=selected)


def read_labels(path) -> np.ndarray:
    """Second column of any ``individual,<label>`` CSV (assignment or truth)."""
    _, rows = _read_rows(path)
    out = []
    for line, row in rows:
        if len(row) < 2:
            raise SchemaError("expected at least 2 fields", path, line)
        out.append(_num(row[1], path, line, int))
    return np.array(out, dtype=np.int64)


TRACE_HEADER = ["t", "K", "objective", "n_changed_labels", "n_changed_candidates"]


def write_trace(path, trace: GocTrace) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(TRACE_HEADER)
        for r in trace.iterations:
            w.writerow([r.t, r.K, fmt(r.objective), r.n_changed_labels, r.n_changed_candidates])


def read_trace(path) -> list[dict]:
    _, rows = _read_rows(path, TRACE_HEADER)
    out = []
    for line, row in rows:
        if len(row) != len(TRACE_HEADER):
            raise SchemaError(f"expected {len(TRACE_HEADER)} fields", path, line)
        out.append(
            {
                "t": _num(row[0], path, line, int),
                "K": _num(row[1], path, line, int),
                "objective": _num(row[2], path, line),
                "n_changed_labels": _num(row[3], path, line, int),
                "n_changed_candidates": _num(row[4], path, line, int),
            }
        )
    return out


def write_similarity(path, S) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(["kind", S.kind])
        for row in S.values:
            w.writerow([fmt(x) for x in row])


def read_similarity(path):
    from .baselines import SimilarityMatrix

    header, rows = _read_rows(path)
    if len(header) != 2 or header[0] != "kind":
        raise SchemaError("first line must be 'kind,<kind>'", path, 1)
    vals = []
    for line, row in rows:
        if vals and len(row) != len(vals[0]):
            raise SchemaError("ragged similarity matrix", path, line)
        vals.append([_num(x, path, line) for x in row])
    return SimilarityMatrix(np.array(vals, dtype=float), header[1])


def write_rows(path, header: list, rows: Iterable[Iterable]) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in r])


def read_rows(path) -> tuple[list, list]:
    header, rows = _read_rows(path)
    return header, [r for _, r in rows]
