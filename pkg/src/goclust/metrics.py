"""External clustering scores and GOC convergence diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import LengthMismatch


@dataclass(frozen=True)
class Contingency:
    table: np.ndarray  # rows: predicted clusters present, cols: true clusters present
    row_sums: np.ndarray
    col_sums: np.ndarray
    n: int


def contingency(pred, truth) -> Contingency:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise LengthMismatch(f"label vectors differ in length: {pred.shape} vs {truth.shape}")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    table = np.zeros((pi.max(initial=-1) + 1, ti.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (pi, ti), 1)
    return Contingency(table, table.sum(axis=1), table.sum(axis=0), int(pred.size))


def _is_matching(c: Contingency) -> bool:
    t = c.table
    return t.shape[0] == t.shape[1] and np.all(np.count_nonzero(t, axis=0) == 1) and np.all(
        np.count_nonzero(t, axis=1) == 1
    )


def nmi(pred, truth) -> float:
    """2 I / (H(pred) + H(truth)), natural log, 0 log 0 = 0.

    Identical partitions score exactly 1 (including the one-cluster case);
    otherwise zero mutual information scores 0.
    """
    c = contingency(pred, truth)
    if c.n == 0:
        raise LengthMismatch("empty label vectors")
    if _is_matching(c):
        return 1.0
    n = c.n
    k, l = np.nonzero(c.table)
    nkl = c.table[k, l].astype(float)
    mi = float(np.sum(nkl / n * np.log(n * nkl / (c.row_sums[k] * c.col_sums[l]))))
    pr = c.row_sums / n
    pt = c.col_sums / n
    h1 = float(-np.sum(pr * np.log(pr)))
    h2 = float(-np.sum(pt * np.log(pt)))
    if mi <= 0 or h1 + h2 == 0:
        return 0.0
    return min(1.0, 2.0 * mi / (h1 + h2))


def f_measure(pred, truth) -> float:
    """Size-weighted best-match harmonic mean of precision and recall per true cluster."""
    c = contingency(pred, truth)
    if c.n == 0:
        raise LengthMismatch("empty label vectors")
    t = c.table.astype(float)
    # harmonic mean of n_kl/n_k. and n_kl/n_.l; zero cells give 0
    F = 2.0 * t / (c.row_sums[:, None] + c.col_sums[None, :])
    best = F.max(axis=0)
    return float(np.sum(c.col_sums * best) / c.n)


def eta_scores(trace, final=None, final_Xi=None, truth=None) -> list[dict]:
    """Per-iteration convergence diagnostics relative to the final state.

    eta1 = NMI(labels(t), labels(final)); eta2 = mean squared distance
    between candidates at t and at the end; eta3 = NMI(labels(t), truth) /
    NMI(labels(final), truth), omitted when the denominator is 0 or no
    truth is given.
    """
    if not trace.iterations:
        raise ValueError("empty trace")
    last = trace.iterations[-1]
    final_labels = np.asarray(final.labels if final is not None else last.labels)
    if final_Xi is None:
        final_Xi = final.info["Xi"] if final is not None and "Xi" in final.info else last.Xi
    final_Xi = np.asarray(final_Xi, dtype=float)
    denom = nmi(final_labels, truth) if truth is not None else 0.0
    out = []
    for rec in trace.iterations:
        row = {
            "t": rec.t,
            "eta1": nmi(rec.labels, final_labels),
            "eta2": float(np.mean(np.sum((np.asarray(rec.Xi) - final_Xi) ** 2, axis=1))),
        }
        if truth is not None and denom > 0:
            row["eta3"] = nmi(rec.labels, truth) / denom
        out.append(row)
    return out
