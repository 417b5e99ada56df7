"""Greedy optimistic clustering (GOC) and its pessimistic counterpart (GPC).

Each iteration t:

  I.   pick the number of clusters K(t) (constant, or the number of
       clusters with at least two members after the previous iteration);
  II.  run the clustering oracle on the current candidates Xi(t-1),
       warm-started from the previous cluster centers;
  III. move every individual to the candidate/cluster pair minimizing
       ``||chi - mu_k||^2 + lambda * Pen_i(chi)`` against the centers of
       step II, then assign it to the nearest center.

The loop stops once the selected candidate indices repeat (or, with a
tolerance, once the mean squared candidate displacement falls below it).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import KTooLarge
from .oracles import OracleConfig, oracle_cluster, sq_dists
from .types import Assignment, Dataset, GocTrace, IterationRecord, relabel_consecutive, validate_dataset

OPTIMISTIC = "optimistic"
PESSIMISTIC = "pessimistic"
CONSTANT = "constant"
SHRINK = "shrink_nonsingleton"


@dataclass(frozen=True)
class GocConfig:
    K0: int
    lam: float = 0.0
    k_schedule: str = SHRINK
    tol: Optional[float] = None  # None: stop on identical candidate indices
    T_max: int = 100
    oracle: OracleConfig = field(default_factory=OracleConfig)
    mode: str = OPTIMISTIC

    def __post_init__(self):
        if self.K0 < 1:
            raise ValueError("K0 must be >= 1")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.T_max < 1:
            raise ValueError("T_max must be >= 1")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("convergence tolerance must be > 0")
        if self.k_schedule not in (CONSTANT, SHRINK):
            raise ValueError(f"unknown k_schedule {self.k_schedule!r}")
        if self.mode not in (OPTIMISTIC, PESSIMISTIC):
            raise ValueError(f"unknown mode {self.mode!r}")


def count_nonsingleton(labels, K: int) -> int:
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=K + 1)[1:]
    return int(np.sum(counts > 1))


def cluster_centers(Xi, labels, K: int):
    """Per-cluster means. Returns ``(centers, nonempty)``; empty rows are NaN."""
    Xi = np.asarray(Xi, dtype=float)
    lab0 = np.asarray(labels, dtype=np.int64) - 1
    counts = np.bincount(lab0, minlength=K)
    sums = np.zeros((K, Xi.shape[1]))
    np.add.at(sums, lab0, Xi)
    nonempty = counts > 0
    centers = np.full((K, Xi.shape[1]), np.nan)
    centers[nonempty] = sums[nonempty] / counts[nonempty, None]
    return centers, nonempty


def select_candidates(d: Dataset, centers, lam: float, mode: str = OPTIMISTIC, temp_labels=None):
    """Step III against fixed ``centers`` (rows may be NaN for empty clusters).

    Returns ``(new_Xi, new_labels, selected)`` with 1-based labels and
    candidate indices. Ties resolve to the smallest candidate index, then the
    smallest cluster index.
    """
    centers = np.asarray(centers, dtype=float)
    alive = np.flatnonzero(~np.any(np.isnan(centers), axis=1))
    mu = centers[alive]
    if mode == PESSIMISTIC:
        if temp_labels is None:
            raise ValueError("pessimistic update needs the oracle's labels")
        slot = np.full(len(centers), -1)
        slot[alive] = np.arange(len(alive))
        temp0 = slot[np.asarray(temp_labels, dtype=np.int64) - 1]
    n = d.n
    new_Xi = np.empty((n, d.feature_dim))
    new_labels = np.empty(n, dtype=np.int64)
    selected = np.empty(n, dtype=np.int64)
    for i, s in enumerate(d.sets):
        D = sq_dists(s.candidates, mu)
        if mode == OPTIMISTIC:
            V = D + lam * s.penalties[:, None]
            j = int(np.argmin(V, axis=None)) // V.shape[1]
        else:
            j = int(np.argmax(D[:, temp0[i]] + lam * s.penalties))
        k = int(np.argmin(D[j]))
        new_Xi[i] = s.candidates[j]
        new_labels[i] = alive[k] + 1
        selected[i] = j + 1
    return new_Xi, new_labels, selected


def update_candidates(d: Dataset, prev_Xi, temp_labels, K: int, lam: float, mode: str = OPTIMISTIC):
    centers, _ = cluster_centers(prev_Xi, temp_labels, K)
    return select_candidates(d, centers, lam, mode, temp_labels)


def selected_penalties(d: Dataset, selected) -> np.ndarray:
    return np.array([s.penalties[j - 1] for s, j in zip(d.sets, selected)])


def gather(d: Dataset, selected) -> np.ndarray:
    return np.vstack([s.candidates[j - 1] for s, j in zip(d.sets, selected)])


def goc_objective(Xi, labels, K: int, lam: float, penalties) -> float:
    """Within-cluster sum of squares (centers recomputed) plus the penalty."""
    Xi = np.asarray(Xi, dtype=float)
    centers, _ = cluster_centers(Xi, labels, K)
    resid = Xi - centers[np.asarray(labels) - 1]
    return float(np.sum(resid**2) + lam * np.sum(penalties))


def fixed_center_objective(Xi, labels, centers, lam: float, penalties) -> float:
    Xi = np.asarray(Xi, dtype=float)
    resid = Xi - np.asarray(centers)[np.asarray(labels) - 1]
    return float(np.sum(resid**2) + lam * np.sum(penalties))


def default_initial_selection(d: Dataset) -> np.ndarray:
    """Lowest-penalty candidate per set; nearest to the set mean if all penalties are 0."""
    sel = np.empty(d.n, dtype=np.int64)
    for i, s in enumerate(d.sets):
        if np.any(s.penalties > 0):
            sel[i] = int(np.argmin(s.penalties)) + 1
        else:
            c = s.candidates.mean(axis=0)
            sel[i] = int(np.argmin(np.sum((s.candidates - c) ** 2, axis=1))) + 1
    return sel


def _complete_centers(Xi, centers, K):
    """Extend ``centers`` to K rows by farthest-point picks from ``Xi``."""
    if len(centers) >= K:
        return centers[:K]
    out = list(centers)
    if not out:
        out.append(Xi.mean(axis=0))
    while len(out) < K:
        d2 = sq_dists(Xi, np.array(out)).min(axis=1)
        out.append(Xi[int(np.argmax(d2))])
    return np.array(out)


def run_goc(d: Dataset, init_selected=None, cfg: GocConfig = None):
    """Run the GOC loop. Returns ``(Assignment, GocTrace)``.

    Hitting ``T_max`` is not an error; the trace then has ``converged=False``.
    """
    if cfg is None:
        raise ValueError("a GocConfig is required")
    validate_dataset(d)
    n = d.n
    if cfg.K0 > n:
        raise KTooLarge(f"K0={cfg.K0} exceeds n={n}")

    sel = default_initial_selection(d) if init_selected is None else np.asarray(init_selected, dtype=np.int64)
    Xi = gather(d, sel)
    labels = None
    K_prev = cfg.K0
    trace = GocTrace()

    for t in range(1, cfg.T_max + 1):
        # step I
        if t == 1 or cfg.k_schedule == CONSTANT:
            K_t = cfg.K0
        else:
            K_t = max(1, count_nonsingleton(labels, K_prev))
        init = None
        if t > 1:
            centers, nonempty = cluster_centers(Xi, labels, K_prev)
            if cfg.k_schedule == SHRINK:
                counts = np.bincount(labels - 1, minlength=K_prev)
                keep = centers[counts > 1]
            else:
                keep = centers[nonempty]
            init = _complete_centers(Xi, keep, K_t)

        # step II
        temp = oracle_cluster(Xi, K_t, init, cfg.oracle)
        K_eff = temp.num_clusters

        # step III
        new_Xi, new_labels, new_sel = update_candidates(d, Xi, temp.labels, K_eff, cfg.lam, cfg.mode)
        obj = goc_objective(new_Xi, new_labels, K_eff, cfg.lam, selected_penalties(d, new_sel))
        n_lab = n if labels is None else int(np.sum(new_labels != labels))
        n_sel = int(np.sum(new_sel != sel))
        trace.append(IterationRecord(t, K_eff, new_labels, new_sel, obj, n_lab, n_sel, new_Xi))

        if t > 1:
            if cfg.tol is None:
                done = n_sel == 0
            else:
                done = float(np.mean(np.sum((new_Xi - Xi) ** 2, axis=1))) < cfg.tol
        else:
            done = False
        Xi, labels, sel, K_prev = new_Xi, new_labels, new_sel, K_eff
        if done:
            trace.converged = True
            break

    final_labels = relabel_consecutive(labels)
    K_final = int(final_labels.max())
    centers, _ = cluster_centers(Xi, final_labels, K_final)
    a = Assignment(final_labels, K_final, selected=sel, centers=centers, info={"Xi": Xi})
    return a, trace


def run_gpc(d: Dataset, cfg: GocConfig, init_selected=None):
    """Pessimistic variant: candidates move away from their oracle-assigned center."""
    from dataclasses import replace

    return run_goc(d, init_selected, replace(cfg, mode=PESSIMISTIC))
