"""Baselines: clustering of representative vectors, and affinity propagation
over discrepancies between empirical uncertainty sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .oracles import OracleConfig, oracle_cluster
from .types import Assignment, Dataset
from .uncertainty import make_rng

S1, S2, S3 = "s1", "s2", "s3"
KINDS = (S1, S2, S3)
_KIND_NAMES = {S1: "S1_mean_pairwise", S2: "S2_min_min", S3: "S3_hausdorff"}


def representative_vectors(d: Dataset) -> np.ndarray:
    return np.vstack([s.candidates.mean(axis=0) for s in d.sets])


def baseline_cluster(d: Dataset, K: int, cfg: OracleConfig = OracleConfig()) -> Assignment:
    return oracle_cluster(representative_vectors(d), K, None, cfg)


@dataclass(frozen=True)
class SimilarityMatrix:
    values: np.ndarray
    kind: str

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("similarity matrix must be square")
        if np.max(np.abs(v - v.T), initial=0.0) > 1e-9:
            raise ValueError("similarity matrix must be symmetric")
        off = v[~np.eye(len(v), dtype=bool)]
        if np.any(off > 0):
            raise ValueError("off-diagonal similarities must be <= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def name(self) -> str:
        return _KIND_NAMES.get(self.kind, self.kind)


def set_discrepancies(d: Dataset, hausdorff_standard: bool = False) -> dict:
    """All three discrepancy matrices from one pass over candidate pairs.

    s1: mean pairwise distance; s2: closest pair; s3: by default
    ``max(min_a max_b |a-b|, min_b max_a |a-b|)``, with
    ``hausdorff_standard=True`` the textbook ``max(sup_a inf_b, sup_b inf_a)``.
    Diagonals are 0. Costs O(n^2 m^2) distance evaluations.
    """
    X, _, _, offsets = d.stacked()
    n = d.n
    starts = offsets[:-1]
    sizes = d.sizes
    out = {k: np.zeros((n, n)) for k in KINDS}
    for i in range(n):
        D = cdist(X[offsets[i] : offsets[i + 1]], X)
        out[S1][i] = np.add.reduceat(D, starts, axis=1).sum(axis=0) / (sizes[i] * sizes)
        out[S2][i] = np.minimum.reduceat(D, starts, axis=1).min(axis=0)
        if hausdorff_standard:
            a_to_b = np.minimum.reduceat(D, starts, axis=1).max(axis=0)
            b_to_a = np.maximum.reduceat(D.min(axis=0), starts)
        else:
            a_to_b = np.maximum.reduceat(D, starts, axis=1).min(axis=0)
            b_to_a = np.minimum.reduceat(D.max(axis=0), starts)
        out[S3][i] = np.maximum(a_to_b, b_to_a)
    for k in KINDS:
        M = out[k]
        # symmetrize exactly; the two triangle halves agree up to rounding
        M[:] = np.triu(M, 1) + np.triu(M, 1).T
    return out


def discrepancy_matrix(d: Dataset, kind: str, hausdorff_standard: bool = False) -> SimilarityMatrix:
    if kind not in KINDS:
        raise ValueError(f"unknown discrepancy {kind!r}; choose from {KINDS}")
    if d.n < 2:
        raise ValueError("need at least two sets")
    return SimilarityMatrix(-set_discrepancies(d, hausdorff_standard)[kind], kind)


def pair_discrepancy(A, B, kind: str, hausdorff_standard: bool = False) -> float:
    """Discrepancy between two candidate arrays, by direct evaluation."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    D = np.sqrt(np.sum((A[:, None, :] - B[None, :, :]) ** 2, axis=2))
    if kind == S1:
        return float(D.mean())
    if kind == S2:
        return float(D.min())
    if hausdorff_standard:
        return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
    return float(max(D.max(axis=1).min(), D.max(axis=0).min()))


def preference_value(S: np.ndarray, quantile: float) -> float:
    off = S[~np.eye(len(S), dtype=bool)]
    return float(np.quantile(off, quantile, method="linear"))


def affinity_propagation(
    S: SimilarityMatrix,
    preference_quantile: float = 0.5,
    damping: float = 0.9,
    max_iter: int = 1000,
    conv_window: int = 50,
    rng_seed: int = 0,
) -> Assignment:
    """Responsibility/availability message passing with damping.

    The self-similarity of every point is set to the given quantile of the
    off-diagonal similarities. ``info['converged']`` is False when the
    exemplar set was still changing at ``max_iter``. Exactly tied
    similarities are separated by noise at the level of machine epsilon,
    drawn from ``rng_seed``, as in the reference implementation.
    """
    if not 0 < preference_quantile < 1:
        raise ValueError("preference quantile must lie in (0, 1)")
    if not 0.5 <= damping < 1:
        raise ValueError("damping must lie in [0.5, 1)")
    M = np.array(S.values, dtype=float)
    n = len(M)
    if n == 1:
        info = {"exemplars": np.array([1]), "converged": True, "iterations": 0, "preference": 0.0}
        return Assignment([1], 1, info=info)
    pref = preference_value(M, preference_quantile)
    np.fill_diagonal(M, pref)
    if np.all(M == M[0, 0]):
        # all points interchangeable: one exemplar
        info = {"exemplars": np.array([1]), "converged": True, "iterations": 0, "preference": pref}
        return Assignment(np.ones(n, dtype=int), 1, info=info)
    noise = make_rng(rng_seed).standard_normal((n, n))
    M = M + (np.finfo(float).eps * M + np.finfo(float).tiny * 100) * noise

    R = np.zeros((n, n))
    A = np.zeros((n, n))
    rows = np.arange(n)
    last, stable, converged, it = None, 0, False, 0
    for it in range(1, max_iter + 1):
        AS = A + M
        first = np.argmax(AS, axis=1)
        best = AS[rows, first]
        AS[rows, first] = -np.inf
        second = AS.max(axis=1)
        Rnew = M - best[:, None]
        Rnew[rows, first] = M[rows, first] - second
        R = damping * R + (1 - damping) * Rnew

        Rp = np.maximum(R, 0)
        Rp[rows, rows] = R[rows, rows]
        col = Rp.sum(axis=0)
        Anew = col[None, :] - Rp
        diagA = Anew[rows, rows].copy()
        Anew = np.minimum(Anew, 0)
        Anew[rows, rows] = diagA
        A = damping * A + (1 - damping) * Anew

        ex = np.flatnonzero(np.diag(A) + np.diag(R) > 0)
        if last is not None and np.array_equal(ex, last) and ex.size > 0:
            stable += 1
        else:
            stable = 0
        last = ex
        if stable >= conv_window:
            converged = True
            break

    ex = last
    if ex is None or ex.size == 0:
        ex = np.array([int(np.argmax(np.diag(A) + np.diag(R)))])
    P = np.array(S.values, dtype=float)
    np.fill_diagonal(P, pref)
    lab = np.argmax(P[:, ex], axis=1)
    lab[ex] = np.arange(ex.size)
    # refine: within each cluster the member with the largest summed similarity becomes the exemplar
    for k in range(ex.size):
        members = np.flatnonzero(lab == k)
        ex[k] = members[int(np.argmax(P[np.ix_(members, members)].sum(axis=0)))]
    lab = np.argmax(P[:, ex], axis=1)
    lab[ex] = np.arange(ex.size)
    return Assignment(
        lab + 1, int(ex.size), info={"exemplars": ex + 1, "converged": converged, "iterations": it, "preference": pref}
    )
