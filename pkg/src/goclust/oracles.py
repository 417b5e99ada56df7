"""Clustering oracles: K-means, K-medoids and spherical (EII) Gaussian mixtures.

Every oracle is a pure function of ``(points, K, init_centers, cfg)`` and
returns an :class:`~goclust.types.Assignment` with 1-based labels. Ties in
nearest-center searches always go to the lowest cluster index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatch, KTooLarge
from .types import Assignment
from .uncertainty import make_rng

KMEANS = "kmeans"
KMEDOIDS = "kmedoids"
GMM_EII = "gmm_eii"
GMM_EII_BIC = "gmm_eii_bic"
ORACLE_KINDS = (KMEANS, KMEDOIDS, GMM_EII, GMM_EII_BIC)

VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class OracleConfig:
    kind: str = KMEANS
    max_iter: int = 100
    tol: float = 1e-8
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ORACLE_KINDS:
            raise ValueError(f"unknown oracle {self.kind!r}; choose from {ORACLE_KINDS}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")


def sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape (len(X), len(C))."""
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("ikj,ikj->ik", diff, diff)


def kmeans_pp(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    idx = [int(rng.integers(n))]
    d2 = sq_dists(X, X[idx]).ravel()
    for _ in range(1, K):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = int(rng.integers(n))
        idx.append(nxt)
        d2 = np.minimum(d2, sq_dists(X, X[nxt : nxt + 1]).ravel())
    return X[idx].copy()


def _check(points, K, init_centers):
    X = np.atleast_2d(np.asarray(points, dtype=float))
    n = X.shape[0]
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > n:
        raise KTooLarge(f"K={K} exceeds the number of points n={n}")
    if init_centers is not None:
        init_centers = np.atleast_2d(np.asarray(init_centers, dtype=float))
        if init_centers.shape != (K, X.shape[1]):
            raise DimensionMismatch(
                f"init_centers has shape {init_centers.shape}, expected {(K, X.shape[1])}"
            )
    return X, init_centers


def kmeans_objective(X, labels0, C) -> float:
    return float(np.sum((X - C[labels0]) ** 2))


def _lloyd(X, C, max_iter, tol):
    """Lloyd iterations from centers ``C``; returns 0-based labels, centers, objective history."""
    n, K = len(X), len(C)
    C = C.copy()
    history = []
    labels = None
    for _ in range(max_iter):
        D = sq_dists(X, C)
        new_labels = np.argmin(D, axis=1)
        counts = np.bincount(new_labels, minlength=K)
        # empty cluster repair: move the center onto the worst-fit point
        for k in np.flatnonzero(counts == 0):
            resid = D[np.arange(n), new_labels]
            movable = counts[new_labels] > 1
            if not movable.any():
                break
            resid = np.where(movable, resid, -1.0)
            i = int(np.argmax(resid))
            counts[new_labels[i]] -= 1
            new_labels[i] = k
            counts[k] = 1
            C[k] = X[i]
            D[i, :] = np.inf
            D[i, k] = 0.0
        newC = C.copy()
        for k in range(K):
            members = new_labels == k
            if members.any():
                newC[k] = X[members].mean(axis=0)
        obj = kmeans_objective(X, new_labels, newC)
        if history:
            assert obj <= history[-1] + 1e-9 * max(1.0, history[-1]), "k-means objective increased"
        history.append(obj)
        shift = np.max(np.sum((newC - C) ** 2, axis=1))
        same = labels is not None and np.array_equal(labels, new_labels)
        labels, C = new_labels, newC
        if same or shift < tol:
            break
    return labels, C, history


def kmeans(X, K, init_centers=None, cfg: OracleConfig = OracleConfig()) -> Assignment:
    X, init = _check(X, K, init_centers)
    if init is None:
        init = kmeans_pp(X, K, make_rng(cfg.rng_seed, K))
    labels, C, hist = _lloyd(X, init, cfg.max_iter, cfg.tol)
    return Assignment(labels + 1, K, centers=C, info={"objective": hist})


def _pam_build(D: np.ndarray, K: int) -> list[int]:
    n = len(D)
    medoids = [int(np.argmin(D.sum(axis=1)))]
    nearest = D[:, medoids[0]].copy()
    for _ in range(1, K):
        # total cost after adding each candidate medoid
        cost = np.minimum(nearest[:, None], D).sum(axis=0)
        cost[medoids] = np.inf
        j = int(np.argmin(cost))
        medoids.append(j)
        nearest = np.minimum(nearest, D[:, j])
    return medoids


def kmedoids(X, K, init_centers=None, cfg: OracleConfig = OracleConfig()) -> Assignment:
    """Alternating (Voronoi iteration) K-medoids on Euclidean distances."""
    X, init = _check(X, K, init_centers)
    n = len(X)
    D = np.sqrt(sq_dists(X, X))
    if init is None:
        medoids = _pam_build(D, K)
    else:
        medoids = []
        Dc = sq_dists(init, X)
        for k in range(K):
            row = Dc[k].copy()
            row[medoids] = np.inf
            medoids.append(int(np.argmin(row)))
    medoids = np.array(medoids)
    for _ in range(cfg.max_iter):
        labels = np.argmin(D[:, medoids], axis=1)
        new = medoids.copy()
        for k in range(K):
            members = np.flatnonzero(labels == k)
            if members.size == 0:
                continue
            cost = D[np.ix_(members, members)].sum(axis=1)
            best = members[int(np.argmin(cost))]
            cur = medoids[k]
            # keep the current medoid on ties to avoid cycling
            if cur in members and cost[members == cur][0] <= cost.min():
                best = cur
            new[k] = best
        if np.array_equal(new, medoids):
            break
        medoids = new
    labels = np.argmin(D[:, medoids], axis=1)
    return Assignment(labels + 1, K, centers=X[medoids], info={"medoids": medoids + 1})


def _em_eii(X, means, weights, var, max_iter, tol):
    n, q = X.shape
    history = []
    log_resp = None
    for _ in range(max_iter):
        with np.errstate(divide="ignore"):
            logw = np.log(weights)
        logp = logw[None, :] - 0.5 * q * np.log(2 * np.pi * var) - sq_dists(X, means) / (2 * var)
        norm = logsumexp(logp, axis=1)
        ll = float(norm.sum())
        if history:
            assert ll >= history[-1] - 1e-10 * max(1.0, abs(history[-1])), "EM log-likelihood decreased"
        history.append(ll)
        log_resp = logp - norm[:, None]
        if len(history) > 1 and abs(history[-1] - history[-2]) < tol * max(1.0, abs(ll)):
            break
        resp = np.exp(log_resp)
        Nk = resp.sum(axis=0)
        weights = Nk / n
        alive = Nk > 0
        means = means.copy()
        means[alive] = (resp[:, alive].T @ X) / Nk[alive, None]
        var = max(float(np.sum(resp * sq_dists(X, means)) / (n * q)), VAR_FLOOR)
    return means, weights, var, log_resp, history


def fit_gmm_eii(X, K, init_centers=None, cfg: OracleConfig = OracleConfig()):
    """EM for a K-component mixture with a shared spherical variance.

    Returns ``(Assignment, loglik)``; the assignment uses maximum-posterior
    hard labels.
    """
    X, init = _check(X, K, init_centers)
    n, q = X.shape
    if init is None:
        init = kmeans_pp(X, K, make_rng(cfg.rng_seed, K))
    labels0, means, _ = _lloyd(X, init, cfg.max_iter, cfg.tol)
    counts = np.bincount(labels0, minlength=K)
    weights = counts / n
    var = max(kmeans_objective(X, labels0, means) / (n * q), VAR_FLOOR)
    means, weights, var, log_resp, hist = _em_eii(X, means, weights, var, cfg.max_iter, cfg.tol)
    labels = np.argmax(log_resp, axis=1)
    a = Assignment(labels + 1, K, centers=means, info={"loglik": hist, "variance": var, "weights": weights})
    return a, hist[-1]


def gmm_eii(X, K, init_centers=None, cfg: OracleConfig = OracleConfig()) -> Assignment:
    return fit_gmm_eii(X, K, init_centers, cfg)[0]


def bic_eii(loglik: float, n: int, K: int, q: int) -> float:
    p = K * q + (K - 1) + 1
    return -2.0 * loglik + p * np.log(n)


def gmm_bic_select(points, K_max: int, cfg: OracleConfig = OracleConfig(), init_centers=None) -> Assignment:
    """Fit EII mixtures for K = 1..K_max and keep the lowest BIC (ties to smaller K)."""
    X, init_centers = _check(points, K_max, init_centers)
    n, q = X.shape
    best = None
    bics = []
    for K in range(1, K_max + 1):
        init = init_centers if K == K_max else None
        a, ll = fit_gmm_eii(X, K, init, cfg)
        b = bic_eii(ll, n, K, q)
        bics.append(b)
        if best is None or b < best[0]:
            best = (b, a)
    a = best[1]
    return Assignment(a.labels, a.num_clusters, centers=a.centers, info={**a.info, "bic": bics})


def oracle_cluster(points, K: int, init_centers=None, cfg: OracleConfig = OracleConfig()) -> Assignment:
    """Dispatch to the oracle named by ``cfg.kind``."""
    if cfg.kind == KMEANS:
        return kmeans(points, K, init_centers, cfg)
    if cfg.kind == KMEDOIDS:
        return kmedoids(points, K, init_centers, cfg)
    if cfg.kind == GMM_EII:
        return gmm_eii(points, K, init_centers, cfg)
    return gmm_bic_select(points, K, cfg, init_centers)
