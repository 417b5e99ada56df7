"""Synthetic benchmark: clustered 6-d covariates observed with box uncertainty.

Covariates are Cartesian position ``p`` and velocity ``v``. The feature map
is the triple of integrals of motion (E, L, L_z) in the spherical
logarithmic potential ``Phi(p) = ln ||p||``, so members of one cluster
share features regardless of their orbital phase. Only the first position
component carries a large observational uncertainty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import SingularInput, TransformFailure
from .types import BOX, CovariateUncertaintyModel, Dataset
from .uncertainty import Transform, build_empirical_set, make_rng, quadratic_first_component

SINGULAR_RADIUS = 1e-12
MAX_RESAMPLE = 100


def toy_transform_rows(z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    p, v = z[:, :3], z[:, 3:6]
    r = np.linalg.norm(p, axis=1)
    if np.any(r <= SINGULAR_RADIUS):
        raise SingularInput("position too close to the origin")
    E = 0.5 * np.sum(v * v, axis=1) + np.log(r)
    Lvec = np.cross(p, v)
    return np.column_stack([E, np.linalg.norm(Lvec, axis=1), Lvec[:, 2]])


def toy_transform(z) -> np.ndarray:
    """(E, L, L_z) for a single 6-vector (p, v)."""
    return toy_transform_rows(np.asarray(z, dtype=float).reshape(1, 6))[0]


TOY = Transform(toy_transform_rows, d=6, q=3, name="toy_log_potential")


def cluster_sizes(K_star: int) -> list[int]:
    return [1 + (k - 1) % 10 for k in range(1, K_star + 1)]


@dataclass(frozen=True)
class GenConfig:
    K_star: int = 50
    sizes: Optional[Sequence[int]] = None  # None: 1 + ((k-1) mod 10)
    cluster_spread: float = 0.02
    sigma_major: float = 0.4
    sigma_minor: float = 1e-3
    m: int = 101
    seed: int = 1
    r_min: float = 1.0
    r_max: float = 3.0
    speed_min: float = 0.5
    speed_max: float = 1.5
    separation: float = 5.0  # in units of cluster_spread, measured in feature space

    def __post_init__(self):
        for name in ("K_star", "cluster_spread", "sigma_major", "sigma_minor", "m", "separation"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sizes is not None:
            if len(self.sizes) != self.K_star or min(self.sizes) < 1:
                raise ValueError("sizes must list K_star positive cluster sizes")
        if not 0 < self.r_min < self.r_max or not 0 < self.speed_min <= self.speed_max:
            raise ValueError("invalid centroid ranges")

    @property
    def cluster_size_list(self) -> list[int]:
        return list(self.sizes) if self.sizes is not None else cluster_sizes(self.K_star)

    @property
    def n(self) -> int:
        return sum(self.cluster_size_list)


def _unit_vectors(rng, k):
    g = rng.standard_normal((k, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def draw_centroids(cfg: GenConfig) -> np.ndarray:
    """K* centroids (p, v) whose feature images are pairwise well separated."""
    rng = make_rng(cfg.seed, 0)
    min_dist = cfg.separation * cfg.cluster_spread
    out, feats = [], []
    attempts = 0
    while len(out) < cfg.K_star:
        attempts += 1
        if attempts > 1000 * cfg.K_star:
            raise RuntimeError("could not place well-separated centroids; lower `separation`")
        u = rng.random()
        r = (cfg.r_min**3 + u * (cfg.r_max**3 - cfg.r_min**3)) ** (1 / 3)
        p = r * _unit_vectors(rng, 1)[0]
        v = rng.uniform(cfg.speed_min, cfg.speed_max) * _unit_vectors(rng, 1)[0]
        z = np.concatenate([p, v])
        f = toy_transform(z)
        if feats and np.min(np.linalg.norm(np.array(feats) - f, axis=1)) <= min_dist:
            continue
        out.append(z)
        feats.append(f)
    return np.array(out)


def uncertainty_scales(z_true: np.ndarray, cfg: GenConfig) -> np.ndarray:
    sigma = np.full(6, cfg.sigma_minor)
    sigma[0] = cfg.sigma_major * abs(z_true[0]) + cfg.sigma_major * 0.1
    return sigma


def generate_dataset(cfg: GenConfig = GenConfig(), return_truth: bool = False):
    """Build a labelled dataset of empirical feature uncertainty sets.

    With ``return_truth=True`` also returns a dict holding the true and
    observed covariates, the per-individual uncertainty scales and the true
    features.
    """
    centroids = draw_centroids(cfg)
    sizes = cfg.cluster_size_list
    labels = np.repeat(np.arange(1, cfg.K_star + 1), sizes)
    sets, z_true_all, z_obs_all, sig_all = [], [], [], []
    for i, k in enumerate(labels, start=1):
        rng = make_rng(cfg.seed, 1, i)
        for _ in range(MAX_RESAMPLE):
            z_true = centroids[k - 1] + cfg.cluster_spread * rng.standard_normal(6)
            sigma = uncertainty_scales(z_true, cfg)
            z_obs = z_true + sigma * rng.standard_normal(6)
            model = CovariateUncertaintyModel(BOX, z_obs, half_widths=2 * sigma)
            try:
                s = build_empirical_set(
                    model, TOY, quadratic_first_component, cfg.m, rng, individual_id=i, scales=sigma
                )
            except TransformFailure:
                continue
            break
        else:
            raise SingularInput(f"individual {i}: transform singular after {MAX_RESAMPLE} draws")
        sets.append(s)
        z_true_all.append(z_true)
        z_obs_all.append(z_obs)
        sig_all.append(sigma)
    d = Dataset(tuple(sets), true_labels=labels, seed=cfg.seed)
    if not return_truth:
        return d
    z_true_all = np.array(z_true_all)
    truth = {
        "z_true": z_true_all,
        "z_obs": np.array(z_obs_all),
        "sigma": np.array(sig_all),
        "features_true": toy_transform_rows(z_true_all),
        "centroids": centroids,
    }
    return d, truth
