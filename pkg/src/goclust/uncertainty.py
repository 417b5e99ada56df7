"""Empirical feature uncertainty sets.

Covariate uncertainty sets are sampled uniformly, pushed through a
transform ``f: R^d -> R^q`` and stored with a per-candidate penalty.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateDimension, DimensionMismatch, TransformFailure
from .types import BALL, BOX, CovariateUncertaintyModel, Dataset, EmpiricalFeatureSet


def make_rng(seed, *stream) -> np.random.Generator:
    """PCG64 generator keyed on ``(seed, *stream)``.

    Keying on the individual id keeps per-individual draws independent of
    the order in which individuals are processed.
    """
    key = [int(seed)] + [int(s) for s in stream]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


@dataclass(frozen=True)
class Transform:
    """A deterministic map applied row-wise to an ``(m, d)`` array."""

    func: Callable[[np.ndarray], np.ndarray]
    d: int
    q: int
    name: str = "transform"

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if z.shape[1] != self.d:
            raise DimensionMismatch(f"{self.name} expects d={self.d}, got {z.shape[1]}")
        out = np.atleast_2d(np.asarray(self.func(z), dtype=float))
        if out.shape != (z.shape[0], self.q):
            raise DimensionMismatch(f"{self.name} returned shape {out.shape}")
        return out


def identity_transform(d: int) -> Transform:
    return Transform(lambda z: z.copy(), d=d, q=d, name="identity")


# A penalty rule maps (samples (m, d), center (d,), scales (d,)) -> (m,) >= 0.
PenaltyRule = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def zero_penalty(samples, center, scales):
    return np.zeros(len(samples))


def quadratic_first_component(samples, center, scales):
    """(z_1 - center_1)^2 / (2 scale_1^2)."""
    return (samples[:, 0] - center[0]) ** 2 / (2.0 * scales[0] ** 2)


def _unit_ball(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    g = rng.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero-norm normal draw has probability zero; guard anyway
    norms[norms == 0] = 1.0
    r = rng.random(m) ** (1.0 / d)
    return g / norms * r[:, None]


def sample_covariates(model: CovariateUncertaintyModel, m: int, rng_seed) -> np.ndarray:
    """Draw ``m`` points uniformly from the covariate set.

    ``rng_seed`` may be an int or an existing ``np.random.Generator``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else make_rng(rng_seed)
    d = model.dim
    if model.kind == BOX:
        u = rng.uniform(-1.0, 1.0, size=(m, d))
        return model.center + u * model.half_widths
    u = _unit_ball(rng, m, d)
    if model.kind == BALL:
        return model.center + model.radius * u
    L = np.linalg.cholesky(model.shape_matrix)
    return model.center + np.sqrt(model.radius) * u @ L.T


def build_empirical_set(
    model: CovariateUncertaintyModel,
    f: Transform,
    pen: PenaltyRule = zero_penalty,
    m: int = 100,
    rng_seed=0,
    individual_id: int = 1,
    scales: Optional[np.ndarray] = None,
) -> EmpiricalFeatureSet:
    """Sample the covariate set and map every sample through ``f``.

    ``scales`` is the per-dimension uncertainty passed to the penalty rule;
    it defaults to the box half-widths (or ones for other set kinds).
    """
    if f.d != model.dim:
        raise DimensionMismatch(f"transform expects d={f.d}, model has d={model.dim}")
    z = sample_covariates(model, m, rng_seed)
    assert np.all(model.contains(z, slack=1e-9 * (1 + np.max(np.abs(model.center))))), "sample outside its set"
    cand = f(z)
    if not np.all(np.isfinite(cand)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(cand), axis=1))[0])
        raise TransformFailure(f"{f.name} returned a non-finite value for sample {bad + 1}")
    if scales is None:
        scales = model.half_widths if model.kind == BOX else np.ones(model.dim)
    penalties = np.asarray(pen(z, model.center, np.asarray(scales, dtype=float)), dtype=float)
    return EmpiricalFeatureSet(cand, penalties, individual_id)


def standardize(d: Dataset) -> Dataset:
    """Center and scale candidates per dimension, scale penalties to max 1.

    The pooled mean over all candidates of all individuals becomes 0 and the
    pooled mean square becomes 1. ``norm_meta`` records the cumulative map so
    that ``original = standardized * scale + shift``.
    """
    X, P, _, offsets = d.stacked()
    shift = X.mean(axis=0)
    Xc = X - shift
    scale = np.sqrt(np.mean(Xc**2, axis=0))
    if np.any(scale == 0):
        dims = [int(i) + 1 for i in np.flatnonzero(scale == 0)]
        raise DegenerateDimension(f"feature dimension(s) {dims} are constant")
    Xs = Xc / scale
    pmax = P.max()
    pscale = pmax if pmax > 0 else 1.0
    Ps = P / pscale

    prev = d.norm_meta or {}
    old_shift = np.asarray(prev.get("shift", np.zeros_like(shift)), dtype=float)
    old_scale = np.asarray(prev.get("scale", np.ones_like(scale)), dtype=float)
    meta = {
        "shift": (old_shift + old_scale * shift).tolist(),
        "scale": (old_scale * scale).tolist(),
        "penalty_scale": float(prev.get("penalty_scale", 1.0)) * float(pscale),
    }
    sets = [
        EmpiricalFeatureSet(Xs[offsets[i] : offsets[i + 1]], Ps[offsets[i] : offsets[i + 1]], s.individual_id)
        for i, s in enumerate(d.sets)
    ]
    return replace(d, sets=tuple(sets), standardized=True, norm_meta=meta)


def coverage_gap(s: EmpiricalFeatureSet, reference: np.ndarray) -> float:
    """Largest distance from a reference point to its nearest candidate."""
    reference = np.atleast_2d(np.asarray(reference, dtype=float))
    if reference.shape[0] == 0:
        raise ValueError("reference must be nonempty")
    if reference.shape[1] != s.q:
        raise DimensionMismatch(f"reference has dimension {reference.shape[1]}, set has {s.q}")
    dist, _ = cKDTree(s.candidates).query(reference, k=1)
    return float(np.max(dist))
