"""Shared domain types.

All public interfaces use 1-based cluster labels and 1-based candidate
indices. Arrays are stored as read-only numpy arrays so instances can be
shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import BadLabel, DimensionMismatch, EmptySet, InvalidModel


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


BOX, BALL, ELLIPSOID = "box", "ball", "ellipsoid"


@dataclass(frozen=True)
class CovariateUncertaintyModel:
    """A covariate uncertainty set around ``center``.

    box:       |z_l - center_l| <= half_widths_l
    ball:      ||z - center||_2 <= radius
    ellipsoid: (z - center)^T shape_matrix^{-1} (z - center) <= radius
    """

    kind: str
    center: np.ndarray
    half_widths: Optional[np.ndarray] = None
    radius: Optional[float] = None
    shape_matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        center = _frozen(self.center)
        if center.ndim != 1 or center.size == 0:
            raise InvalidModel("center must be a nonempty vector")
        if not np.all(np.isfinite(center)):
            raise InvalidModel("center must be finite")
        object.__setattr__(self, "center", center)
        d = center.size

        if self.kind == BOX:
            if self.half_widths is None or self.radius is not None or self.shape_matrix is not None:
                raise InvalidModel("box model takes half_widths only")
            hw = _frozen(self.half_widths)
            if hw.shape != (d,):
                raise InvalidModel(f"half_widths must have shape ({d},)")
            if not np.all(hw > 0) or not np.all(np.isfinite(hw)):
                raise InvalidModel("half_widths must be finite and > 0")
            object.__setattr__(self, "half_widths", hw)
        elif self.kind == BALL:
            if self.radius is None or self.half_widths is not None or self.shape_matrix is not None:
                raise InvalidModel("ball model takes radius only")
            if not (np.isfinite(self.radius) and self.radius > 0):
                raise InvalidModel("radius must be finite and > 0")
            object.__setattr__(self, "radius", float(self.radius))
        elif self.kind == ELLIPSOID:
            if self.radius is None or self.shape_matrix is None or self.half_widths is not None:
                raise InvalidModel("ellipsoid model takes shape_matrix and radius (level)")
            if not (np.isfinite(self.radius) and self.radius > 0):
                raise InvalidModel("ellipsoid level must be finite and > 0")
            S = _frozen(self.shape_matrix)
            if S.shape != (d, d):
                raise InvalidModel(f"shape_matrix must be {d}x{d}")
            if np.max(np.abs(S - S.T)) > 1e-9:
                raise InvalidModel("shape_matrix must be symmetric")
            try:
                np.linalg.cholesky(S)
            except np.linalg.LinAlgError as exc:
                raise InvalidModel("shape_matrix must be positive definite") from exc
            object.__setattr__(self, "radius", float(self.radius))
            object.__setattr__(self, "shape_matrix", S)
        else:
            raise InvalidModel(f"unknown model kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, z: np.ndarray, slack: float = 0.0) -> np.ndarray:
        """Boolean membership for each row of ``z``."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        diff = z - self.center
        if self.kind == BOX:
            return np.all(np.abs(diff) <= self.half_widths + slack, axis=1)
        if self.kind == BALL:
            return np.linalg.norm(diff, axis=1) <= self.radius + slack
        sol = np.linalg.solve(self.shape_matrix, diff.T).T
        return np.einsum("ij,ij->i", diff, sol) <= self.radius + slack


@dataclass(frozen=True)
class EmpiricalFeatureSet:
    """m_i transformed candidates of one individual, with penalties."""

    candidates: np.ndarray
    penalties: np.ndarray
    individual_id: int = 1

    def __post_init__(self):
        cand = _frozen(self.candidates)
        if cand.ndim == 1:
            cand = _frozen(cand.reshape(-1, 1))
        if cand.ndim != 2 or cand.shape[0] == 0:
            raise EmptySet(f"individual {self.individual_id}: no candidates")
        if not np.all(np.isfinite(cand)):
            raise ValueError(f"individual {self.individual_id}: non-finite candidate")
        pen = _frozen(self.penalties)
        if pen.shape != (cand.shape[0],):
            raise DimensionMismatch(
                f"individual {self.individual_id}: {pen.size} penalties for {cand.shape[0]} candidates"
            )
        if np.any(pen < 0) or not np.all(np.isfinite(pen)):
            raise ValueError(f"individual {self.individual_id}: penalties must be finite and >= 0")
        object.__setattr__(self, "candidates", cand)
        object.__setattr__(self, "penalties", pen)
        object.__setattr__(self, "individual_id", int(self.individual_id))

    @property
    def m(self) -> int:
        return self.candidates.shape[0]

    @property
    def q(self) -> int:
        return self.candidates.shape[1]


@dataclass(frozen=True)
class Dataset:
    sets: tuple
    true_labels: Optional[np.ndarray] = None
    standardized: bool = False
    norm_meta: Optional[dict] = None
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        if self.true_labels is not None:
            object.__setattr__(self, "true_labels", _frozen(self.true_labels, dtype=np.int64))

    @property
    def n(self) -> int:
        return len(self.sets)

    @property
    def feature_dim(self) -> int:
        return self.sets[0].q

    @property
    def K_star(self) -> Optional[int]:
        if self.true_labels is None:
            return None
        return int(self.true_labels.max())

    @property
    def sizes(self) -> np.ndarray:
        return np.array([s.m for s in self.sets], dtype=np.int64)

    def stacked(self):
        """(all candidates, all penalties, owner index per row, offsets)."""
        X = np.vstack([s.candidates for s in self.sets])
        P = np.concatenate([s.penalties for s in self.sets])
        owner = np.repeat(np.arange(self.n), self.sizes)
        offsets = np.concatenate([[0], np.cumsum(self.sizes)])
        return X, P, owner, offsets


def validate_dataset(d: Dataset) -> None:
    """Raise if any invariant of ``d`` is violated."""
    if d.n < 1:
        raise EmptySet("dataset has no individuals")
    q = None
    for s in d.sets:
        if s.m < 1:
            raise EmptySet(f"individual {s.individual_id} has no candidates")
        if q is None:
            q = s.q
        elif s.q != q:
            raise DimensionMismatch(
                f"individual {s.individual_id} has feature dimension {s.q}, expected {q}"
            )
    if d.true_labels is not None:
        lab = d.true_labels
        if lab.shape != (d.n,):
            raise BadLabel(f"{lab.size} true labels for {d.n} individuals")
        if lab.size and lab.min() < 1:
            raise BadLabel("true labels are 1-based; found label < 1")


@dataclass(frozen=True)
class Assignment:
    labels: np.ndarray
    num_clusters: int
    selected: Optional[np.ndarray] = None
    centers: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        labels = _frozen(self.labels, dtype=np.int64)
        K = int(self.num_clusters)
        if labels.size and (labels.min() < 1 or labels.max() > K):
            raise BadLabel(f"labels must lie in 1..{K}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_clusters", K)
        if self.selected is not None:
            sel = _frozen(self.selected, dtype=np.int64)
            if sel.size and sel.min() < 1:
                raise BadLabel("selected candidate indices are 1-based")
            object.__setattr__(self, "selected", sel)
        if self.centers is not None:
            object.__setattr__(self, "centers", _frozen(self.centers))

    @property
    def n_nonempty(self) -> int:
        return int(np.unique(self.labels).size)


@dataclass(frozen=True)
class IterationRecord:
    t: int
    K: int
    labels: np.ndarray
    selected: np.ndarray
    objective: float
    n_changed_labels: int
    n_changed_candidates: int
    Xi: Optional[np.ndarray] = None


@dataclass
class GocTrace:
    iterations: list = field(default_factory=list)
    converged: bool = False

    @property
    def total_iterations(self) -> int:
        return len(self.iterations)

    def append(self, rec: IterationRecord) -> None:
        if self.iterations and rec.t <= self.iterations[-1].t:
            raise ValueError("iteration numbers must increase")
        self.iterations.append(rec)


def relabel_consecutive(labels: Sequence[int]) -> np.ndarray:
    """Map arbitrary labels onto 1..K in order of first appearance."""
    labels = np.asarray(labels)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inv].astype(np.int64) + 1


def as_meta(d: Dataset) -> dict[str, Any]:
    return {
        "n": d.n,
        "q": d.feature_dim,
        "K_star": d.K_star,
        "seed": d.seed,
        "standardized": d.standardized,
        "norm_meta": d.norm_meta,
    }
