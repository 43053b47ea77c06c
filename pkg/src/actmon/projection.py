"""Linear PCA over feature-layer valuations.

Fitted once per monitor (re)build over all known classes jointly, so
distances stay comparable across classes. The identity projection backs
the no-preprocessing ablation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, ShapeMismatch


@dataclass(frozen=True)
class Projection:
    mean: np.ndarray
    components: np.ndarray  # (k, dim), orthonormal rows
    explained_variance: np.ndarray  # (k,), non-increasing

    def __post_init__(self):
        for name in ("mean", "components", "explained_variance"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.float64))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.components.ndim != 2 or self.components.shape[1] != self.mean.size:
            raise ShapeMismatch("components must be (k, dim) matching mean")
        if self.explained_variance.shape != (self.components.shape[0],):
            raise ShapeMismatch("explained_variance must have one entry per component")

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def input_dim(self) -> int:
        return self.mean.size


def fit_pca(vectors: np.ndarray, variance_target: float = 0.99) -> Projection:
    """Principal components retaining ``variance_target`` of total variance.

    Deterministic sign convention: the largest-magnitude entry of each
    component is made positive.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ShapeMismatch("need at least 2 vectors of equal dimension")
    if not 0.0 < variance_target <= 1.0:
        raise ValueError("variance_target must lie in (0, 1]")

    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    components = eigvecs[:, order].T

    total = eigvals.sum()
    if total <= 0.0:
        raise DegenerateData("all vectors identical; no variance to project")

    cumulative = np.cumsum(eigvals) / total
    k = int(np.searchsorted(cumulative, variance_target - 1e-12) + 1)
    k = min(k, len(eigvals))

    kept = components[:k].copy()
    for row in kept:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return Projection(mean, kept, eigvals[:k])


def transform(proj: Projection, vectors: np.ndarray) -> np.ndarray:
    """Project one vector (dim,) or a batch (n, dim) into component space.

    Rows go through the same matrix-vector kernel one at a time: batched
    GEMM results differ by an ulp across batch shapes, and monitor boxes
    are compared bit-for-bit against build-time projections.
    """
    x = np.asarray(vectors, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != proj.input_dim:
        raise ShapeMismatch(f"vector dim {x.shape[1]} != projection dim {proj.input_dim}")
    out = np.empty((x.shape[0], proj.k))
    for i in range(x.shape[0]):
        out[i] = proj.components @ (x[i] - proj.mean)
    return out[0] if single else out


def identity_projection(dim: int) -> Projection:
    if dim <= 0:
        raise ValueError("dim must be positive")
    return Projection(np.zeros(dim), np.eye(dim), np.ones(dim))
