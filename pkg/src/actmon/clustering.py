"""Per-class k-means with dynamic cluster count and box summaries.

Each cluster is summarized by the axis-aligned bounding box of its member
points: the box midpoint is the distance reference point and the box
half-widths are the normalizing radii. This makes every member sit at
normalized distance <= 1 of its own cluster, which is what ties the
cluster model to the monitor's warning threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewPoints

MAX_LLOYD_ITERATIONS = 300
DEFAULT_K_MAX = 5


@dataclass(frozen=True)
class Cluster:
    center: np.ndarray  # box midpoint
    radius: np.ndarray  # box half-widths, clamped to the radius floor
    centroid: np.ndarray  # k-means mean, kept as auxiliary data
    member_count: int

    def __post_init__(self):
        for name in ("center", "radius", "centroid"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=np.float64))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.center.shape != self.radius.shape or self.center.shape != self.centroid.shape:
            raise ValueError("center, radius, centroid must share one shape")
        if self.member_count <= 0:
            raise ValueError("clusters must have members")
        if np.any(self.radius <= 0.0):
            raise ValueError("radii must be positive after clamping")


@dataclass(frozen=True)
class ClassClusterSet:
    class_id: int
    clusters: tuple[Cluster, ...]

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        if not self.clusters:
            raise ValueError("a class needs at least one cluster")


def _sse(points: np.ndarray, centers: np.ndarray, assignments: np.ndarray) -> float:
    return float(((points - centers[assignments]) ** 2).sum())


def _assign(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # squared distances (n, k); ties go to the lowest cluster index
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers[j] = points[rng.integers(n)]
        else:
            centers[j] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    return centers


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    initial_centers: np.ndarray | None = None,
    sse_trace: list | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd iterations to an assignment fixpoint (or 300 iterations).

    Empty clusters are re-seeded to the point farthest from its assigned
    center. ``initial_centers`` warm-starts the iteration and skips the
    k-means++ seeding. ``sse_trace`` collects the per-iteration SSE for
    monotonicity checks.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1 or k > n:
        raise TooFewPoints(f"need 1 <= k <= {n}, got k={k}")

    rng = np.random.default_rng(seed)
    if initial_centers is not None:
        centers = np.array(initial_centers, dtype=np.float64, copy=True)
        if centers.shape != (k, points.shape[1]):
            raise TooFewPoints(f"warm-start centers must be ({k}, {points.shape[1]})")
    else:
        centers = _kmeanspp_init(points, k, rng)

    assignments = _assign(points, centers)
    if sse_trace is not None:
        sse_trace.append(_sse(points, centers, assignments))
    for _ in range(MAX_LLOYD_ITERATIONS):
        for j in range(k):
            members = points[assignments == j]
            if len(members):
                centers[j] = members.mean(axis=0)
            else:
                dist = ((points - centers[assignments]) ** 2).sum(axis=1)
                centers[j] = points[np.argmax(dist)]
        new_assignments = _assign(points, centers)
        if sse_trace is not None:
            sse_trace.append(_sse(points, centers, new_assignments))
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
    return assignments, centers


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    sq = (points**2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * points @ points.T
    return np.sqrt(np.clip(d2, 0.0, None))


def silhouette_score(distances: np.ndarray, assignments: np.ndarray, k: int) -> float:
    """Mean silhouette from a precomputed distance matrix.

    Points in singleton clusters score 0; with k=1 the score is 0 by
    convention.
    """
    if k <= 1:
        return 0.0
    n = len(assignments)
    scores = np.zeros(n)
    counts = np.bincount(assignments, minlength=k)
    for i in range(n):
        own = assignments[i]
        if counts[own] <= 1:
            continue
        a = distances[i][assignments == own].sum() / (counts[own] - 1)
        b = np.inf
        for j in range(k):
            if j == own or counts[j] == 0:
                continue
            b = min(b, distances[i][assignments == j].mean())
        if not np.isfinite(b):
            continue
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def choose_k(points: np.ndarray, k_max: int, seed: int) -> int:
    """Silhouette-maximizing k over [1, min(k_max, n)]; ties pick smallest."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if n < 1 or k_max < 1:
        raise TooFewPoints("need at least one point and k_max >= 1")
    upper = min(k_max, n)
    if upper == 1:
        return 1

    distances = _pairwise_distances(points)
    best_k, best_score = 1, 0.0
    for k in range(2, upper + 1):
        assignments, _ = kmeans(points, k, seed=_derive_seed(seed, k))
        score = silhouette_score(distances, assignments, k)
        if score > best_score + 1e-12:
            best_k, best_score = k, score
    return best_k


def _derive_seed(seed: int, salt: int) -> int:
    return int(np.random.SeedSequence([seed, salt]).generate_state(1)[0])


def default_radius_floor(points: np.ndarray) -> float:
    """Scale-aware clamp for degenerate box half-widths."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.size == 0:
        return 1e-6
    spread = float((points.max(axis=0) - points.min(axis=0)).max())
    return max(1e-6, 1e-6 * spread)


def build_class_clusters(
    points: np.ndarray,
    class_id: int,
    k_max: int = DEFAULT_K_MAX,
    seed: int = 0,
    radius_floor: float | None = None,
    initial_centers: np.ndarray | None = None,
) -> ClassClusterSet:
    """Cluster one class's projected valuations and box each cluster.

    ``radius_floor`` should come from the global spread of all classes'
    valuations; it defaults to this class's own spread.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] < 1:
        raise TooFewPoints("need at least one point")
    floor = default_radius_floor(points) if radius_floor is None else radius_floor

    if initial_centers is not None and len(initial_centers) <= len(points):
        k = len(initial_centers)
        assignments, centroids = kmeans(points, k, seed, initial_centers=initial_centers)
    else:
        k = choose_k(points, k_max, seed)
        assignments, centroids = kmeans(points, k, seed=_derive_seed(seed, 1_000_003))

    clusters = []
    for j in range(k):
        members = points[assignments == j]
        if len(members) == 0:
            continue
        box_min = members.min(axis=0)
        box_max = members.max(axis=0)
        center = (box_min + box_max) / 2.0
        # half-width measured from the rounded midpoint, so every member
        # sits at normalized distance <= 1 exactly, even in floating point
        radius = np.maximum(np.abs(box_max - center), np.abs(center - box_min))
        clusters.append(
            Cluster(
                center=center,
                radius=np.maximum(radius, floor),
                centroid=centroids[j],
                member_count=int(len(members)),
            )
        )
    return ClassClusterSet(class_id, tuple(clusters))
