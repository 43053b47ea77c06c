"""Monitoring strategies over feature-space cluster boxes.

The quantitative monitor scores a prediction by the distance of its
feature-layer valuation to the predicted class's cluster boxes:

    distance(p, B) = max_i |c_i - p_i| / r_i        (single box)
    distance(p, y) = min over the class's boxes     (class score)

and warns when the score exceeds the class threshold d*(y), which starts
at 1 and only ever grows. The qualitative box monitor is the special case
with the threshold pinned at 1; softmax and random warners are the two
baselines.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import clustering, projection as proj_mod
from .clustering import ClassClusterSet, Cluster
from .errors import ClassAlreadyKnown, NotAWarningCase, ShapeMismatch, UnknownClass
from .network import Prediction
from .projection import Projection

INITIAL_THRESHOLD = 1.0
SOFTMAX_DEFAULT_THRESHOLD = 0.9


@dataclass(frozen=True)
class Verdict:
    warning: bool
    confidence: float | None = None


@dataclass(frozen=True)
class QuantitativeMonitor:
    projection: Projection
    class_models: dict[int, ClassClusterSet]
    thresholds: dict[int, float]
    radius_floor: float

    def __post_init__(self):
        if set(self.class_models) != set(self.thresholds):
            raise ValueError("class_models and thresholds must cover the same classes")
        if any(t < INITIAL_THRESHOLD for t in self.thresholds.values()):
            raise ValueError("thresholds never drop below their initial value 1")

    @property
    def known_classes(self) -> list[int]:
        return sorted(self.class_models)


@dataclass
class MonitorStats:
    """Warning outcomes resolved by the authority: TP = prediction was wrong."""

    tp: int = 0
    fp: int = 0
    per_class_tp: dict[int, int] = field(default_factory=dict)
    per_class_fp: dict[int, int] = field(default_factory=dict)

    def record(self, predicted_class: int, correct_warning: bool) -> None:
        if correct_warning:
            self.tp += 1
            self.per_class_tp[predicted_class] = self.per_class_tp.get(predicted_class, 0) + 1
        else:
            self.fp += 1
            self.per_class_fp[predicted_class] = self.per_class_fp.get(predicted_class, 0) + 1

    def precision(self) -> float | None:
        total = self.tp + self.fp
        return self.tp / total if total else None

    def copy(self) -> "MonitorStats":
        return MonitorStats(self.tp, self.fp, dict(self.per_class_tp), dict(self.per_class_fp))


def distance_to_cluster(p: np.ndarray, cluster: Cluster) -> float:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != cluster.center.shape:
        raise ShapeMismatch(f"point dim {p.shape} != cluster dim {cluster.center.shape}")
    return float(np.max(np.abs(cluster.center - p) / cluster.radius))


def distance_to_class(p: np.ndarray, class_id: int, monitor: QuantitativeMonitor) -> float:
    model = monitor.class_models.get(class_id)
    if model is None:
        raise UnknownClass(f"class {class_id} not known to the monitor")
    return min(distance_to_cluster(p, cluster) for cluster in model.clusters)


def _projected_distance(monitor: QuantitativeMonitor, prediction: Prediction) -> float:
    p = proj_mod.transform(monitor.projection, prediction.features)
    return distance_to_class(p, prediction.class_id, monitor)


def verdict_quantitative(monitor: QuantitativeMonitor, prediction: Prediction) -> Verdict:
    threshold = monitor.thresholds.get(prediction.class_id)
    if threshold is None:
        raise UnknownClass(f"class {prediction.class_id} not known to the monitor")
    d = _projected_distance(monitor, prediction)
    return Verdict(warning=d > threshold, confidence=d)


def verdict_box(monitor: QuantitativeMonitor, prediction: Prediction) -> Verdict:
    """Qualitative special case: outside every box of the class, i.e. d > 1."""
    d = _projected_distance(monitor, prediction)
    return Verdict(warning=d > INITIAL_THRESHOLD, confidence=None)


def verdict_softmax(prediction: Prediction, threshold: float = SOFTMAX_DEFAULT_THRESHOLD) -> Verdict:
    score = float(np.max(prediction.softmax))
    return Verdict(warning=score < threshold, confidence=score)


def verdict_random(rate: float, rng: np.random.Generator) -> Verdict:
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    return Verdict(warning=bool(rng.random() < rate), confidence=None)


def adapt_threshold(
    monitor: QuantitativeMonitor,
    class_id: int,
    observed_distance: float,
    s_samples: int,
    n_star: int,
) -> QuantitativeMonitor:
    """Raise d*(y) after a false warning at distance ``observed_distance``.

    New threshold: d* + (d - d*) * n*/s_samples. The factor shrinks as more
    samples of the class accumulate, so early false warnings move the
    threshold more than late ones.
    """
    current = monitor.thresholds.get(class_id)
    if current is None:
        raise UnknownClass(f"class {class_id} not known to the monitor")
    if observed_distance <= current:
        raise NotAWarningCase(
            f"distance {observed_distance} did not exceed threshold {current}"
        )
    if s_samples < 1:
        raise ValueError("s_samples must be >= 1")
    updated = dict(monitor.thresholds)
    updated[class_id] = current + (observed_distance - current) * (n_star / s_samples)
    return replace(monitor, thresholds=updated)


def adapt_centers(
    monitor: QuantitativeMonitor, class_id: int, feature_vectors: np.ndarray, seed: int = 0
) -> QuantitativeMonitor:
    """Re-fit one class's clusters to its full current data.

    Lloyd is warm-started from the existing centroids (k stays fixed), the
    projection is untouched, and all thresholds are preserved.
    """
    model = monitor.class_models.get(class_id)
    if model is None:
        raise UnknownClass(f"class {class_id} not known to the monitor")
    points = proj_mod.transform(monitor.projection, np.atleast_2d(feature_vectors))
    if points.shape[0] == 0:
        raise ValueError("need data to adapt to")
    warm = np.array([c.centroid for c in model.clusters])
    rebuilt = clustering.build_class_clusters(
        points,
        class_id,
        seed=seed,
        radius_floor=monitor.radius_floor,
        initial_centers=warm,
    )
    models = dict(monitor.class_models)
    models[class_id] = rebuilt
    return replace(monitor, class_models=models)


def build_monitor_from_valuations(
    valuations_by_class: dict[int, np.ndarray],
    variance_target: float = 0.99,
    k_max: int = clustering.DEFAULT_K_MAX,
    seed: int = 0,
    use_pca: bool = True,
) -> QuantitativeMonitor:
    """Fresh monitor: shared projection, per-class boxes, thresholds at 1."""
    if not valuations_by_class:
        raise ValueError("need at least one class")
    stacked = np.vstack([valuations_by_class[c] for c in sorted(valuations_by_class)])
    if use_pca:
        projection = proj_mod.fit_pca(stacked, variance_target)
    else:
        projection = proj_mod.identity_projection(stacked.shape[1])

    projected_all = proj_mod.transform(projection, stacked)
    floor = clustering.default_radius_floor(projected_all)

    models: dict[int, ClassClusterSet] = {}
    thresholds: dict[int, float] = {}
    for class_id in sorted(valuations_by_class):
        points = proj_mod.transform(projection, np.atleast_2d(valuations_by_class[class_id]))
        models[class_id] = clustering.build_class_clusters(
            points,
            class_id,
            k_max=k_max,
            seed=clustering._derive_seed(seed, class_id),
            radius_floor=floor,
        )
        thresholds[class_id] = INITIAL_THRESHOLD
    return QuantitativeMonitor(projection, models, thresholds, floor)


def extend_monitor(
    monitor: QuantitativeMonitor,
    valuations_by_class: dict[int, np.ndarray],
    new_classes: set[int],
    variance_target: float = 0.99,
    k_max: int = clustering.DEFAULT_K_MAX,
    seed: int = 0,
    use_pca: bool = True,
) -> QuantitativeMonitor:
    """Teach the monitor new classes from a retrained network's valuations.

    The projection is re-fitted over all classes jointly and every class is
    rebuilt against it; existing thresholds carry over, new classes start
    at 1.
    """
    already = new_classes & set(monitor.class_models)
    if already:
        raise ClassAlreadyKnown(f"classes {sorted(already)} already known")
    missing = set(monitor.class_models) - set(valuations_by_class)
    if missing or any(len(valuations_by_class[c]) == 0 for c in new_classes):
        raise ValueError("need non-empty valuations for every class, old and new")

    fresh = build_monitor_from_valuations(
        valuations_by_class, variance_target, k_max, seed, use_pca
    )
    thresholds = {
        c: (monitor.thresholds[c] if c in monitor.thresholds else INITIAL_THRESHOLD)
        for c in fresh.class_models
    }
    return replace(fresh, thresholds=thresholds)


# --- text serialization -------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _vec_line(prefix: str, values) -> str:
    return prefix + " " + " ".join(_fmt(v) for v in values)


def monitor_to_lines(monitor: QuantitativeMonitor) -> list[str]:
    proj = monitor.projection
    lines = [f"monitor k {proj.k} dim {proj.input_dim} floor {_fmt(monitor.radius_floor)}"]
    lines.append(_vec_line("mean", proj.mean))
    for row in proj.components:
        lines.append(_vec_line("component", row))
    lines.append(_vec_line("explained", proj.explained_variance))
    lines.append(f"classes {len(monitor.class_models)}")
    for class_id in sorted(monitor.class_models):
        model = monitor.class_models[class_id]
        lines.append(
            f"class {class_id} threshold {_fmt(monitor.thresholds[class_id])} "
            f"clusters {len(model.clusters)}"
        )
        for cluster in model.clusters:
            lines.append(f"members {cluster.member_count}")
            lines.append(_vec_line("center", cluster.center))
            lines.append(_vec_line("radius", cluster.radius))
            lines.append(_vec_line("centroid", cluster.centroid))
    return lines


def monitor_from_lines(lines: list[str]) -> QuantitativeMonitor:
    from .projection import Projection

    it = iter(lines)

    def floats(line: str, prefix: str) -> np.ndarray:
        fields = line.split()
        if fields[0] != prefix:
            raise ValueError(f"expected {prefix!r}, found {line!r}")
        return np.array([float(v) for v in fields[1:]], dtype=np.float64)

    header = next(it).split()
    k, dim, floor = int(header[2]), int(header[4]), float(header[6])
    mean = floats(next(it), "mean")
    components = np.array([floats(next(it), "component") for _ in range(k)])
    explained = floats(next(it), "explained")
    projection = Projection(mean, components.reshape(k, dim), explained)

    n_classes = int(next(it).split()[1])
    class_models: dict[int, ClassClusterSet] = {}
    thresholds: dict[int, float] = {}
    for _ in range(n_classes):
        fields = next(it).split()
        class_id, threshold, n_clusters = int(fields[1]), float(fields[3]), int(fields[5])
        clusters = []
        for _ in range(n_clusters):
            members = int(next(it).split()[1])
            center = floats(next(it), "center")
            radius = floats(next(it), "radius")
            centroid = floats(next(it), "centroid")
            clusters.append(Cluster(center, radius, centroid, members))
        class_models[class_id] = ClassClusterSet(class_id, tuple(clusters))
        thresholds[class_id] = threshold
    return QuantitativeMonitor(projection, class_models, thresholds, floor)
