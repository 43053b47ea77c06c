"""Minimal fully connected ReLU classifier with an observable feature layer.

The monitor consumes post-activation values of one designated hidden layer
(the feature layer). Training is plain mini-batch SGD on cross-entropy,
fully deterministic under its seed. Transfer extension freezes everything
up to and including the feature layer so the monitored feature space stays
stable across adaptations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, InputSample, LabeledSample
from .errors import EmptyDataset, MissingClassData, NotAnExtension, ShapeMismatch


@dataclass(frozen=True)
class NetworkArch:
    input_dim: int
    hidden_widths: tuple[int, ...]
    feature_layer_index: int
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if self.input_dim <= 0 or self.num_classes <= 0:
            raise ValueError("input_dim and num_classes must be positive")
        if not self.hidden_widths or any(w <= 0 for w in self.hidden_widths):
            raise ValueError("hidden widths must be positive")
        if not 0 <= self.feature_layer_index < len(self.hidden_widths):
            raise ValueError("feature_layer_index out of range")

    @property
    def feature_dim(self) -> int:
        return self.hidden_widths[self.feature_layer_index]

    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per layer, hidden layers then the output head."""
        widths = (self.input_dim, *self.hidden_widths, self.num_classes)
        return [(widths[i], widths[i + 1]) for i in range(len(widths) - 1)]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 32
    learning_rate: float = 0.05
    seed: int = 0


@dataclass(frozen=True)
class Network:
    """Weights per layer, shape (fan_out, fan_in); biases shape (fan_out,)."""

    arch: NetworkArch
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    train_config: TrainConfig

    def __post_init__(self):
        dims = self.arch.layer_dims()
        if len(self.weights) != len(dims) or len(self.biases) != len(dims):
            raise ShapeMismatch(f"expected {len(dims)} layers")
        for (fan_in, fan_out), w, b in zip(dims, self.weights, self.biases):
            if w.shape != (fan_out, fan_in) or b.shape != (fan_out,):
                raise ShapeMismatch(
                    f"layer shape {w.shape}/{b.shape} does not chain ({fan_in}->{fan_out})"
                )

    @property
    def num_layers(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class Prediction:
    class_id: int
    softmax: np.ndarray
    features: np.ndarray


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def initialize(arch: NetworkArch, config: TrainConfig) -> Network:
    """Seeded uniform init in +-sqrt(6/(fan_in+fan_out))."""
    rng = np.random.default_rng(config.seed)
    weights, biases = [], []
    for fan_in, fan_out in arch.layer_dims():
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(arch, tuple(weights), tuple(biases), config)


def _forward_batch(net: Network, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Returns post-activation values per hidden layer and the softmax rows.

    Training fast path; bitwise results may depend on the batch shape.
    """
    activations = []
    a = x
    for i in range(net.num_layers - 1):
        a = _relu(a @ net.weights[i].T + net.biases[i])
        activations.append(a)
    logits = a @ net.weights[-1].T + net.biases[-1]
    return activations, _softmax_rows(logits)


def _forward_single(net: Network, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """One-row forward pass through a batch-size-independent kernel.

    The monitor compares run-time valuations against build-time ones
    bit-for-bit, so every monitor-facing path must use this kernel: GEMM
    results vary by an ulp across batch shapes.
    """
    activations = []
    a = x
    for i in range(net.num_layers - 1):
        a = _relu(net.weights[i] @ a + net.biases[i])
        activations.append(a)
    logits = net.weights[-1] @ a + net.biases[-1]
    return activations, _softmax_rows(logits)


def classify(net: Network, sample: InputSample) -> Prediction:
    if sample.pixels.size != net.arch.input_dim:
        raise ShapeMismatch(
            f"input has {sample.pixels.size} pixels, network expects {net.arch.input_dim}"
        )
    activations, softmax = _forward_single(net, sample.pixels)
    features = activations[net.arch.feature_layer_index].copy()
    return Prediction(int(np.argmax(softmax)), softmax, features)


def observe_features(net: Network, pixels: np.ndarray) -> np.ndarray:
    """Feature-layer valuations, shape (n, feature_dim).

    Row-by-row through the single-input kernel so values are bit-identical
    to what ``classify`` sees for the same input.
    """
    x = np.atleast_2d(pixels)
    if x.shape[1] != net.arch.input_dim:
        raise ShapeMismatch(f"inputs have dim {x.shape[1]}, expected {net.arch.input_dim}")
    out = np.empty((x.shape[0], net.arch.feature_dim))
    for i in range(x.shape[0]):
        activations, _ = _forward_single(net, x[i])
        out[i] = activations[net.arch.feature_layer_index]
    return out


def _loss_and_grads(net: Network, x: np.ndarray, y: np.ndarray):
    """Mean cross-entropy and gradients for every layer."""
    n = x.shape[0]
    activations, probs = _forward_batch(net, x)
    inputs = [x] + activations  # input to layer i is inputs[i]

    eps = 1e-12
    loss = -np.mean(np.log(probs[np.arange(n), y] + eps))

    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n

    grads_w = [None] * net.num_layers
    grads_b = [None] * net.num_layers
    for i in range(net.num_layers - 1, -1, -1):
        grads_w[i] = delta.T @ inputs[i]
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ net.weights[i]) * (inputs[i] > 0.0)
    return loss, grads_w, grads_b


def _sgd(
    net: Network,
    dataset: Dataset,
    config: TrainConfig,
    trainable: set[int],
    shuffle_rng: np.random.Generator,
) -> Network:
    weights = [w.copy() for w in net.weights]
    biases = [b.copy() for b in net.biases]
    x, y = dataset.pixels, dataset.labels
    n = len(dataset)
    for _ in range(config.epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            current = replace(net, weights=tuple(weights), biases=tuple(biases))
            _, gw, gb = _loss_and_grads(current, x[idx], y[idx])
            for i in trainable:
                weights[i] -= config.learning_rate * gw[i]
                biases[i] -= config.learning_rate * gb[i]
    return replace(net, weights=tuple(weights), biases=tuple(biases))


def train(arch: NetworkArch, dataset: Dataset, config: TrainConfig) -> tuple[Network, float]:
    """Train from a seeded init; returns the network and its training accuracy."""
    if len(dataset) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    if dataset.labels.max() >= arch.num_classes:
        raise ShapeMismatch("dataset labels exceed arch.num_classes")
    if dataset.input_dim != arch.input_dim:
        raise ShapeMismatch("dataset input_dim does not match arch")

    net = initialize(arch, config)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))
    net = _sgd(net, dataset, config, set(range(net.num_layers)), shuffle_rng)
    return net, test_accuracy(net, dataset)


def test_accuracy(net: Network, dataset: Dataset) -> float:
    if len(dataset) == 0:
        raise EmptyDataset("accuracy undefined on an empty dataset")
    correct = 0
    for i in range(len(dataset)):
        _, softmax = _forward_single(net, dataset.pixels[i])
        correct += int(np.argmax(softmax)) == dataset.labels[i]
    return correct / len(dataset)


def gradient_check(net: Network, sample: LabeledSample, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    Probes a random 1% subsample of parameters (at least 10) with step 1e-5.
    """
    x = sample.input.pixels[None, :]
    y = np.array([sample.label])
    _, gw, gb = _loss_and_grads(net, x, y)

    flats = []  # (kind, layer, flat_index, analytic)
    for i in range(net.num_layers):
        for j in range(net.weights[i].size):
            flats.append(("w", i, j, gw[i].flat[j]))
        for j in range(net.biases[i].size):
            flats.append(("b", i, j, gb[i].flat[j]))

    rng = np.random.default_rng(seed)
    count = max(10, int(0.01 * len(flats)))
    picks = rng.choice(len(flats), size=min(count, len(flats)), replace=False)

    h = 1e-5
    weights = [w.copy() for w in net.weights]
    biases = [b.copy() for b in net.biases]
    probe = replace(net, weights=tuple(weights), biases=tuple(biases))

    def loss_at():
        value, _, _ = _loss_and_grads(probe, x, y)
        return value

    worst = 0.0
    for p in picks:
        kind, i, j, analytic = flats[p]
        target = weights[i] if kind == "w" else biases[i]
        original = target.flat[j]
        target.flat[j] = original + h
        plus = loss_at()
        target.flat[j] = original - h
        minus = loss_at()
        target.flat[j] = original
        numeric = (plus - minus) / (2 * h)
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6)
        worst = max(worst, err)
    return worst


def transfer_extend(
    net: Network, new_num_classes: int, dataset: Dataset, config: TrainConfig
) -> Network:
    """Head surgery for class-incremental adaptation.

    Layers up to and including the feature layer are copied unchanged and
    frozen; a fresh seeded output head of ``new_num_classes`` units replaces
    the old one, and it is trained together with any hidden layers above the
    feature layer.
    """
    old = net.arch
    if new_num_classes <= old.num_classes:
        raise NotAnExtension(f"{new_num_classes} classes is not more than {old.num_classes}")
    present = set(np.unique(dataset.labels).tolist())
    missing = sorted(set(range(new_num_classes)) - present)
    if missing:
        raise MissingClassData(f"no samples for classes {missing}")
    if dataset.input_dim != old.input_dim:
        raise ShapeMismatch("dataset input_dim does not match network")

    arch = NetworkArch(old.input_dim, old.hidden_widths, old.feature_layer_index, new_num_classes)
    head_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 2]))
    fan_in = old.hidden_widths[-1]
    bound = np.sqrt(6.0 / (fan_in + new_num_classes))
    head_w = head_rng.uniform(-bound, bound, size=(new_num_classes, fan_in))
    head_b = np.zeros(new_num_classes)

    weights = tuple(w.copy() for w in net.weights[:-1]) + (head_w,)
    biases = tuple(b.copy() for b in net.biases[:-1]) + (head_b,)
    extended = Network(arch, weights, biases, config)

    trainable = set(range(old.feature_layer_index + 1, extended.num_layers))
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 3]))
    return _sgd(extended, dataset, config, trainable, shuffle_rng)


def retrain_head(net: Network, dataset: Dataset, config: TrainConfig) -> Network:
    """Warm retrain of the unfrozen layers on the current class set."""
    if len(dataset) == 0:
        raise EmptyDataset("cannot retrain on an empty dataset")
    if dataset.labels.max() >= net.arch.num_classes:
        raise ShapeMismatch("dataset labels exceed num_classes")
    trainable = set(range(net.arch.feature_layer_index + 1, net.num_layers))
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 4]))
    return _sgd(net, dataset, config, trainable, shuffle_rng)


# --- text serialization -------------------------------------------------

NETWORK_FORMAT_VERSION = 1


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def network_to_lines(net: Network) -> list[str]:
    lines = [f"actmon-network {NETWORK_FORMAT_VERSION}"]
    a = net.arch
    lines.append(f"input_dim {a.input_dim}")
    lines.append(f"hidden {' '.join(str(w) for w in a.hidden_widths)}")
    lines.append(f"feature_layer {a.feature_layer_index}")
    lines.append(f"num_classes {a.num_classes}")
    c = net.train_config
    lines.append(f"train_config {c.epochs} {c.batch_size} {_fmt(c.learning_rate)} {c.seed}")
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        lines.append(f"layer {i} {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append(" ".join(_fmt(v) for v in row))
        lines.append(" ".join(_fmt(v) for v in b))
    return lines


def network_from_lines(lines: list[str]) -> Network:
    it = iter(lines)

    def next_fields(expected_key: str) -> list[str]:
        line = next(it)
        fields = line.split()
        if not fields or fields[0] != expected_key:
            raise ValueError(f"expected {expected_key!r}, found {line!r}")
        return fields[1:]

    header = next(it).split()
    if header[:1] != ["actmon-network"] or int(header[1]) != NETWORK_FORMAT_VERSION:
        raise ValueError(f"unsupported network format: {' '.join(header)}")
    input_dim = int(next_fields("input_dim")[0])
    hidden = tuple(int(v) for v in next_fields("hidden"))
    feature_layer = int(next_fields("feature_layer")[0])
    num_classes = int(next_fields("num_classes")[0])
    cfg = next_fields("train_config")
    config = TrainConfig(int(cfg[0]), int(cfg[1]), float(cfg[2]), int(cfg[3]))
    arch = NetworkArch(input_dim, hidden, feature_layer, num_classes)

    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(arch.layer_dims()):
        idx, rows, cols = (int(v) for v in next_fields("layer"))
        if idx != i or rows != fan_out or cols != fan_in:
            raise ValueError(f"layer {i} header mismatch")
        w = np.array(
            [[float(v) for v in next(it).split()] for _ in range(rows)], dtype=np.float64
        )
        b = np.array([float(v) for v in next(it).split()], dtype=np.float64)
        weights.append(w.reshape(rows, cols))
        biases.append(b)
    return Network(arch, tuple(weights), tuple(biases), config)


def save_network(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(network_to_lines(net)) + "\n")


def load_network(path) -> Network:
    with open(path, "r", encoding="utf-8") as f:
        return network_from_lines(f.read().splitlines())
