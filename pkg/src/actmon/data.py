"""Dataset representation and ingestion.

Supported on-disk formats:

* IDX (big-endian): image files start with magic 0x00000803 and dims
  [n, h, w]; label files with magic 0x00000801 and dims [n]. Pixels are
  unsigned bytes and get scaled to [0, 1] by /255.
* CSV (UTF-8): header ``label,p0,...,p{D-1}``, one sample per line,
  decimal reals in [0, 1].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ArityMismatch,
    BadMagic,
    CountMismatch,
    EmptyKnownSet,
    OutOfRangeValue,
    ParseError,
    TruncatedFile,
)

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049

# CSV values may stick out of [0, 1] by at most this much before clamping
# is refused and the row is rejected.
CSV_RANGE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class InputSample:
    """One unlabeled input: a flat pixel vector plus its grid shape."""

    pixels: np.ndarray
    width: int
    height: int
    channels: int = 1

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)
        if pixels.ndim != 1 or pixels.size == 0:
            raise ValueError("pixels must be a non-empty flat vector")
        if self.width * self.height * self.channels != pixels.size:
            raise ValueError(
                f"shape {self.width}x{self.height}x{self.channels} does not "
                f"match {pixels.size} pixels"
            )
        if pixels.min() < 0.0 or pixels.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")

    @property
    def input_dim(self) -> int:
        return self.pixels.size


@dataclass(frozen=True)
class LabeledSample:
    input: InputSample
    label: int

    def __post_init__(self):
        if self.label < 0:
            raise ValueError("label must be non-negative")


@dataclass(frozen=True)
class Dataset:
    """Ordered labeled samples, stored as dense arrays.

    ``pixels`` has shape (n, input_dim) with values in [0, 1]; ``labels``
    has shape (n,) with values below ``num_classes``.
    """

    pixels: np.ndarray
    labels: np.ndarray
    width: int
    height: int
    channels: int
    class_names: tuple[str, ...]

    def __post_init__(self):
        pixels = np.ascontiguousarray(np.asarray(self.pixels, dtype=np.float64))
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        pixels.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if pixels.ndim != 2:
            raise ValueError("pixels must be a 2-D array (n, input_dim)")
        if labels.shape != (pixels.shape[0],):
            raise ValueError("labels must align with pixels")
        if self.width * self.height * self.channels != pixels.shape[1]:
            raise ValueError("grid shape does not match input_dim")
        if len(self.class_names) == 0:
            raise ValueError("at least one class name required")
        if len(labels) and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValueError("labels must lie in [0, num_classes)")
        if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def input_dim(self) -> int:
        return self.pixels.shape[1]

    def __len__(self) -> int:
        return self.pixels.shape[0]

    def sample(self, i: int) -> LabeledSample:
        inp = InputSample(self.pixels[i], self.width, self.height, self.channels)
        return LabeledSample(inp, int(self.labels[i]))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.pixels[idx],
            self.labels[idx],
            self.width,
            self.height,
            self.channels,
            self.class_names,
        )


@dataclass(frozen=True)
class StreamSpec:
    """A seeded presentation order over a dataset, consumed in batches."""

    dataset: Dataset
    order: np.ndarray
    seed: int
    batch_size: int = 128

    def __post_init__(self):
        order = np.ascontiguousarray(np.asarray(self.order, dtype=np.int64))
        order.flags.writeable = False
        object.__setattr__(self, "order", order)
        n = len(self.dataset)
        if order.shape != (n,) and not (n == 0 and order.size == 0):
            raise ValueError("order must cover the dataset exactly")
        if order.size and not np.array_equal(np.sort(order), np.arange(n)):
            raise ValueError("order must be a permutation of [0, n)")
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")

    def __len__(self) -> int:
        return self.order.size

    def input_at(self, position: int) -> InputSample:
        return self.dataset.sample(int(self.order[position])).input

    def label_at(self, position: int) -> int:
        return int(self.dataset.labels[self.order[position]])

    def order_digest(self) -> str:
        """Stable hex digest of the presentation order, for run manifests."""
        import hashlib

        return hashlib.sha256(self.order.tobytes()).hexdigest()[:16]


def _read_exact(f, n: int, path, offset: int) -> bytes:
    buf = f.read(n)
    if len(buf) < n:
        raise TruncatedFile(path, offset + len(buf), n - len(buf))
    return buf


def load_idx(images_path, labels_path) -> Dataset:
    """Load an IDX image/label file pair into a Dataset."""
    images_path = Path(images_path)
    labels_path = Path(labels_path)

    with open(images_path, "rb") as f:
        header = _read_exact(f, 16, images_path, 0)
        magic, count, height, width = struct.unpack(">IIII", header)
        if magic != IDX_IMAGES_MAGIC:
            raise BadMagic(images_path, 0, IDX_IMAGES_MAGIC, magic)
        raw = _read_exact(f, count * height * width, images_path, 16)
        images = np.frombuffer(raw, dtype=np.uint8).reshape(count, height * width)

    with open(labels_path, "rb") as f:
        header = _read_exact(f, 8, labels_path, 0)
        magic, label_count = struct.unpack(">II", header)
        if magic != IDX_LABELS_MAGIC:
            raise BadMagic(labels_path, 0, IDX_LABELS_MAGIC, magic)
        if label_count != count:
            raise CountMismatch(images_path, labels_path, count, label_count)
        raw = _read_exact(f, label_count, labels_path, 8)
        labels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)

    num_classes = int(labels.max()) + 1 if count else 10
    return Dataset(
        images.astype(np.float64) / 255.0,
        labels,
        width=width,
        height=height,
        channels=1,
        class_names=tuple(str(c) for c in range(num_classes)),
    )


def load_csv(path, num_classes: int | None = None) -> Dataset:
    """Load a ``label,p0,...`` CSV file.

    ``num_classes`` overrides the max-label+1 inference.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        cols = header.split(",")
        if not cols or cols[0] != "label" or len(cols) < 2:
            raise ParseError(path, 0, 0, f"bad header {header!r}")
        for j, name in enumerate(cols[1:]):
            if name != f"p{j}":
                raise ParseError(path, 0, j + 1, f"expected column p{j}, found {name!r}")
        dim = len(cols) - 1

        labels: list[int] = []
        rows: list[np.ndarray] = []
        for row_idx, line in enumerate(f, start=1):
            fields = line.rstrip("\n").split(",")
            if len(fields) != dim + 1:
                raise ArityMismatch(path, row_idx, dim + 1, len(fields))
            try:
                label = int(fields[0])
            except ValueError:
                raise ParseError(path, row_idx, 0, f"bad label {fields[0]!r}") from None
            if label < 0:
                raise ParseError(path, row_idx, 0, f"negative label {label}")
            values = np.empty(dim, dtype=np.float64)
            for col, text in enumerate(fields[1:]):
                try:
                    v = float(text)
                except ValueError:
                    raise ParseError(path, row_idx, col + 1, f"bad number {text!r}") from None
                if v < -CSV_RANGE_TOLERANCE or v > 1.0 + CSV_RANGE_TOLERANCE:
                    raise OutOfRangeValue(path, row_idx, col + 1, v)
                values[col] = min(max(v, 0.0), 1.0)
            labels.append(label)
            rows.append(values)

    n = len(rows)
    inferred = (max(labels) + 1) if labels else 1
    k = num_classes if num_classes is not None else inferred
    if labels and max(labels) >= k:
        raise ParseError(path, 0, 0, f"labels exceed num_classes={k}")
    return Dataset(
        np.array(rows, dtype=np.float64).reshape(n, dim),
        np.array(labels, dtype=np.int64),
        width=dim,
        height=1,
        channels=1,
        class_names=tuple(str(c) for c in range(k)),
    )


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the canonical CSV format (repr-exact floats)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write("label," + ",".join(f"p{j}" for j in range(dataset.input_dim)) + "\n")
        for i in range(len(dataset)):
            vals = ",".join(repr(float(v)) for v in dataset.pixels[i])
            f.write(f"{dataset.labels[i]},{vals}\n")


@dataclass(frozen=True)
class SplitResult:
    """Known/unknown split with the dense re-index map for the known half."""

    known: Dataset
    unknown: Dataset
    # original class id -> dense index in `known`
    class_map: dict = field(default_factory=dict)


def split_known_unknown(dataset: Dataset, known: set[int]) -> SplitResult:
    """Partition by class membership.

    The known half gets labels re-indexed densely onto [0, |known|) in
    ascending original-id order; the unknown half keeps original labels so
    the authority can keep answering in the full vocabulary.
    """
    if not known:
        raise EmptyKnownSet("known class set must be non-empty")
    bad = [c for c in known if c < 0 or c >= dataset.num_classes]
    if bad:
        raise EmptyKnownSet(f"classes {bad} outside [0, {dataset.num_classes})")

    ordered = sorted(known)
    class_map = {orig: dense for dense, orig in enumerate(ordered)}
    mask = np.isin(dataset.labels, ordered)

    known_labels = np.array([class_map[c] for c in dataset.labels[mask]], dtype=np.int64)
    known_ds = Dataset(
        dataset.pixels[mask],
        known_labels,
        dataset.width,
        dataset.height,
        dataset.channels,
        tuple(dataset.class_names[c] for c in ordered),
    )
    unknown_ds = Dataset(
        dataset.pixels[~mask],
        dataset.labels[~mask],
        dataset.width,
        dataset.height,
        dataset.channels,
        dataset.class_names,
    )
    return SplitResult(known_ds, unknown_ds, class_map)


def make_synthetic_blobs(
    num_classes: int,
    dim: int,
    samples_per_class: int,
    spread: float,
    seed: int,
) -> Dataset:
    """Deterministic Gaussian blobs, one per class, squashed into [0, 1].

    Class means sit on an axis-aligned lattice with step 6*spread, so any
    two means are at least 6 standard deviations apart before squashing.
    """
    if num_classes <= 0 or dim <= 0 or samples_per_class <= 0 or spread <= 0:
        raise ValueError("all blob parameters must be positive")

    side = int(np.ceil(num_classes ** (1.0 / dim)))
    side = max(side, 2) if num_classes > 1 else 1
    means = np.zeros((num_classes, dim))
    for c in range(num_classes):
        k = c
        for d in range(dim):
            means[c, d] = (k % side) * 6.0 * spread
            k //= side

    rng = np.random.default_rng(seed)
    pixels = np.empty((num_classes * samples_per_class, dim))
    labels = np.empty(num_classes * samples_per_class, dtype=np.int64)
    for c in range(num_classes):
        lo, hi = c * samples_per_class, (c + 1) * samples_per_class
        pixels[lo:hi] = rng.normal(means[c], spread, size=(samples_per_class, dim))
        labels[lo:hi] = c

    # One global affine map so relative geometry is preserved.
    lo, hi = pixels.min(), pixels.max()
    if hi > lo:
        pixels = (pixels - lo) / (hi - lo)
    else:
        pixels = np.zeros_like(pixels)

    return Dataset(
        pixels,
        labels,
        width=dim,
        height=1,
        channels=1,
        class_names=tuple(f"blob{c}" for c in range(num_classes)),
    )


def shuffle_stream(dataset: Dataset, seed: int, batch_size: int = 128) -> StreamSpec:
    """Uniform seeded permutation of the dataset as a stream."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dataset))
    return StreamSpec(dataset, order, seed, batch_size)


def phased_stream(
    dataset: Dataset, known: set[int], seed: int, batch_size: int = 128
) -> StreamSpec:
    """Known-class inputs first, then novel ones; each phase shuffled."""
    rng = np.random.default_rng(seed)
    mask = np.isin(dataset.labels, sorted(known))
    first = rng.permutation(np.nonzero(mask)[0])
    second = rng.permutation(np.nonzero(~mask)[0])
    order = np.concatenate([first, second]) if len(dataset) else np.empty(0, dtype=np.int64)
    return StreamSpec(dataset, order, seed, batch_size)
