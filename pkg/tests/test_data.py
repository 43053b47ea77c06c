import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actmon import data
from actmon.errors import (
    ArityMismatch,
    BadMagic,
    CountMismatch,
    EmptyKnownSet,
    OutOfRangeValue,
    ParseError,
    TruncatedFile,
)


def write_idx_pair(tmp_path, images, labels, h, w):
    img_path = tmp_path / "images.idx"
    lbl_path = tmp_path / "labels.idx"
    with open(img_path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(images), h, w))
        for img in images:
            f.write(bytes(img))
    with open(lbl_path, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(bytes(labels))
    return img_path, lbl_path


class TestLoadIdx:
    def test_hand_built_scaling(self, tmp_path):
        # two 3x3 images with extreme byte values must scale to exactly 0.0/1.0
        img0 = [0] * 9
        img1 = [255] * 9
        img_path, lbl_path = write_idx_pair(tmp_path, [img0, img1], [0, 1], 3, 3)
        ds = data.load_idx(img_path, lbl_path)
        assert len(ds) == 2
        assert ds.width == 3 and ds.height == 3
        np.testing.assert_array_equal(ds.pixels[0], np.zeros(9))
        np.testing.assert_array_equal(ds.pixels[1], np.ones(9))
        assert list(ds.labels) == [0, 1]

    def test_empty_file(self, tmp_path):
        img_path, lbl_path = write_idx_pair(tmp_path, [], [], 3, 3)
        ds = data.load_idx(img_path, lbl_path)
        assert len(ds) == 0

    def test_bad_magic_names_file_and_offset(self, tmp_path):
        img_path, lbl_path = write_idx_pair(tmp_path, [[0] * 4], [1], 2, 2)
        img_path.write_bytes(struct.pack(">IIII", 1234, 1, 2, 2) + bytes(4))
        with pytest.raises(BadMagic) as exc:
            data.load_idx(img_path, lbl_path)
        assert str(img_path) in str(exc.value)
        assert "offset 0" in str(exc.value)

    def test_count_mismatch(self, tmp_path):
        img_path, lbl_path = write_idx_pair(tmp_path, [[0] * 4], [1], 2, 2)
        with open(lbl_path, "wb") as f:
            f.write(struct.pack(">II", 2049, 2))
            f.write(bytes([1, 0]))
        with pytest.raises(CountMismatch):
            data.load_idx(img_path, lbl_path)

    def test_truncated_names_offset(self, tmp_path):
        img_path, lbl_path = write_idx_pair(tmp_path, [[7] * 4], [1], 2, 2)
        img_path.write_bytes(img_path.read_bytes()[:-2])
        with pytest.raises(TruncatedFile) as exc:
            data.load_idx(img_path, lbl_path)
        assert str(img_path) in str(exc.value)

    def test_mnist_train_files(self):
        import os
        from pathlib import Path

        root = Path(os.environ.get("MNIST_DATA_DIR", "data/mnist"))
        images = root / "train-images-idx3-ubyte"
        labels = root / "train-labels-idx1-ubyte"
        if not (images.exists() and labels.exists()):
            pytest.skip("MNIST IDX files not available in this environment")
        ds = data.load_idx(images, labels)
        assert len(ds) == 60_000
        assert ds.num_classes == 10
        assert ds.width == 28 and ds.height == 28


class TestLoadCsv:
    def test_num_classes_inferred(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("label,p0,p1\n0,0.5,0.25\n1,1.0,0.0\n0,0.1,0.9\n")
        ds = data.load_csv(path)
        assert ds.num_classes == 2
        assert len(ds) == 3

    def test_arity_mismatch_names_row(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("label,p0,p1\n0,0.5,0.25\n1,1.0\n")
        with pytest.raises(ArityMismatch) as exc:
            data.load_csv(path)
        assert "row 2" in str(exc.value)

    def test_round_trip_byte_identical(self, tmp_path):
        ds = data.make_synthetic_blobs(2, 3, 5, 0.1, seed=3)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        data.save_csv(ds, first)
        data.save_csv(data.load_csv(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("label,p0\n0,1.5\n")
        with pytest.raises(OutOfRangeValue):
            data.load_csv(path)

    def test_tiny_overshoot_clamped(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("label,p0\n0,1.0000000000005\n")
        ds = data.load_csv(path)
        assert ds.pixels[0, 0] == 1.0

    def test_bad_header(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("label,x0\n0,0.5\n")
        with pytest.raises(ParseError):
            data.load_csv(path)

    def test_num_classes_override(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("label,p0\n0,0.5\n")
        assert data.load_csv(path, num_classes=7).num_classes == 7


class TestSplitKnownUnknown:
    def test_counting_oracle_toy(self):
        pixels = np.linspace(0, 1, 12).reshape(6, 2)
        labels = np.array([0, 1, 2, 1, 1, 0])
        ds = data.Dataset(pixels, labels, 2, 1, 1, ("a", "b", "c"))
        split = data.split_known_unknown(ds, {1})
        # brute-force count
        assert len(split.known) == sum(1 for v in labels if v == 1)
        assert len(split.unknown) == sum(1 for v in labels if v != 1)
        assert set(split.known.labels.tolist()) == {0}
        assert split.class_map == {1: 0}
        # unknown half keeps original ids
        assert set(split.unknown.labels.tolist()) == {0, 2}

    def test_all_known_leaves_empty_remainder(self):
        ds = data.make_synthetic_blobs(3, 2, 4, 0.1, seed=0)
        split = data.split_known_unknown(ds, {0, 1, 2})
        assert len(split.unknown) == 0
        assert len(split.known) == len(ds)

    def test_empty_known_set(self):
        ds = data.make_synthetic_blobs(2, 2, 4, 0.1, seed=0)
        with pytest.raises(EmptyKnownSet):
            data.split_known_unknown(ds, set())

    def test_partition_properties(self):
        ds = data.make_synthetic_blobs(4, 3, 10, 0.1, seed=5)
        split = data.split_known_unknown(ds, {1, 3})
        assert len(split.known) + len(split.unknown) == len(ds)
        # dense reindex map is a bijection onto [0, |known|)
        assert sorted(split.class_map.values()) == list(range(2))
        assert split.known.num_classes == 2

    @given(
        labels=st.lists(st.integers(0, 4), min_size=1, max_size=30),
        known=st.sets(st.integers(0, 4), min_size=1, max_size=5),
    )
    @settings(max_examples=40, deadline=None)
    def test_partition_property_random(self, labels, known):
        n = len(labels)
        ds = data.Dataset(
            np.zeros((n, 2)), np.array(labels), 2, 1, 1, tuple("abcde")
        )
        split = data.split_known_unknown(ds, known)
        assert len(split.known) + len(split.unknown) == n
        assert all(l in known for l in (sorted(known)[d] for d in split.known.labels))


class TestSyntheticBlobs:
    def test_deterministic(self):
        a = data.make_synthetic_blobs(2, 2, 10, 0.1, seed=42)
        b = data.make_synthetic_blobs(2, 2, 10, 0.1, seed=42)
        np.testing.assert_array_equal(a.pixels, b.pixels)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_nearest_mean_oracle(self):
        ds = data.make_synthetic_blobs(4, 2, 100, 0.05, seed=7)
        means = np.array([ds.pixels[ds.labels == c].mean(axis=0) for c in range(4)])
        d2 = ((ds.pixels[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
        predicted = d2.argmin(axis=1)
        assert (predicted == ds.labels).mean() >= 0.99

    def test_single_class(self):
        ds = data.make_synthetic_blobs(1, 3, 5, 0.1, seed=0)
        assert set(ds.labels.tolist()) == {0}

    def test_values_in_unit_interval(self):
        ds = data.make_synthetic_blobs(5, 3, 50, 0.3, seed=9)
        assert ds.pixels.min() >= 0.0 and ds.pixels.max() <= 1.0


class TestShuffleStream:
    def test_empty(self):
        ds = data.Dataset(np.zeros((0, 2)), np.zeros(0, dtype=int), 2, 1, 1, ("a",))
        stream = data.shuffle_stream(ds, seed=1)
        assert len(stream) == 0

    def test_same_seed_identical(self):
        ds = data.make_synthetic_blobs(2, 2, 50, 0.1, seed=0)
        s1 = data.shuffle_stream(ds, seed=11)
        s2 = data.shuffle_stream(ds, seed=11)
        np.testing.assert_array_equal(s1.order, s2.order)

    def test_different_seeds_differ(self):
        ds = data.make_synthetic_blobs(2, 2, 50, 0.1, seed=0)
        s1 = data.shuffle_stream(ds, seed=1)
        s2 = data.shuffle_stream(ds, seed=2)
        assert not np.array_equal(s1.order, s2.order)

    def test_order_is_permutation(self):
        ds = data.make_synthetic_blobs(3, 2, 20, 0.1, seed=0)
        stream = data.shuffle_stream(ds, seed=4)
        np.testing.assert_array_equal(np.sort(stream.order), np.arange(len(ds)))

    def test_phased_stream_orders_known_first(self):
        ds = data.make_synthetic_blobs(3, 2, 10, 0.1, seed=0)
        stream = data.phased_stream(ds, {0}, seed=3)
        labels = [stream.label_at(i) for i in range(len(stream))]
        first_novel = labels.index(next(l for l in labels if l != 0))
        assert all(l == 0 for l in labels[:first_novel])
        assert all(l != 0 for l in labels[first_novel:])
