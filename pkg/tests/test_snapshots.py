import pytest

from actmon import framework, snapshots
from actmon.config import RunConfig
from actmon.errors import CorruptSnapshot, MidAdaptation, SnapshotIoError, VersionMismatch
from actmon.reporting import summarize, summary_table


def small_config(**kw):
    config = RunConfig(
        dataset_kind="synthetic",
        synth_classes=4,
        synth_dim=4,
        synth_per_class=80,
        synth_spread=0.05,
        known_classes=(0, 1),
        hidden_layers=(12,),
        feature_layer=0,
        epochs_init=30,
        epochs_run=30,
        learning_rate=0.3,
        batch_size=32,
        p=0.1,
        n_star_fraction=0.05,
        seed=7,
    )
    for k, v in kw.items():
        setattr(config, k, v)
    return config


class TestSaveRestore:
    @pytest.mark.parametrize("strategy", ["quantitative", "box", "softmax", "random"])
    def test_interrupted_run_equals_uninterrupted(self, tmp_path, strategy):
        config = small_config(strategy=strategy)
        full = framework.create_session(config)
        full.run()

        half = framework.create_session(small_config(strategy=strategy))
        half.run(max_batches=4)
        path = tmp_path / "session.snapshot"
        snapshots.save(half, path)
        resumed = snapshots.restore(path)
        resumed.run()

        assert resumed.metrics_csv() == full.metrics_csv()
        assert resumed.event_log_text() == full.event_log_text()

    def test_unwritable_path_raises_and_leaves_session_intact(self, tmp_path):
        config = small_config()
        session = framework.create_session(config)
        session.run(max_batches=1)
        rows_before = list(session.metrics_rows)
        with pytest.raises(SnapshotIoError):
            snapshots.save(session, tmp_path / "no_such_dir" / "x.snapshot")
        assert session.metrics_rows == rows_before

    def test_version_field_present(self, tmp_path):
        session = framework.create_session(small_config())
        session.run(max_batches=1)
        path = tmp_path / "s.snapshot"
        snapshots.save(session, path)
        first = path.read_text().splitlines()[0]
        assert first == f"actmon-snapshot {snapshots.SNAPSHOT_FORMAT_VERSION}"

    def test_version_mismatch(self, tmp_path):
        session = framework.create_session(small_config())
        session.run(max_batches=1)
        path = tmp_path / "s.snapshot"
        snapshots.save(session, path)
        text = path.read_text().replace("actmon-snapshot 1", "actmon-snapshot 99", 1)
        path.write_text(text)
        with pytest.raises(VersionMismatch):
            snapshots.restore(path)

    def test_truncated_file_is_corrupt(self, tmp_path):
        session = framework.create_session(small_config())
        session.run(max_batches=2)
        path = tmp_path / "s.snapshot"
        snapshots.save(session, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[: len(lines) // 2]))
        with pytest.raises(CorruptSnapshot):
            snapshots.restore(path)

    def test_restored_thresholds_equal_saved(self, tmp_path):
        config = small_config(n_star_fraction=0.06)
        session = framework.create_session(config)
        session.run()
        assert session.stats.monitor_adaptations + session.stats.model_adaptations > 0
        path = tmp_path / "s.snapshot"
        # roll back to a monitoring-mode checkpoint mid-run instead:
        session2 = framework.create_session(small_config(n_star_fraction=0.06))
        session2.run(max_batches=6)
        snapshots.save(session2, path)
        restored = snapshots.restore(path)
        assert restored.strategy.monitor.thresholds == session2.strategy.monitor.thresholds

    def test_restored_monitor_verdicts_identical(self, tmp_path):
        import numpy as np

        from actmon import monitors, network

        session = framework.create_session(small_config())
        session.run(max_batches=4)
        path = tmp_path / "s.snapshot"
        snapshots.save(session, path)
        restored = snapshots.restore(path)
        rng = np.random.default_rng(3)
        for _ in range(50):
            probe = session._input_from_pixels(rng.random(session.stream.dataset.input_dim))
            p1 = network.classify(session.network, probe)
            p2 = network.classify(restored.network, probe)
            assert p1.class_id == p2.class_id
            v1 = monitors.verdict_quantitative(session.strategy.monitor, p1)
            v2 = monitors.verdict_quantitative(restored.strategy.monitor, p2)
            assert v1 == v2

    def test_mid_adaptation_save_rejected(self):
        session = framework.create_session(small_config())
        session.mode = framework.Session.MODE_ADAPTING_MODEL
        with pytest.raises(MidAdaptation):
            snapshots.session_to_text(session)


class TestSummarize:
    def test_single_run_zero_std(self):
        runs = {"quantitative": [dict(final_precision=0.8, known_classes=4)]}
        [s] = summarize(runs)
        assert s.precision_mean == pytest.approx(0.8)
        assert s.precision_std == 0.0
        assert s.learned_classes == 4

    def test_hand_arithmetic(self):
        runs = {
            "box": [
                dict(final_precision=0.8, known_classes=3),
                dict(final_precision=1.0, known_classes=4),
            ]
        }
        [s] = summarize(runs)
        assert s.precision_mean == pytest.approx(0.9)
        assert s.precision_std == pytest.approx(0.14142135623730953)
        assert s.learned_classes == 4

    def test_permutation_invariant(self):
        a = [
            dict(final_precision=0.7, known_classes=2),
            dict(final_precision=0.9, known_classes=3),
            dict(final_precision=0.5, known_classes=4),
        ]
        [s1] = summarize({"x": a})
        [s2] = summarize({"x": list(reversed(a))})
        assert s1 == s2

    def test_table_mentions_std_definition(self):
        runs = {"random": [dict(final_precision=0.5, known_classes=2)]}
        text = summary_table(summarize(runs))
        assert "sample standard deviation" in text
