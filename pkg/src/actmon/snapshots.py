"""Session persistence: versioned text snapshots with atomic writes.

A snapshot stores the run configuration, both networks, the monitor, the
authority-labeled samples collected at run time (inline), all statistics
and counters, and the event/metrics logs. Original training samples are
not stored: they are reproducible from the configuration (dataset paths or
synthetic parameters plus seeds), which keeps snapshots small.

Restoring rebuilds the datasets and stream from the configuration and then
overlays the saved mutable state, so a restored session continues its
event log byte-identically to an uninterrupted run.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import monitors, network as net_mod
from .authority import Authority, OracleAuthority
from .config import RunConfig, config_from_dict, config_to_dict
from .errors import CorruptSnapshot, MidAdaptation, SnapshotIoError, VersionMismatch
from .framework import (
    CollectedSample,
    Hyperparameters,
    MonitorStats,
    RandomStrategy,
    Session,
    load_train_test,
)
from .reporting import parse_event_line

SNAPSHOT_FORMAT_VERSION = 1


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _stats_block(stats: MonitorStats) -> list[str]:
    per_tp = ";".join(f"{c}={n}" for c, n in sorted(stats.per_class_tp.items()))
    per_fp = ";".join(f"{c}={n}" for c, n in sorted(stats.per_class_fp.items()))
    return [f"tp={stats.tp}", f"fp={stats.fp}", f"per_tp={per_tp}", f"per_fp={per_fp}"]


def _parse_stats_block(lines: list[str]) -> MonitorStats:
    kv = dict(line.split("=", 1) for line in lines)
    def int_map(text):
        return {
            int(k): int(v)
            for k, v in (item.split("=") for item in text.split(";") if item)
        }

    return MonitorStats(
        tp=int(kv["tp"]),
        fp=int(kv["fp"]),
        per_class_tp=int_map(kv.get("per_tp", "")),
        per_class_fp=int_map(kv.get("per_fp", "")),
    )


def session_to_text(session: Session) -> str:
    if session.mode != Session.MODE_MONITORING:
        raise MidAdaptation(f"cannot snapshot in mode {session.mode!r}")

    out: list[str] = [f"actmon-snapshot {SNAPSHOT_FORMAT_VERSION}"]

    out.append("[config]")
    out.append(json.dumps(config_to_dict(session.config), sort_keys=True))

    out.append("[hyper]")
    h = session.hyper
    out.append(
        json.dumps(
            dict(
                tau_star=h.tau_star,
                n_star=h.n_star,
                kappa_star=h.kappa_star,
                budget_fraction=h.budget_fraction,
                batch_size=h.batch_size,
                n_star_fraction=h.n_star_fraction,
            )
        )
    )

    out.append("[vocabulary]")
    out.append(" ".join(str(c) for c in session.vocabulary))

    out.append("[counters]")
    s = session.stats
    out.append(
        json.dumps(
            dict(
                budget=s.budget,
                queries_used=s.queries_used,
                collected_since_retrain=s.collected_since_retrain,
                model_adaptations=s.model_adaptations,
                monitor_adaptations=s.monitor_adaptations,
                cursor=session.cursor,
                batch_index=session.batch_index,
                seq=session._seq,
                query_counter=session._query_counter,
            )
        )
    )

    out.append("[s_samples]")
    out.append(";".join(f"{c}={n}" for c, n in sorted(s.s_samples.items())))

    out.append("[monitor_cumulative]")
    out.extend(_stats_block(s.monitor_cumulative))
    out.append("[monitor_window]")
    out.extend(_stats_block(s.monitor_window))

    out.append("[network]")
    net_lines = net_mod.network_to_lines(session.network)
    out.append(str(len(net_lines)))
    out.extend(net_lines)

    out.append("[original_network]")
    orig_lines = net_mod.network_to_lines(session.original_network)
    out.append(str(len(orig_lines)))
    out.extend(orig_lines)

    if session.strategy.uses_cluster_monitor:
        out.append("[monitor]")
        mon_lines = monitors.monitor_to_lines(session.strategy.monitor)
        out.append(str(len(mon_lines)))
        out.extend(mon_lines)

    if isinstance(session.strategy, RandomStrategy):
        out.append("[random_rng]")
        out.append(json.dumps(session.strategy.rng.bit_generator.state))

    out.append("[collected]")
    out.append(str(len(session.collected)))
    for sample in session.collected:
        pool = "1" if sample.in_eval_pool else "0"
        values = " ".join(_fmt(v) for v in sample.pixels)
        out.append(f"{sample.label} {pool} {values}")

    out.append("[pending_batch_events]")
    out.append(";".join(session._pending_batch_events))

    out.append("[events]")
    out.append(str(len(session.events)))
    out.extend(e.line() for e in session.events)

    out.append("[metrics]")
    out.append(str(len(session.metrics_rows)))
    out.extend(session.metrics_rows)

    out.append("[end]")
    return "\n".join(out) + "\n"


def save(session: Session, path) -> None:
    """Atomic snapshot write: temp file in the target directory, then rename."""
    text = session_to_text(session)
    path = Path(path)
    try:
        fd, tmp_name = tempfile.mkstemp(
            prefix=path.name + ".", suffix=".tmp", dir=path.parent
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(text)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as exc:
        raise SnapshotIoError(f"cannot write snapshot to {path}: {exc}") from exc


class _Reader:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise CorruptSnapshot("unexpected end of snapshot")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect(self, section: str) -> None:
        line = self.next()
        if line != section:
            raise CorruptSnapshot(f"expected {section}, found {line!r}")

    def block(self, n: int) -> list[str]:
        out = [self.next() for _ in range(n)]
        return out


def restore(path, authority: Authority | None = None) -> Session:
    """Rebuild a full session from a snapshot file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SnapshotIoError(f"cannot read snapshot {path}: {exc}") from exc

    reader = _Reader(text.splitlines())
    header = reader.next().split()
    if header[:1] != ["actmon-snapshot"]:
        raise CorruptSnapshot(f"not a snapshot file: {path}")
    if int(header[1]) != SNAPSHOT_FORMAT_VERSION:
        raise VersionMismatch(f"snapshot version {header[1]} unsupported")

    try:
        reader.expect("[config]")
        config = config_from_dict(json.loads(reader.next()))

        reader.expect("[hyper]")
        hyper = Hyperparameters(**json.loads(reader.next()))

        reader.expect("[vocabulary]")
        vocabulary = [int(v) for v in reader.next().split()]

        reader.expect("[counters]")
        counters = json.loads(reader.next())

        reader.expect("[s_samples]")
        s_samples = {
            int(k): int(v)
            for k, v in (item.split("=") for item in reader.next().split(";") if item)
        }

        reader.expect("[monitor_cumulative]")
        monitor_cumulative = _parse_stats_block(reader.block(4))
        reader.expect("[monitor_window]")
        monitor_window = _parse_stats_block(reader.block(4))

        reader.expect("[network]")
        network = net_mod.network_from_lines(reader.block(int(reader.next())))
        reader.expect("[original_network]")
        original_network = net_mod.network_from_lines(reader.block(int(reader.next())))

        monitor = None
        line = reader.next()
        if line == "[monitor]":
            monitor = monitors.monitor_from_lines(reader.block(int(reader.next())))
            line = reader.next()

        rng_state = None
        if line == "[random_rng]":
            rng_state = json.loads(reader.next())
            line = reader.next()

        if line != "[collected]":
            raise CorruptSnapshot(f"expected [collected], found {line!r}")
        collected = []
        for _ in range(int(reader.next())):
            fields = reader.next().split()
            label, pool = int(fields[0]), fields[1] == "1"
            pixels = np.array([float(v) for v in fields[2:]], dtype=np.float64)
            collected.append(CollectedSample(pixels, label, pool))

        reader.expect("[pending_batch_events]")
        pending = [e for e in reader.next().split(";") if e]

        reader.expect("[events]")
        events = [parse_event_line(l) for l in reader.block(int(reader.next()))]

        reader.expect("[metrics]")
        metrics_rows = reader.block(int(reader.next()))

        reader.expect("[end]")
    except (CorruptSnapshot, VersionMismatch):
        raise
    except Exception as exc:
        raise CorruptSnapshot(f"malformed snapshot {path}: {exc}") from exc

    # rebuild the deterministic scaffolding from the configuration
    base = _rebuild_base(config)
    session = Session(
        config=config,
        stream=base["stream"],
        original_network=original_network,
        strategy=make_strategy_restored(config, monitor, rng_state, base),
        base_pixels=base["base_pixels"],
        base_labels=base["base_labels"],
        vocabulary=vocabulary,
        class_names=base["class_names"],
        hyper=hyper,
        authority=authority if authority is not None else OracleAuthority(base["stream"]),
    )
    session.test_dataset = base["full_test"]
    session.network = network
    session.collected = collected
    session.cursor = counters["cursor"]
    session.batch_index = counters["batch_index"]
    session._seq = counters["seq"]
    session._query_counter = counters["query_counter"]
    session.stats.budget = counters["budget"]
    session.stats.queries_used = counters["queries_used"]
    session.stats.collected_since_retrain = counters["collected_since_retrain"]
    session.stats.model_adaptations = counters["model_adaptations"]
    session.stats.monitor_adaptations = counters["monitor_adaptations"]
    session.stats.s_samples = s_samples
    session.stats.monitor_cumulative = monitor_cumulative
    session.stats.monitor_window = monitor_window
    session.events = events
    session.metrics_rows = metrics_rows
    session._pending_batch_events = pending
    return session


def _rebuild_base(config: RunConfig) -> dict:
    """Dataset, stream, and base-X reconstruction (no training involved)."""
    from .framework import build_base_dataset, build_stream

    full_train, full_test = load_train_test(config)
    base, base_labels = build_base_dataset(config, full_train)
    stream = build_stream(config, full_train)
    return dict(
        stream=stream,
        base_pixels=base.pixels,
        base_labels=base_labels,
        class_names=full_train.class_names,
        full_test=full_test,
    )


def make_strategy_restored(config: RunConfig, monitor, rng_state, base) -> object:
    from .framework import BoxStrategy, QuantitativeStrategy, SoftmaxStrategy

    if config.strategy == "quantitative":
        return QuantitativeStrategy(monitor)
    if config.strategy == "box":
        return BoxStrategy(monitor)
    if config.strategy == "softmax":
        return SoftmaxStrategy(config.softmax_threshold)
    rng = np.random.default_rng(0)
    rng.bit_generator.state = rng_state
    return RandomStrategy(config.resolved_random_rate(), rng)
