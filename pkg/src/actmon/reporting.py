"""Event-log and metrics-row rendering, plus run summaries.

Event log: one line per event, ``seq,timestamp,kind,payload``. The
timestamp is logical (the number of stream inputs consumed when the event
fired): wall-clock time would break byte-identical replay. Payload is
``key=value`` pairs joined by ``;`` with ``|`` separating list items.

Metrics CSV: one row per batch with the fixed column order below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

METRICS_HEADER = (
    "batch_index,inputs_seen,queries_used,known_classes,"
    "monitor_precision,network_precision,event"
)

# event kinds
WARNING = "Warning"
QUERY = "Query"
ANSWER = "Answer"
QUERY_TIMEOUT = "QueryTimeout"
UNLABELED_WARNING = "UnlabeledWarning"
ADAPT_MONITOR = "AdaptMonitor"
ADAPT_MODEL = "AdaptModel"
RUN_START = "RunStart"


def fmt_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "|".join(fmt_value(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: int  # inputs consumed when the event fired
    kind: str
    payload: tuple[tuple[str, str], ...]

    def line(self) -> str:
        body = ";".join(f"{k}={v}" for k, v in self.payload)
        return f"{self.seq},{self.timestamp},{self.kind},{body}"


def make_event(seq: int, timestamp: int, kind: str, **payload) -> Event:
    rendered = tuple((k, fmt_value(v)) for k, v in payload.items())
    return Event(seq, timestamp, kind, rendered)


def parse_event_line(line: str) -> Event:
    seq, timestamp, kind, body = line.split(",", 3)
    payload = tuple(
        tuple(item.split("=", 1)) for item in body.split(";") if item
    )
    return Event(int(seq), int(timestamp), kind, payload)


def event_payload_dict(event: Event) -> dict[str, str]:
    return dict(event.payload)


def metrics_row(
    batch_index: int,
    inputs_seen: int,
    queries_used: int,
    known_classes: int,
    monitor_precision: float | None,
    network_precision: float | None,
    events: list[str],
) -> str:
    mp = "" if monitor_precision is None else format(monitor_precision, ".10g")
    np_ = "" if network_precision is None else format(network_precision, ".10g")
    return (
        f"{batch_index},{inputs_seen},{queries_used},{known_classes},"
        f"{mp},{np_},{';'.join(events)}"
    )


def parse_metrics_rows(text: str) -> list[dict]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != METRICS_HEADER:
        raise ValueError("missing metrics header")
    keys = METRICS_HEADER.split(",")
    rows = []
    for line in lines[1:]:
        parts = line.split(",", len(keys) - 1)
        row = dict(zip(keys, parts))
        rows.append(row)
    return rows


@dataclass(frozen=True)
class RunSummary:
    strategy: str
    runs: int
    precision_mean: float | None
    precision_std: float | None  # sample standard deviation (n-1)
    learned_classes: int
    accuracy_mean: float | None
    accuracy_std: float | None


def summarize(per_strategy_runs: dict[str, list[dict]]) -> list[RunSummary]:
    """Aggregate final metrics over repeated runs.

    Each run dict needs ``final_precision`` (may be None), ``known_classes``
    and optionally ``network_accuracy``. The +- figures are sample standard
    deviations; the class count is the highest over the runs.
    """
    out = []
    for strategy in sorted(per_strategy_runs):
        runs = per_strategy_runs[strategy]
        if not runs:
            raise ValueError("need at least one run per strategy")
        # sorted so aggregation is exactly permutation-invariant
        precisions = sorted(
            r["final_precision"] for r in runs if r["final_precision"] is not None
        )
        accuracies = sorted(
            r["network_accuracy"]
            for r in runs
            if r.get("network_accuracy") is not None
        )
        out.append(
            RunSummary(
                strategy=strategy,
                runs=len(runs),
                precision_mean=float(np.mean(precisions)) if precisions else None,
                precision_std=_sample_std(precisions),
                learned_classes=max(int(r["known_classes"]) for r in runs),
                accuracy_mean=float(np.mean(accuracies)) if accuracies else None,
                accuracy_std=_sample_std(accuracies),
            )
        )
    return out


def _sample_std(values) -> float | None:
    if not values:
        return None
    if len(values) == 1:
        return 0.0
    return float(np.std(values, ddof=1))


def summary_table(summaries: list[RunSummary]) -> str:
    """Aligned-column text table; +- is sample standard deviation."""
    header = f"{'strategy':<14} {'runs':>4} {'classes':>7} {'precision':>22} {'accuracy':>22}"
    lines = ["# +- figures are sample standard deviations (n-1)", header]
    for s in summaries:
        prec = (
            f"{s.precision_mean:.4f} +- {s.precision_std:.4f}"
            if s.precision_mean is not None
            else "n/a"
        )
        acc = (
            f"{s.accuracy_mean:.4f} +- {s.accuracy_std:.4f}"
            if s.accuracy_mean is not None
            else "n/a"
        )
        lines.append(f"{s.strategy:<14} {s.runs:>4} {s.learned_classes:>7} {prec:>22} {acc:>22}")
    return "\n".join(lines)


def summary_csv(summaries: list[RunSummary]) -> str:
    lines = ["strategy,runs,learned_classes,precision_mean,precision_std,accuracy_mean,accuracy_std"]
    for s in summaries:
        def opt(v):
            return "" if v is None else format(v, ".10g")

        lines.append(
            f"{s.strategy},{s.runs},{s.learned_classes},{opt(s.precision_mean)},"
            f"{opt(s.precision_std)},{opt(s.accuracy_mean)},{opt(s.accuracy_std)}"
        )
    return "\n".join(lines)
