"""Command-line entry points.

Commands: train, run, compare, serve, gen-synth, summarize. Every command
accepts --preset, --config FILE, and flags mirroring the config-file keys
(flags override the file). Each run prints its resolved configuration so
the run is reproducible from the output alone.

Exit codes: 0 success, 1 runtime error, 2 usage/configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from . import data, framework, network as net_mod, reporting, snapshots
from .config import (
    PRESETS,
    RunConfig,
    apply_preset,
    format_resolved,
    load_config_file,
    set_override,
)
from .errors import ActmonError, ConfigError


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS), help="apply a bundled preset")
    parser.add_argument("--config", help="flat key=value configuration file")
    for f in fields(RunConfig):
        parser.add_argument(f"--{f.name}", dest=f"cfg_{f.name}", metavar="VALUE")


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.preset:
        apply_preset(config, args.preset)
    if args.config:
        load_config_file(config, args.config)
    for f in fields(RunConfig):
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            set_override(config, f.name, value)
    config.validate()
    return config


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args) -> int:
    config = _resolve_config(args)
    print(format_resolved(config))
    experiment = framework.prepare_experiment(config)
    out = _out_dir(config)
    path = out / "network.txt"
    net_mod.save_network(experiment.original_network, path)
    print(f"network snapshot written to {path}")
    if experiment.initial_accuracy is not None:
        print(f"test accuracy (known classes): {experiment.initial_accuracy:.4f}")
    return 0


def cmd_run(args) -> int:
    config = _resolve_config(args)
    print(format_resolved(config))
    session = framework.create_session(config)
    session.run()
    out = _out_dir(config)
    (out / "metrics.csv").write_text(session.metrics_csv())
    (out / "events.log").write_text(session.event_log_text())
    snapshots.save(session, out / "session.snapshot")
    precision = session.stats.monitor_cumulative.precision()
    print(f"stream: {len(session.stream)} inputs, {session.batch_index} batches")
    print(f"queries: {session.stats.queries_used}/{session.stats.budget}")
    print(f"known classes: {len(session.vocabulary)} {session.vocabulary}")
    print(f"monitor precision: {'n/a' if precision is None else format(precision, '.4f')}")
    print(f"outputs in {out}")
    return 0


def cmd_compare(args) -> int:
    config = _resolve_config(args)
    print(format_resolved(config))
    sessions = framework.compare_strategies(config)
    out = _out_dir(config)
    digest = next(iter(sessions.values())).stream.order_digest()
    manifest = [f"stream_order_digest={digest}"]
    runs = {}
    for name, session in sorted(sessions.items()):
        (out / f"metrics_{name}.csv").write_text(session.metrics_csv())
        (out / f"events_{name}.log").write_text(session.event_log_text())
        manifest.append(f"{name}_stream_order_digest={session.stream.order_digest()}")
        runs[name] = [session.final_summary()]
    (out / "compare_manifest.txt").write_text("\n".join(manifest) + "\n")
    summaries = reporting.summarize(runs)
    print(reporting.summary_table(summaries))
    (out / "summary.csv").write_text(reporting.summary_csv(summaries) + "\n")
    print(f"outputs in {out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import InteractiveAuthority, SessionRunner, create_app

    config = _resolve_config(args)
    print(format_resolved(config))
    out = _out_dir(config)

    if args.resume:
        authority = (
            InteractiveAuthority(config.authority_timeout)
            if args.authority == "interactive"
            else None
        )
        session = snapshots.restore(args.resume, authority=authority)
        if authority is None:
            authority = session.authority
    else:
        if args.authority == "interactive":
            authority = InteractiveAuthority(config.authority_timeout)
        else:
            authority = None
        session = framework.create_session(config, authority=authority)
        if authority is None:
            authority = session.authority

    if args.truth_out:
        lines = ["stream_index,true_class"]
        lines += [
            f"{i},{session.stream.label_at(i)}" for i in range(len(session.stream))
        ]
        Path(args.truth_out).write_text("\n".join(lines) + "\n")
        print(f"stream ground truth written to {args.truth_out}")

    runner = SessionRunner(session, authority, autostart=args.autostart)
    app = create_app(runner)

    @app.on_event("shutdown")
    def save_on_exit():
        runner.stop()
        path = out / "session.snapshot"
        snapshots.save(session, path)
        print(f"session snapshot saved to {path}")

    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def cmd_gen_synth(args) -> int:
    dataset = data.make_synthetic_blobs(
        args.classes, args.dim, args.per_class, args.spread, args.seed
    )
    data.save_csv(dataset, args.out)
    print(f"{len(dataset)} samples, {dataset.num_classes} classes -> {args.out}")
    return 0


def cmd_summarize(args) -> int:
    runs: dict[str, list[dict]] = {}
    for path in args.paths:
        path = Path(path)
        rows = reporting.parse_metrics_rows(path.read_text())
        if not rows:
            raise ActmonError(f"{path}: no metric rows")
        final = rows[-1]
        name = path.stem
        if name.startswith("metrics_"):
            name = name[len("metrics_") :]
        # strip trailing seed/run designators so repeats group together
        name = name.rstrip("0123456789").rstrip("_-.")
        precision = float(final["monitor_precision"]) if final["monitor_precision"] else None
        runs.setdefault(name or "run", []).append(
            dict(final_precision=precision, known_classes=int(final["known_classes"]))
        )
    summaries = reporting.summarize(runs)
    print(reporting.summary_table(summaries))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actmon",
        description="Active monitoring engine for neural-network classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the static model and save its snapshot")
    _add_config_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_run = sub.add_parser("run", help="run the monitoring loop with the oracle authority")
    _add_config_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_compare = sub.add_parser("compare", help="run all four strategies on one stream")
    _add_config_flags(p_compare)
    p_compare.set_defaults(func=cmd_compare)

    p_serve = sub.add_parser("serve", help="serve a live session over HTTP")
    _add_config_flags(p_serve)
    p_serve.add_argument(
        "--authority",
        choices=("interactive", "oracle"),
        default="interactive",
        help="who answers labeling queries (default: interactive)",
    )
    p_serve.add_argument("--resume", help="restore a session snapshot before serving")
    p_serve.add_argument(
        "--autostart", action="store_true", help="start running without waiting for /control"
    )
    p_serve.add_argument(
        "--truth-out", help="write the stream's ground-truth labels to this CSV (test driver aid)"
    )
    p_serve.set_defaults(func=cmd_serve)

    p_gen = sub.add_parser("gen-synth", help="generate a synthetic blob dataset CSV")
    p_gen.add_argument("--classes", type=int, required=True)
    p_gen.add_argument("--dim", type=int, required=True)
    p_gen.add_argument("--per-class", dest="per_class", type=int, required=True)
    p_gen.add_argument("--spread", type=float, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen_synth)

    p_sum = sub.add_parser("summarize", help="aggregate metrics CSVs into a summary table")
    p_sum.add_argument("paths", nargs="+", help="metrics CSV files")
    p_sum.set_defaults(func=cmd_summarize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ActmonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
