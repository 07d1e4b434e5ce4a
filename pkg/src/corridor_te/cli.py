"""Command-line entry point: train, eval, baseline-eval, sweep, export-heatmap, serve, replay.

Pair specs use ``<side>:<side>`` with side one of non, pos, neg, mixed,
random, pure-sf, ipk-sf, pk-sf, optionally with options such as
``pos(phi=2)`` or ``neg(mode=entropy)``. Defaults resolve in the order
explicit flag > --config file > CORRIDOR_TE_* environment variable >
built-in default.
"""

from __future__ import annotations

import argparse
import dataclasses
import glob
import os
import sys

from .baselines import BaselineKind, BaselineSpec
from .env import GridConfig, Seat
from .metrics import (
    append_report_csv,
    entropy_heatmap,
    read_episode_log,
    summarize,
    verify_record,
    write_episode_log,
)
from .qtable import load_table
from .training import (
    ExperimentConfig,
    QLearnerSpec,
    SeedRun,
    TrainedPair,
    config_from_mapping,
    config_to_text,
    evaluate,
    matchup_pair,
    parse_config_text,
    parse_pair,
    run_experiment,
    snapshot_filename,
    sweep,
)

ENV_PREFIX = "CORRIDOR_TE_"


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name)


def _resolve(flag, file_value, env_name, default, cast):
    if flag is not None:
        return flag
    if file_value is not None:
        return file_value
    env_value = _env(env_name)
    if env_value is not None:
        return cast(env_value)
    return default


def _parse_seeds(text: str) -> tuple[int, ...]:
    return tuple(int(s) for s in text.split(",") if s.strip())


def _build_config(args: argparse.Namespace, require_pair: bool = True) -> ExperimentConfig:
    file_map: dict[str, str] = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            file_map = parse_config_text(fh.read())
    base = config_from_mapping(file_map) if file_map else ExperimentConfig()
    pair_text = getattr(args, "pair", None) or file_map.get("pair")
    if pair_text:
        try:
            p1, p2 = parse_pair(pair_text)
        except ValueError as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            raise SystemExit(2)
    elif require_pair:
        print("usage error: a pair spec is required (--pair or a config file with 'pair')",
              file=sys.stderr)
        raise SystemExit(2)
    else:
        p1, p2 = base.p1, base.p2
    return dataclasses.replace(
        base,
        p1=p1,
        p2=p2,
        episodes=_resolve(args.episodes, None if "episodes" not in file_map else base.episodes,
                          "EPISODES", base.episodes, int),
        seeds=_resolve(
            _parse_seeds(args.seeds) if args.seeds else None,
            None if "seeds" not in file_map else base.seeds,
            "SEEDS", base.seeds, _parse_seeds,
        ),
        alpha=_resolve(args.alpha, None if "alpha" not in file_map else base.alpha,
                       "ALPHA", base.alpha, float),
        gamma=_resolve(args.gamma, None if "gamma" not in file_map else base.gamma,
                       "GAMMA", base.gamma, float),
        history_len=_resolve(args.history, None if "history" not in file_map else base.history_len,
                             "HISTORY", base.history_len, int),
        eval_episodes=_resolve(
            args.eval_episodes, None if "eval_episodes" not in file_map else base.eval_episodes,
            "EVAL_EPISODES", base.eval_episodes, int,
        ),
    )


def _add_experiment_flags(p: argparse.ArgumentParser, with_pair: bool = True) -> None:
    if with_pair:
        p.add_argument("--pair", help="pair spec, e.g. pos:pos or non:ipk-sf")
    p.add_argument("--episodes", type=int, default=None, help="training episodes per seed")
    p.add_argument("--seeds", default=None, help='comma-separated seeds, e.g. "1,2,3"')
    p.add_argument("--alpha", type=float, default=None, help="Q-learning rate")
    p.add_argument("--gamma", type=float, default=None, help="discount factor")
    p.add_argument("--history", type=int, default=None, help="history length n")
    p.add_argument("--eval-episodes", type=int, default=None, help="frozen eval episodes per seed")
    p.add_argument("--config", default=None, help="experiment config file (flat key = value)")
    p.add_argument("--jobs", type=int, default=None, help="parallel seed workers")


def _jobs(args: argparse.Namespace) -> int:
    return _resolve(args.jobs, None, "JOBS", 1, int)


def cmd_train(args: argparse.Namespace) -> int:
    config = _build_config(args)
    report = run_experiment(config, out_dir=args.out, jobs=_jobs(args))
    if args.out:
        with open(os.path.join(args.out, "experiment.conf"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(config_to_text(config, pair_text=args.pair))
        append_report_csv(report, os.path.join(args.out, "results.csv"))
    if args.csv:
        append_report_csv(report, args.csv)
    print(summarize(report))
    return 0


def _load_pair(pair_dir: str) -> TrainedPair:
    conf_path = os.path.join(pair_dir, "experiment.conf")
    with open(conf_path, "r", encoding="utf-8") as fh:
        config = config_from_mapping(parse_config_text(fh.read()))
    runs = []
    for seed in config.seeds:
        tables = {}
        for seat, spec in ((Seat.P1, config.p1), (Seat.P2, config.p2)):
            if isinstance(spec, QLearnerSpec):
                path = os.path.join(pair_dir, snapshot_filename(config.name, seed, seat))
                tables[seat] = load_table(path)
            else:
                tables[seat] = None
        runs.append(SeedRun(seed=seed, p1_table=tables[Seat.P1], p2_table=tables[Seat.P2]))
    return TrainedPair(config=config, runs=runs)


def cmd_eval(args: argparse.Namespace) -> int:
    pair = _load_pair(args.pair_dir)
    collected: list = []
    on_records = None
    if args.episodes_out:
        on_records = lambda seed, records: collected.extend(records)  # noqa: E731
    report = evaluate(
        pair,
        eval_episodes=args.episodes,
        jobs=1 if on_records else _jobs(args),
        on_records=on_records,
    )
    if args.episodes_out:
        write_episode_log(collected, args.episodes_out)
    if args.csv:
        append_report_csv(report, args.csv)
    print(summarize(report))
    return 0


def cmd_baseline_eval(args: argparse.Namespace) -> int:
    paths = sorted(p for pattern in args.agent for p in glob.glob(pattern))
    if not paths:
        print(f"no snapshots match {args.agent}", file=sys.stderr)
        return 1
    tables = [load_table(p) for p in paths]
    baseline = BaselineSpec(BaselineKind(args.baseline))
    pair = matchup_pair(tables, baseline)
    if args.episodes:
        pair = TrainedPair(
            config=dataclasses.replace(pair.config, eval_episodes=args.episodes), runs=pair.runs
        )
    report = evaluate(pair, jobs=_jobs(args))
    if args.csv:
        append_report_csv(report, args.csv)
    print(summarize(report))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _build_config(args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    results = sweep(
        config,
        "phi" if args.param == "phi" else "hist",
        values,
        jobs=_jobs(args),
        out_dir=args.out,
    )
    for value, report in results:
        print(f"--- {args.param} = {value:g} ---")
        print(summarize(report))
        if args.csv:
            append_report_csv(report, args.csv)
    return 0


def cmd_export_heatmap(args: argparse.Namespace) -> int:
    records = read_episode_log(args.log)
    seat = Seat.P1 if args.seat.lower() == "p1" else Seat.P2
    heatmap = entropy_heatmap(records, seat)
    text = heatmap.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    records = read_episode_log(args.log)
    if not records:
        print("log is empty", file=sys.stderr)
        return 1
    grid = GridConfig()
    for record in records:
        verify_record(record, grid)
    print(f"replayed {len(records)} episodes: all outcomes verified")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import build_app
    from .service import SessionStore, discover_slots

    slots = discover_slots(args.snapshots)
    if not slots:
        print(f"no opponent slots found in {args.snapshots}", file=sys.stderr)
        return 1
    store = SessionStore(
        slots,
        log_dir=args.logs,
        default_rounds=args.rounds,
        default_timeout_ms=args.timeout_ms,
    )
    app = build_app(store, static_dir=args.static)
    print(f"serving {len(slots)} opponent slot(s) on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corridor-te",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="self-play training plus frozen evaluation")
    _add_experiment_flags(p_train)
    p_train.add_argument("--out", default=None, help="directory for snapshots, config and CSV")
    p_train.add_argument("--csv", default=None, help="extra CSV file to append results to")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="frozen evaluation of a trained pair directory")
    p_eval.add_argument("--pair-dir", required=True, help="directory written by train --out")
    p_eval.add_argument("--episodes", type=int, default=None, help="eval episodes per seed")
    p_eval.add_argument("--csv", default=None)
    p_eval.add_argument("--episodes-out", default=None, help="write eval episodes as JSON lines")
    p_eval.add_argument("--jobs", type=int, default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_base = sub.add_parser("baseline-eval", help="evaluate frozen snapshots against a baseline")
    p_base.add_argument("--agent", nargs="+", required=True, help="snapshot path(s) or glob(s)")
    p_base.add_argument(
        "--baseline", required=True, choices=["random", "pure-sf", "ipk-sf", "pk-sf"]
    )
    p_base.add_argument("--episodes", type=int, default=None)
    p_base.add_argument("--csv", default=None)
    p_base.add_argument("--jobs", type=int, default=None)
    p_base.set_defaults(func=cmd_baseline_eval)

    p_sweep = sub.add_parser("sweep", help="train/evaluate across phi or history-length values")
    _add_experiment_flags(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=["phi", "hist"])
    p_sweep.add_argument("--values", required=True, help='comma-separated values, e.g. "2,10,20"')
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--csv", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_heat = sub.add_parser("export-heatmap", help="entropy heatmap JSON from an episode log")
    p_heat.add_argument("--log", required=True)
    p_heat.add_argument("--seat", default="p1", choices=["p1", "p2"])
    p_heat.add_argument("--out", default=None)
    p_heat.set_defaults(func=cmd_export_heatmap)

    p_serve = sub.add_parser("serve", help="run the human-vs-agent game service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--snapshots", required=True, help="directory of opponent snapshots")
    p_serve.add_argument("--static", default=None, help="static web client directory")
    p_serve.add_argument("--logs", default=None, help="directory for per-session round logs")
    p_serve.add_argument("--rounds", type=int, default=100)
    p_serve.add_argument("--timeout-ms", type=int, default=5000, dest="timeout_ms")
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="re-derive and verify outcomes from an episode log")
    p_replay.add_argument("--log", required=True)
    p_replay.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
