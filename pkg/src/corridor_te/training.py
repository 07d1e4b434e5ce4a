"""Self-play training, frozen evaluation and parameter sweeps.

A pairing is described by two side specs (Q-learner or rule-based
baseline). Training runs one independent Q-learning loop per seed with a
linearly decaying exploration rate; reported metrics always come from a
separate frozen evaluation phase (no updates, no exploration, softmax
sampling), never from the training stream.

Everything is deterministic given (config, seed): the training and
evaluation phases use distinct seed-derived RNG streams, and all random
draws go through a single generator in a fixed order (environment reset,
per-episode phi resampling for mixed sides, then P1's action before P2's).
"""

from __future__ import annotations

import dataclasses
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from .baselines import BaselineKind, BaselineSpec, baseline_action
from .env import GridConfig, Outcome, Seat, reset, step
from .metrics import (
    EpisodeRecord,
    MetricsReport,
    SeedMetrics,
    merge_reports,
    seed_metrics,
)
from .qtable import (
    DIVISOR_FULL,
    MARGINAL_DIVISORS,
    REWARD_MODE_ENTROPY,
    REWARD_MODE_NONE,
    REWARD_MODE_TE,
    REWARD_MODES,
    SparseQTable,
    save_table,
)

MIXED_PHI_CHOICES = (0.0, 10.0, -10.0)


@dataclass(frozen=True)
class QLearnerSpec:
    """A tabular learner side: TE/entropy reward shaping with factor phi.

    ``mixed`` resamples phi uniformly from {0, +10, -10} at the start of
    every training episode.
    """

    phi: float = 0.0
    reward_mode: str = REWARD_MODE_TE
    mixed: bool = False

    def __post_init__(self) -> None:
        if self.reward_mode not in REWARD_MODES:
            raise ValueError(f"unknown reward mode {self.reward_mode!r}")


SideSpec = Union[QLearnerSpec, BaselineSpec]


def side_label(spec: SideSpec) -> str:
    if isinstance(spec, BaselineSpec):
        return {"random": "Random", "pure-sf": "Pure-SF", "ipk-sf": "IPK-SF", "pk-sf": "PK-SF"}[
            spec.kind.value
        ]
    if spec.mixed:
        return "Mixed-TE"
    suffix = "H" if spec.reward_mode == REWARD_MODE_ENTROPY else "TE"
    if spec.phi > 0:
        base = f"Pos-{suffix}"
    elif spec.phi < 0:
        base = f"Neg-{suffix}"
    else:
        base = f"Non-{suffix}"
    if spec.phi not in (0.0, 10.0, -10.0):
        base += f" (phi={spec.phi:g})"
    return base


def side_short(spec: SideSpec) -> str:
    if isinstance(spec, BaselineSpec):
        return spec.kind.value
    if spec.mixed:
        return "mixed"
    sign = "pos" if spec.phi > 0 else "neg" if spec.phi < 0 else "non"
    if spec.reward_mode == REWARD_MODE_ENTROPY:
        sign += "-h"
    if spec.phi not in (0.0, 10.0, -10.0):
        sign += f"{spec.phi:g}"
    return sign


_SIDE_NAMES = ("non", "pos", "neg", "mixed", "random", "pure-sf", "ipk-sf", "pk-sf")


def parse_side(text: str) -> SideSpec:
    """Parse one side of a pair spec: name plus optional ``(k=v,...)``.

    Examples: ``pos``, ``pos(phi=2)``, ``neg(mode=entropy)``,
    ``ipk-sf(p_know=0.9)``.
    """
    text = text.strip()
    opts: dict[str, str] = {}
    name = text
    if "(" in text:
        if not text.endswith(")"):
            raise ValueError(f"malformed side spec {text!r}")
        name, raw = text[:-1].split("(", 1)
        for part in raw.split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise ValueError(f"malformed option {part!r} in side spec {text!r}")
            k, v = part.split("=", 1)
            opts[k.strip()] = v.strip()
    name = name.strip()
    if name not in _SIDE_NAMES:
        raise ValueError(f"unknown side {name!r} (expected one of {', '.join(_SIDE_NAMES)})")
    if name in ("random", "pure-sf", "ipk-sf", "pk-sf"):
        p_know = float(opts.pop("p_know", 0.8))
        if opts:
            raise ValueError(f"unsupported options for baseline side: {sorted(opts)}")
        return BaselineSpec(kind=BaselineKind(name), p_know=p_know)
    default_phi = {"non": 0.0, "pos": 10.0, "neg": -10.0, "mixed": 0.0}[name]
    phi = float(opts.pop("phi", default_phi))
    mode = opts.pop("mode", REWARD_MODE_TE)
    if opts:
        raise ValueError(f"unsupported options for learner side: {sorted(opts)}")
    return QLearnerSpec(phi=phi, reward_mode=mode, mixed=(name == "mixed"))


def parse_pair(text: str) -> tuple[SideSpec, SideSpec]:
    """Parse ``<side>:<side>``; the colon separates P1 from P2."""
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == ":" and depth == 0:
            return parse_side(text[:i]), parse_side(text[i + 1 :])
    raise ValueError(f"pair spec {text!r} must contain a top-level ':'")


def side_to_text(spec: SideSpec) -> str:
    """Inverse of parse_side: a spec string that parses back to ``spec``."""
    if isinstance(spec, BaselineSpec):
        if spec.kind == BaselineKind.IPK_SF and spec.p_know != 0.8:
            return f"{spec.kind.value}(p_know={spec.p_know:g})"
        return spec.kind.value
    name = "mixed" if spec.mixed else ("pos" if spec.phi > 0 else "neg" if spec.phi < 0 else "non")
    default_phi = {"non": 0.0, "pos": 10.0, "neg": -10.0, "mixed": 0.0}[name]
    opts = []
    if spec.phi != default_phi:
        opts.append(f"phi={spec.phi:g}")
    if spec.reward_mode != REWARD_MODE_TE:
        opts.append(f"mode={spec.reward_mode}")
    return name + (f"({','.join(opts)})" if opts else "")


@dataclass(frozen=True)
class ExperimentConfig:
    p1: SideSpec = QLearnerSpec()
    p2: SideSpec = QLearnerSpec()
    episodes: int = 30000
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    alpha: float = 0.8
    gamma: float = 0.8
    history_len: int = 5
    eval_episodes: int = 10000
    grid: GridConfig = GridConfig()
    marginal_divisor: str = DIVISOR_FULL

    def __post_init__(self) -> None:
        if self.episodes <= 0:
            raise ValueError("episodes must be positive")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not 0 <= self.history_len <= self.grid.turns:
            raise ValueError(
                f"history length must be in [0, {self.grid.turns}], got {self.history_len}"
            )
        if self.eval_episodes < 0:
            raise ValueError("eval_episodes must be >= 0")
        if self.marginal_divisor not in MARGINAL_DIVISORS:
            raise ValueError(f"unknown marginal divisor {self.marginal_divisor!r}")

    @property
    def name(self) -> str:
        return f"{side_short(self.p1)}-vs-{side_short(self.p2)}"


def epsilon(iteration: int, max_iteration: int) -> float:
    """Linear exploration decay: 1 at the start, 0 from max_iteration on."""
    if max_iteration <= 0:
        raise ValueError(f"max_iteration must be positive, got {max_iteration}")
    return max(1.0 - iteration / max_iteration, 0.0)


def _make_table(spec: SideSpec, seat: Seat, config: ExperimentConfig) -> SparseQTable | None:
    if not isinstance(spec, QLearnerSpec):
        return None
    return SparseQTable(
        seat=seat,
        phi=spec.phi,
        reward_mode=spec.reward_mode,
        history_len=config.history_len,
        config=config.grid,
        marginal_divisor=config.marginal_divisor,
    )


SeatController = Union[SparseQTable, BaselineSpec]


def run_episode(
    p1_ctrl: SeatController,
    p2_ctrl: SeatController,
    grid: GridConfig,
    eps: float,
    rng: random.Random,
    train: bool = False,
    alpha: float = 0.8,
    gamma: float = 0.8,
    index: int = 0,
    with_info: bool = True,
) -> EpisodeRecord:
    """Play one full episode (exactly grid.turns joint moves).

    In train mode every Q-learner seat receives a TD update per step using
    its shaped reward, with TE/entropies read from the table as it stood
    when the action was selected. In eval mode exploration is forced off
    and nothing is updated. ``with_info`` controls whether per-step
    TE/entropy/reward traces are recorded (they are skipped while training
    for speed unless needed for shaping).
    """
    if not train:
        eps = 0.0
    state = reset(grid, rng)
    o1 = state.p1_objective
    o2 = state.p2_objective
    o1i = int(o1)
    o2i = int(o2)
    cols1 = [state.p1_col]
    cols2 = [state.p2_col]
    acts1: list[int] = []
    acts2: list[int] = []
    q1 = isinstance(p1_ctrl, SparseQTable)
    q2 = isinstance(p2_ctrl, SparseQTable)
    t1 = p1_ctrl if q1 else None
    t2 = p2_ctrl if q2 else None
    info1 = with_info and q1
    info2 = with_info and q2
    te1: list[float] | None = [] if info1 else None
    te2: list[float] | None = [] if info2 else None
    hp1: list[float] | None = [] if info1 else None
    hm1: list[float] | None = [] if info1 else None
    hp2: list[float] | None = [] if info2 else None
    hm2: list[float] | None = [] if info2 else None
    rew1: list[float] | None = [] if info1 else None
    rew2: list[float] | None = [] if info2 else None
    shaping1 = q1 and train and t1.phi != 0.0 and t1.reward_mode != REWARD_MODE_NONE
    shaping2 = q2 and train and t2.phi != 0.0 and t2.reward_mode != REWARD_MODE_NONE
    turns = grid.turns
    gcols = grid.cols

    ids1 = t1._ids_from(0, o1i, cols1, cols2) if q1 else None
    ids2 = t2._ids_from(0, o2i, cols2, cols1) if q2 else None
    for t in range(turns):
        if q1:
            a1 = t1._select_id(ids1[0], eps, rng)
        else:
            a1 = int(baseline_action(p1_ctrl, cols1[-1], cols2[-1], o1, o2, rng, gcols))
        if q2:
            a2 = t2._select_id(ids2[0], eps, rng)
        else:
            a2 = int(baseline_action(p2_ctrl, cols2[-1], cols1[-1], o2, o1, rng, gcols))
        state = step(state, a1, a2)
        cols1.append(state.p1_col)
        cols2.append(state.p2_col)
        acts1.append(a1)
        acts2.append(a2)
        terminal = state.turn >= turns
        if terminal:
            met = state.p1_col == state.p2_col
            out_i = 0 if met else 1
            r1 = 10.0 if out_i == o1i else -10.0
            r2 = 10.0 if out_i == o2i else -10.0
        else:
            r1 = r2 = 0.0
        if q1:
            nids1 = None if terminal else t1._ids_from(t + 1, o1i, cols1, cols2)
            if info1 or shaping1:
                h_minus, h_plus = t1._entropies_id(ids1[0], ids1[1], ids1[2])
                shaped1 = t1.shaped_from_entropies(h_minus, h_plus, r1)
                if info1:
                    te1.append(h_minus - h_plus)
                    hm1.append(h_minus)
                    hp1.append(h_plus)
                    rew1.append(shaped1)
            else:
                shaped1 = r1
            if train:
                t1._td_update_id(
                    ids1[0], ids1[1], a1, shaped1, None if nids1 is None else nids1[0], alpha, gamma
                )
            ids1 = nids1
        if q2:
            nids2 = None if terminal else t2._ids_from(t + 1, o2i, cols2, cols1)
            if info2 or shaping2:
                h_minus, h_plus = t2._entropies_id(ids2[0], ids2[1], ids2[2])
                shaped2 = t2.shaped_from_entropies(h_minus, h_plus, r2)
                if info2:
                    te2.append(h_minus - h_plus)
                    hm2.append(h_minus)
                    hp2.append(h_plus)
                    rew2.append(shaped2)
            else:
                shaped2 = r2
            if train:
                t2._td_update_id(
                    ids2[0], ids2[1], a2, shaped2, None if nids2 is None else nids2[0], alpha, gamma
                )
            ids2 = nids2

    out = Outcome.MEET if state.p1_col == state.p2_col else Outcome.PASS
    return EpisodeRecord(
        index=index,
        p1_objective=o1,
        p2_objective=o2,
        p1_cols=cols1,
        p2_cols=cols2,
        p1_actions=acts1,
        p2_actions=acts2,
        outcome=out,
        p1_success=int(out) == o1i,
        p2_success=int(out) == o2i,
        p1_te=te1,
        p2_te=te2,
        p1_h_plus=hp1,
        p1_h_minus=hm1,
        p2_h_plus=hp2,
        p2_h_minus=hm2,
        p1_rewards=rew1,
        p2_rewards=rew2,
    )


@dataclass
class SeedRun:
    """One seed's trained tables (None for rule-based seats) and train curve."""

    seed: int
    p1_table: SparseQTable | None
    p2_table: SparseQTable | None
    curve: list[tuple[int, float | None, float | None]] = field(default_factory=list)

    def controller(self, seat: Seat, config: ExperimentConfig) -> SeatController:
        table = self.p1_table if seat == Seat.P1 else self.p2_table
        if table is not None:
            return table
        spec = config.p1 if seat == Seat.P1 else config.p2
        assert isinstance(spec, BaselineSpec)
        return spec


@dataclass
class TrainedPair:
    config: ExperimentConfig
    runs: list[SeedRun]


_CURVE_WINDOW = 1000


def train_seed(config: ExperimentConfig, seed: int) -> SeedRun:
    """Train both seats for one seed; returns frozen tables and the curve."""
    rng = random.Random(f"train-{seed}")
    t1 = _make_table(config.p1, Seat.P1, config)
    t2 = _make_table(config.p2, Seat.P2, config)
    mixed1 = isinstance(config.p1, QLearnerSpec) and config.p1.mixed
    mixed2 = isinstance(config.p2, QLearnerSpec) and config.p2.mixed
    c1: SeatController = t1 if t1 is not None else config.p1  # type: ignore[assignment]
    c2: SeatController = t2 if t2 is not None else config.p2  # type: ignore[assignment]
    curve: list[tuple[int, float | None, float | None]] = []
    coll_n = coll_w = comp_n = comp1_w = 0
    if t1 is not None or t2 is not None:
        episodes = config.episodes
        for ep in range(episodes):
            eps = epsilon(ep, episodes)
            if mixed1:
                t1.phi = MIXED_PHI_CHOICES[rng.randrange(3)]
            if mixed2:
                t2.phi = MIXED_PHI_CHOICES[rng.randrange(3)]
            rec = run_episode(
                c1,
                c2,
                config.grid,
                eps,
                rng,
                train=True,
                alpha=config.alpha,
                gamma=config.gamma,
                index=ep,
                with_info=False,
            )
            if rec.collaborative:
                coll_n += 1
                coll_w += rec.p1_success
            else:
                comp_n += 1
                comp1_w += rec.p1_success
            if (ep + 1) % _CURVE_WINDOW == 0:
                curve.append(
                    (
                        ep + 1,
                        coll_w / coll_n if coll_n else None,
                        comp1_w / comp_n if comp_n else None,
                    )
                )
                coll_n = coll_w = comp_n = comp1_w = 0
    return SeedRun(seed=seed, p1_table=t1, p2_table=t2, curve=curve)


def train_pair(config: ExperimentConfig, jobs: int = 1) -> TrainedPair:
    """Independent training runs for every seed, optionally in parallel."""
    if jobs > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(train_seed, [config] * len(config.seeds), config.seeds))
    else:
        runs = [train_seed(config, s) for s in config.seeds]
    return TrainedPair(config=config, runs=runs)


def evaluate_run(
    config: ExperimentConfig,
    run: SeedRun,
    eval_episodes: int | None = None,
    on_records: Callable[[int, list[EpisodeRecord]], None] | None = None,
) -> SeedMetrics:
    """Frozen evaluation for one seed: no updates, no exploration."""
    episodes = config.eval_episodes if eval_episodes is None else eval_episodes
    rng = random.Random(f"eval-{run.seed}")
    c1 = run.controller(Seat.P1, config)
    c2 = run.controller(Seat.P2, config)
    records = [
        run_episode(c1, c2, config.grid, 0.0, rng, train=False, index=i, with_info=True)
        for i in range(episodes)
    ]
    if on_records is not None:
        on_records(run.seed, records)
    return seed_metrics(run.seed, records)


def _evaluate_worker(args: tuple[ExperimentConfig, SeedRun, int | None]) -> SeedMetrics:
    config, run, episodes = args
    return evaluate_run(config, run, episodes)


def evaluate(
    pair: TrainedPair,
    eval_episodes: int | None = None,
    jobs: int = 1,
    on_records: Callable[[int, list[EpisodeRecord]], None] | None = None,
) -> MetricsReport:
    """Frozen evaluation across all seeds, aggregated into a report."""
    config = pair.config
    if jobs > 1 and len(pair.runs) > 1 and on_records is None:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            seeds = list(
                pool.map(_evaluate_worker, [(config, run, eval_episodes) for run in pair.runs])
            )
    else:
        seeds = [evaluate_run(config, run, eval_episodes, on_records) for run in pair.runs]
    return merge_reports(config.name, side_label(config.p1), side_label(config.p2), seeds)


def snapshot_filename(experiment: str, seed: int, seat: Seat) -> str:
    return f"{experiment}-seed{seed}-{seat.name.lower()}.qtable"


def save_run(config: ExperimentConfig, run: SeedRun, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for seat, table in ((Seat.P1, run.p1_table), (Seat.P2, run.p2_table)):
        if table is None:
            continue
        path = os.path.join(out_dir, snapshot_filename(config.name, run.seed, seat))
        save_table(table, path)
        paths.append(path)
    return paths


def _experiment_worker(
    args: tuple[ExperimentConfig, int, str | None, int | None]
) -> tuple[SeedMetrics, list[tuple[int, float | None, float | None]]]:
    config, seed, out_dir, eval_episodes = args
    run = train_seed(config, seed)
    if out_dir is not None:
        save_run(config, run, out_dir)
    sm = evaluate_run(config, run, eval_episodes)
    return sm, run.curve


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | None = None,
    jobs: int = 1,
    eval_episodes: int | None = None,
) -> MetricsReport:
    """Train and evaluate every seed, writing snapshots as a side effect.

    Unlike train_pair + evaluate, tables never leave the worker process,
    which keeps memory flat when sweeping many pairings.
    """
    tasks = [(config, seed, out_dir, eval_episodes) for seed in config.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_experiment_worker, tasks))
    else:
        results = [_experiment_worker(t) for t in tasks]
    return merge_reports(
        config.name,
        side_label(config.p1),
        side_label(config.p2),
        [sm for sm, _ in results],
    )


def matchup_pair(
    tables: Sequence[SparseQTable],
    opponent: BaselineSpec,
    base: ExperimentConfig | None = None,
    seeds: Sequence[int] | None = None,
) -> TrainedPair:
    """Pair frozen per-seed tables (all from one seat) against a baseline.

    Used to evaluate already-trained agents against rule-based opponents;
    each table keeps the seat it was trained in.
    """
    if not tables:
        raise ValueError("need at least one table")
    seat = tables[0].seat
    if any(t.seat != seat for t in tables):
        raise ValueError("all tables must come from the same seat")
    first = tables[0]
    learner = QLearnerSpec(phi=first.phi, reward_mode=first.reward_mode)
    config = dataclasses.replace(
        base or ExperimentConfig(),
        p1=learner if seat == Seat.P1 else opponent,
        p2=learner if seat == Seat.P2 else opponent,
        history_len=first.history_len,
        grid=first.config,
        seeds=tuple(seeds) if seeds else tuple(range(1, len(tables) + 1)),
    )
    runs = []
    for seed, table in zip(config.seeds, tables):
        runs.append(
            SeedRun(
                seed=seed,
                p1_table=table if seat == Seat.P1 else None,
                p2_table=table if seat == Seat.P2 else None,
            )
        )
    return TrainedPair(config=config, runs=runs)


def sweep(
    base: ExperimentConfig,
    parameter: str,
    values: Sequence,
    jobs: int = 1,
    out_dir: str | None = None,
    eval_episodes: int | None = None,
) -> list[tuple[float, MetricsReport]]:
    """Train + evaluate the pairing once per parameter value.

    ``phi`` rescales the TE factor of every learner side that has a
    nonzero phi (keeping its sign); ``hist`` sets the history length.
    """
    if not values:
        raise ValueError("sweep needs at least one value")
    out = []
    for value in values:
        if parameter == "phi":
            cfg = dataclasses.replace(
                base,
                p1=_with_phi(base.p1, float(value)),
                p2=_with_phi(base.p2, float(value)),
            )
        elif parameter in ("hist", "history_len"):
            cfg = dataclasses.replace(base, history_len=int(value))
        else:
            raise ValueError(f"unknown sweep parameter {parameter!r}")
        sub_dir = None if out_dir is None else os.path.join(out_dir, f"{parameter}-{value:g}")
        report = run_experiment(cfg, out_dir=sub_dir, jobs=jobs, eval_episodes=eval_episodes)
        report.experiment = f"{cfg.name}[{parameter}={value:g}]"
        out.append((float(value), report))
    return out


def _with_phi(spec: SideSpec, magnitude: float) -> SideSpec:
    if isinstance(spec, QLearnerSpec) and spec.phi != 0.0 and not spec.mixed:
        sign = 1.0 if spec.phi > 0 else -1.0
        return dataclasses.replace(spec, phi=sign * magnitude)
    return spec


# -- experiment config files -------------------------------------------

CONFIG_KEYS = (
    "pair",
    "episodes",
    "seeds",
    "alpha",
    "gamma",
    "history",
    "eval_episodes",
    "rows",
    "cols",
    "turns",
)


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment; unknown keys rejected."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    kwargs: dict = {}
    if "pair" in mapping:
        kwargs["p1"], kwargs["p2"] = parse_pair(mapping["pair"])
    if "episodes" in mapping:
        kwargs["episodes"] = int(mapping["episodes"])
    if "seeds" in mapping:
        kwargs["seeds"] = tuple(int(s) for s in mapping["seeds"].split(",") if s.strip())
    if "alpha" in mapping:
        kwargs["alpha"] = float(mapping["alpha"])
    if "gamma" in mapping:
        kwargs["gamma"] = float(mapping["gamma"])
    if "history" in mapping:
        kwargs["history_len"] = int(mapping["history"])
    if "eval_episodes" in mapping:
        kwargs["eval_episodes"] = int(mapping["eval_episodes"])
    grid_kwargs = {}
    for key in ("rows", "cols", "turns"):
        if key in mapping:
            grid_kwargs[key] = int(mapping[key])
    if grid_kwargs:
        grid = dataclasses.replace(GridConfig(), **grid_kwargs)
        kwargs["grid"] = grid
        if "history" not in mapping:
            kwargs["history_len"] = min(5, grid.turns)
    return ExperimentConfig(**kwargs)


def config_to_text(config: ExperimentConfig, pair_text: str | None = None) -> str:
    lines = [
        f"pair = {pair_text or f'{side_to_text(config.p1)}:{side_to_text(config.p2)}'}",
        f"episodes = {config.episodes}",
        f"seeds = {','.join(map(str, config.seeds))}",
        f"alpha = {config.alpha!r}",
        f"gamma = {config.gamma!r}",
        f"history = {config.history_len}",
        f"eval_episodes = {config.eval_episodes}",
        f"rows = {config.grid.rows}",
        f"cols = {config.grid.cols}",
        f"turns = {config.grid.turns}",
    ]
    return "\n".join(lines) + "\n"
