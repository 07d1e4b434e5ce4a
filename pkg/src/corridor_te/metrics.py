"""Success rates, information metrics, heatmaps and report serialisation.

Everything here aggregates over immutable ``EpisodeRecord`` logs, so the
functions are pure and shardable. Rates with an empty denominator are
reported as ``None`` (and serialised as empty CSV cells) rather than 0,
which would silently bias small evaluation runs.
"""

from __future__ import annotations

import json
import os
import statistics
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple, Sequence

from .env import (
    ACTION_NAMES,
    ACTIONS_BY_NAME,
    OBJECTIVE_NAMES,
    OBJECTIVES_BY_NAME,
    OUTCOME_NAMES,
    OUTCOMES_BY_NAME,
    GridConfig,
    Objective,
    Outcome,
    Seat,
    clamp_col,
)

BSRP_RANDOM = 0.8  # pass rate of two uniform-random players
BSRM_RANDOM = 0.2  # meet rate of two uniform-random players


@dataclass
class EpisodeRecord:
    """Everything observed in one episode, per seat.

    Column lists include the start column, so they are one longer than the
    action lists. The information lists (TE, entropies, rewards) are
    per-step and ``None`` for seats that do not have a policy distribution
    (rule-based baselines and humans).
    """

    index: int
    p1_objective: Objective
    p2_objective: Objective
    p1_cols: list[int]
    p2_cols: list[int]
    p1_actions: list[int]
    p2_actions: list[int]
    outcome: Outcome
    p1_success: bool
    p2_success: bool
    p1_te: list[float] | None = None
    p2_te: list[float] | None = None
    p1_h_plus: list[float] | None = None
    p1_h_minus: list[float] | None = None
    p2_h_plus: list[float] | None = None
    p2_h_minus: list[float] | None = None
    p1_rewards: list[float] | None = None
    p2_rewards: list[float] | None = None
    forced: list[bool] | None = None

    @property
    def collaborative(self) -> bool:
        return self.p1_objective == self.p2_objective

    def objective(self, seat: Seat) -> Objective:
        return self.p1_objective if seat == Seat.P1 else self.p2_objective

    def success(self, seat: Seat) -> bool:
        return self.p1_success if seat == Seat.P1 else self.p2_success

    def cols(self, seat: Seat) -> list[int]:
        return self.p1_cols if seat == Seat.P1 else self.p2_cols

    def actions(self, seat: Seat) -> list[int]:
        return self.p1_actions if seat == Seat.P1 else self.p2_actions

    def te(self, seat: Seat) -> list[float] | None:
        return self.p1_te if seat == Seat.P1 else self.p2_te

    def h_plus(self, seat: Seat) -> list[float] | None:
        return self.p1_h_plus if seat == Seat.P1 else self.p2_h_plus

    def h_minus(self, seat: Seat) -> list[float] | None:
        return self.p1_h_minus if seat == Seat.P1 else self.p2_h_minus

    def to_json(self) -> str:
        doc: dict = {
            "episode": self.index,
            "p1_objective": OBJECTIVE_NAMES[self.p1_objective],
            "p2_objective": OBJECTIVE_NAMES[self.p2_objective],
            "p1_cols": self.p1_cols,
            "p2_cols": self.p2_cols,
            "p1_actions": [ACTION_NAMES[a] for a in self.p1_actions],
            "p2_actions": [ACTION_NAMES[a] for a in self.p2_actions],
            "outcome": OUTCOME_NAMES[self.outcome],
            "p1_success": self.p1_success,
            "p2_success": self.p2_success,
        }
        for name in (
            "p1_te",
            "p2_te",
            "p1_h_plus",
            "p1_h_minus",
            "p2_h_plus",
            "p2_h_minus",
            "p1_rewards",
            "p2_rewards",
            "forced",
        ):
            value = getattr(self, name)
            if value is not None:
                doc[name] = value
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "EpisodeRecord":
        doc = json.loads(line)
        return cls(
            index=doc["episode"],
            p1_objective=OBJECTIVES_BY_NAME[doc["p1_objective"]],
            p2_objective=OBJECTIVES_BY_NAME[doc["p2_objective"]],
            p1_cols=list(doc["p1_cols"]),
            p2_cols=list(doc["p2_cols"]),
            p1_actions=[int(ACTIONS_BY_NAME[a]) for a in doc["p1_actions"]],
            p2_actions=[int(ACTIONS_BY_NAME[a]) for a in doc["p2_actions"]],
            outcome=OUTCOMES_BY_NAME[doc["outcome"]],
            p1_success=doc["p1_success"],
            p2_success=doc["p2_success"],
            p1_te=doc.get("p1_te"),
            p2_te=doc.get("p2_te"),
            p1_h_plus=doc.get("p1_h_plus"),
            p1_h_minus=doc.get("p1_h_minus"),
            p2_h_plus=doc.get("p2_h_plus"),
            p2_h_minus=doc.get("p2_h_minus"),
            p1_rewards=doc.get("p1_rewards"),
            p2_rewards=doc.get("p2_rewards"),
            forced=doc.get("forced"),
        )


def write_episode_log(records: Iterable[EpisodeRecord], destination: str | IO[str]) -> None:
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            write_episode_log(records, fh)
        return
    for rec in records:
        destination.write(rec.to_json() + "\n")


def read_episode_log(source: str | IO[str]) -> list[EpisodeRecord]:
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return read_episode_log(fh)
    return [EpisodeRecord.from_json(line) for line in source if line.strip()]


def verify_record(record: EpisodeRecord, config: GridConfig) -> None:
    """Replay a record through the transition rules and check every field."""
    for seat in (Seat.P1, Seat.P2):
        cols = record.cols(seat)
        actions = record.actions(seat)
        if len(cols) != len(actions) + 1:
            raise ValueError(f"episode {record.index}: column/action length mismatch")
        for t, a in enumerate(actions):
            expected = clamp_col(cols[t] + (int(a) - 1), config.cols)
            if cols[t + 1] != expected:
                raise ValueError(
                    f"episode {record.index}: {seat.name} column at turn {t + 1} "
                    f"is {cols[t + 1]}, replay gives {expected}"
                )
    met = record.p1_cols[-1] == record.p2_cols[-1]
    expected_outcome = Outcome.MEET if met else Outcome.PASS
    if record.outcome != expected_outcome:
        raise ValueError(f"episode {record.index}: outcome does not match final columns")
    for seat in (Seat.P1, Seat.P2):
        expected_success = int(record.outcome) == int(record.objective(seat))
        if record.success(seat) != expected_success:
            raise ValueError(f"episode {record.index}: {seat.name} success flag is wrong")


class Rates(NamedTuple):
    srcp: float | None
    srcl: float | None
    srp: float | None
    srm: float | None


def _ratio(hits: int, total: int) -> float | None:
    return None if total == 0 else hits / total


def success_rates(records: Sequence[EpisodeRecord], seat: Seat) -> Rates:
    """(SRCP, SRCL, SRP, SRM) for one seat over an episode log."""
    if not records:
        raise ValueError("empty episode log")
    comp_n = comp_w = coll_n = coll_w = 0
    pass_n = pass_w = meet_n = meet_w = 0
    for rec in records:
        won = rec.success(seat)
        if rec.collaborative:
            coll_n += 1
            coll_w += won
        else:
            comp_n += 1
            comp_w += won
        if rec.objective(seat) == Objective.PASS:
            pass_n += 1
            pass_w += won
        else:
            meet_n += 1
            meet_w += won
    return Rates(
        srcp=_ratio(comp_w, comp_n),
        srcl=_ratio(coll_w, coll_n),
        srp=_ratio(pass_w, pass_n),
        srm=_ratio(meet_w, meet_n),
    )


def cps(
    srp1: float,
    srm1: float,
    srp2: float,
    srm2: float,
    bsrp: float = BSRP_RANDOM,
    bsrm: float = BSRM_RANDOM,
) -> float:
    """Collective performance score: baseline-weighted mix of both seats' rates."""
    for r in (srp1, srm1, srp2, srm2, bsrp, bsrm):
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"rates must be in [0, 1], got {r}")
    half1 = (1.0 - bsrp) * srp1 + (1.0 - bsrm) * srm1
    half2 = (1.0 - bsrp) * srp2 + (1.0 - bsrm) * srm2
    return 0.5 * half1 + 0.5 * half2


def _step_mean(records: Sequence[EpisodeRecord], seat: Seat, attr: str) -> float | None:
    total = 0.0
    n = 0
    for rec in records:
        values = getattr(rec, attr)(seat)
        if values is None:
            continue
        total += sum(values)
        n += len(values)
    return None if n == 0 else total / n


def averaged_te(records: Sequence[EpisodeRecord], seat: Seat) -> float | None:
    """Mean per-step transfer entropy (bits) for one seat; None if unrecorded."""
    return _step_mean(records, seat, "te")


def averaged_entropies(
    records: Sequence[EpisodeRecord], seat: Seat
) -> tuple[float | None, float | None]:
    """(mean H with opponent history, mean H without), bits."""
    return _step_mean(records, seat, "h_plus"), _step_mean(records, seat, "h_minus")


@dataclass
class EntropyHeatmap:
    """Per (turn, own column) means of both policy entropies, in bits."""

    turns: int
    cols: int
    h_plus: list[list[float | None]]
    h_minus: list[list[float | None]]
    counts: list[list[int]]

    def to_json(self) -> str:
        return json.dumps(
            {
                "turns": self.turns,
                "cols": self.cols,
                "h_plus": self.h_plus,
                "h_minus": self.h_minus,
                "counts": self.counts,
            },
            separators=(",", ":"),
        )


def entropy_heatmap(
    records: Sequence[EpisodeRecord], seat: Seat, config: GridConfig | None = None
) -> EntropyHeatmap:
    """Cell-wise mean entropies indexed by (turn, column when acting)."""
    config = config or GridConfig()
    turns, cols = config.turns, config.cols
    sum_p = [[0.0] * cols for _ in range(turns)]
    sum_m = [[0.0] * cols for _ in range(turns)]
    counts = [[0] * cols for _ in range(turns)]
    for rec in records:
        hp = rec.h_plus(seat)
        hm = rec.h_minus(seat)
        if hp is None or hm is None:
            continue
        positions = rec.cols(seat)
        for t in range(len(hp)):
            c = positions[t]
            sum_p[t][c] += hp[t]
            sum_m[t][c] += hm[t]
            counts[t][c] += 1
    h_plus: list[list[float | None]] = [
        [sum_p[t][c] / counts[t][c] if counts[t][c] else None for c in range(cols)]
        for t in range(turns)
    ]
    h_minus: list[list[float | None]] = [
        [sum_m[t][c] / counts[t][c] if counts[t][c] else None for c in range(cols)]
        for t in range(turns)
    ]
    return EntropyHeatmap(turns=turns, cols=cols, h_plus=h_plus, h_minus=h_minus, counts=counts)


@dataclass
class SeedMetrics:
    """Metrics for one seed's evaluation run."""

    seed: int
    p1: Rates
    p2: Rates
    cps: float | None
    p1_avg_te: float | None = None
    p2_avg_te: float | None = None
    p1_avg_h_plus: float | None = None
    p1_avg_h_minus: float | None = None
    p2_avg_h_plus: float | None = None
    p2_avg_h_minus: float | None = None
    collaborative: int = 0
    competitive: int = 0

    def rates(self, seat: Seat) -> Rates:
        return self.p1 if seat == Seat.P1 else self.p2


def seed_metrics(seed: int, records: Sequence[EpisodeRecord]) -> SeedMetrics:
    p1 = success_rates(records, Seat.P1)
    p2 = success_rates(records, Seat.P2)
    pair_cps = None
    if None not in (p1.srp, p1.srm, p2.srp, p2.srm):
        pair_cps = cps(p1.srp, p1.srm, p2.srp, p2.srm)
    p1_hp, p1_hm = averaged_entropies(records, Seat.P1)
    p2_hp, p2_hm = averaged_entropies(records, Seat.P2)
    coll = sum(1 for r in records if r.collaborative)
    return SeedMetrics(
        seed=seed,
        p1=p1,
        p2=p2,
        cps=pair_cps,
        p1_avg_te=averaged_te(records, Seat.P1),
        p2_avg_te=averaged_te(records, Seat.P2),
        p1_avg_h_plus=p1_hp,
        p1_avg_h_minus=p1_hm,
        p2_avg_h_plus=p2_hp,
        p2_avg_h_minus=p2_hm,
        collaborative=coll,
        competitive=len(records) - coll,
    )


RATE_FIELDS = ("srcp", "srcl", "srp", "srm")
INFO_FIELDS = ("avg_te", "avg_h_plus", "avg_h_minus")


@dataclass
class MetricsReport:
    """Per-seed metrics for one experiment plus across-seed aggregation."""

    experiment: str
    p1_label: str
    p2_label: str
    seeds: list[SeedMetrics] = field(default_factory=list)

    def label(self, seat: Seat) -> str:
        return self.p1_label if seat == Seat.P1 else self.p2_label

    def values(self, field_name: str, seat: Seat) -> list[float]:
        """Across-seed values of one metric for one seat, Nones dropped."""
        out = []
        for sm in self.seeds:
            if field_name in RATE_FIELDS:
                v = getattr(sm.rates(seat), field_name)
            elif field_name in INFO_FIELDS:
                v = getattr(sm, f"p{int(seat) + 1}_{field_name}")
            elif field_name == "cps":
                v = sm.cps
            else:
                raise ValueError(f"unknown metric field {field_name!r}")
            if v is not None:
                out.append(v)
        return out

    def mean(self, field_name: str, seat: Seat = Seat.P1) -> float | None:
        vals = self.values(field_name, seat)
        return statistics.fmean(vals) if vals else None

    def std(self, field_name: str, seat: Seat = Seat.P1) -> float | None:
        vals = self.values(field_name, seat)
        return statistics.stdev(vals) if len(vals) > 1 else None

    def csv_rows(self) -> list[str]:
        rows = []
        for sm in self.seeds:
            for seat in (Seat.P1, Seat.P2):
                r = sm.rates(seat)
                cells = [
                    self.experiment,
                    str(sm.seed),
                    f"{seat.name} ({self.label(seat)})",
                    _cell(r.srcp),
                    _cell(r.srcl),
                    _cell(r.srp),
                    _cell(r.srm),
                    _cell(sm.cps),
                    _cell(getattr(sm, f"p{int(seat) + 1}_avg_te")),
                    _cell(getattr(sm, f"p{int(seat) + 1}_avg_h_plus")),
                    _cell(getattr(sm, f"p{int(seat) + 1}_avg_h_minus")),
                ]
                rows.append(",".join(cells))
        return rows


CSV_HEADER = "experiment,seed,agent,SRCP,SRCL,SRP,SRM,CPS,avg_TE_bits,avg_H_plus,avg_H_minus"


def _cell(value: float | None) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def append_report_csv(report: MetricsReport, path: str) -> None:
    """Append per-seed rows, writing the header when the file is new."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        if fresh:
            fh.write(CSV_HEADER + "\n")
        for row in report.csv_rows():
            fh.write(row + "\n")


def summarize(report: MetricsReport) -> str:
    """Human-readable across-seed summary, one line per seat metric."""
    lines = [f"experiment: {report.experiment} (seeds: {len(report.seeds)})"]

    def fmt(v: float | None, pct: bool = True) -> str:
        if v is None:
            return "-"
        return f"{100 * v:.2f}%" if pct else f"{v:.3f}"

    for seat in (Seat.P1, Seat.P2):
        parts = [f"  {seat.name} ({report.label(seat)}):"]
        for name in ("srcp", "srcl", "srp", "srm"):
            parts.append(f"{name.upper()}={fmt(report.mean(name, seat))}")
        te = report.mean("avg_te", seat)
        if te is not None:
            parts.append(f"TE={fmt(te, pct=False)}b")
        lines.append(" ".join(parts))
    cps_mean = report.mean("cps")
    lines.append(f"  CPS={fmt(cps_mean, pct=False)}")
    return "\n".join(lines)


def merge_reports(experiment: str, p1_label: str, p2_label: str, seeds: Iterable[SeedMetrics]) -> MetricsReport:
    report = MetricsReport(experiment=experiment, p1_label=p1_label, p2_label=p2_label)
    report.seeds = sorted(seeds, key=lambda sm: sm.seed)
    return report


def mean_h_plus(records: Sequence[EpisodeRecord], seat: Seat) -> float | None:
    """Visit-weighted mean of the conditioned policy entropy, in bits."""
    return _step_mean(records, seat, "h_plus")
