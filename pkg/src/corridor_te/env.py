"""The corridor dilemma environment.

Two players start at opposite ends of an 11x5 corridor and advance one row
toward the middle every turn, choosing a lateral move (left / straight /
right) simultaneously. After five turns both stand on the middle row and
the episode ends: same column is a meeting, different columns a pass.
Each player holds a private objective (meet or pass) and is paid +10 /
-10 at the end depending on whether the outcome matches it.

States are immutable values; ``step`` returns a new state, so independent
episodes can run concurrently.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple


class Seat(IntEnum):
    P1 = 0  # starts on row 0, moves toward increasing rows
    P2 = 1  # starts on the last row, moves toward decreasing rows

    @property
    def other(self) -> "Seat":
        return Seat.P2 if self is Seat.P1 else Seat.P1


class Action(IntEnum):
    LEFT = 0
    STRAIGHT = 1
    RIGHT = 2

    @property
    def delta(self) -> int:
        return int(self) - 1


ACTION_NAMES = {Action.LEFT: "left", Action.STRAIGHT: "straight", Action.RIGHT: "right"}
ACTIONS_BY_NAME = {name: action for action, name in ACTION_NAMES.items()}


class Objective(IntEnum):
    MEET = 0
    PASS = 1


class Outcome(IntEnum):
    MEET = 0
    PASS = 1


OBJECTIVE_NAMES = {Objective.MEET: "meet", Objective.PASS: "pass"}
OBJECTIVES_BY_NAME = {name: obj for obj, name in OBJECTIVE_NAMES.items()}
OUTCOME_NAMES = {Outcome.MEET: "meet", Outcome.PASS: "pass"}
OUTCOMES_BY_NAME = {name: out for out, name in OUTCOME_NAMES.items()}


@dataclass(frozen=True)
class GridConfig:
    rows: int = 11
    cols: int = 5
    turns: int = 5

    def __post_init__(self) -> None:
        if self.rows != 2 * self.turns + 1:
            raise ValueError(f"rows must be 2*turns+1, got rows={self.rows} turns={self.turns}")
        if self.cols < 2:
            raise ValueError(f"need at least 2 columns, got {self.cols}")


class EnvState(NamedTuple):
    config: GridConfig
    turn: int
    p1_col: int
    p2_col: int
    p1_objective: Objective
    p2_objective: Objective

    @property
    def p1_row(self) -> int:
        return self.turn

    @property
    def p2_row(self) -> int:
        return self.config.rows - 1 - self.turn

    @property
    def terminal(self) -> bool:
        return self.turn >= self.config.turns

    def col(self, seat: Seat) -> int:
        return self.p1_col if seat == Seat.P1 else self.p2_col

    def objective(self, seat: Seat) -> Objective:
        return self.p1_objective if seat == Seat.P1 else self.p2_objective


def clamp_col(col: int, cols: int) -> int:
    if col < 0:
        return 0
    if col >= cols:
        return cols - 1
    return col


def reachable_cols(col: int, cols: int) -> tuple[int, ...]:
    """Distinct columns reachable from ``col`` in one move (walls clamp)."""
    lo = max(col - 1, 0)
    hi = min(col + 1, cols - 1)
    return tuple(range(lo, hi + 1))


def reset(config: GridConfig, rng: random.Random | int | None = None) -> EnvState:
    """Fresh episode: uniform start columns, independent 50/50 objectives."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    return EnvState(
        config=config,
        turn=0,
        p1_col=rng.randrange(config.cols),
        p2_col=rng.randrange(config.cols),
        p1_objective=Objective(rng.randrange(2)),
        p2_objective=Objective(rng.randrange(2)),
    )


def step(state: EnvState, a1: Action, a2: Action) -> EnvState:
    """Apply both lateral moves simultaneously and advance one row each."""
    if state.terminal:
        raise ValueError("step called on a terminal state")
    cols = state.config.cols
    return state._replace(
        turn=state.turn + 1,
        p1_col=clamp_col(state.p1_col + (int(a1) - 1), cols),
        p2_col=clamp_col(state.p2_col + (int(a2) - 1), cols),
    )


def outcome(state: EnvState) -> Outcome:
    if not state.terminal:
        raise ValueError("outcome is only defined at terminal states")
    return Outcome.MEET if state.p1_col == state.p2_col else Outcome.PASS


def objective_reward(state: EnvState, seat: Seat) -> float:
    """0 before the middle row; +/-10 at the end depending on the objective."""
    if not state.terminal:
        return 0.0
    return 10.0 if int(outcome(state)) == int(state.objective(seat)) else -10.0
