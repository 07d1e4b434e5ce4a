"""Turn-based game sessions: a human (P1, bottom row) against a frozen agent.

A session plays a fixed number of rounds; each round is one corridor
episode with freshly randomised objectives and start columns for both
parties. The human submits one move per turn under a server-side
deadline; if it expires the move is forced to straight. The agent's move
is sampled from its frozen policy when the turn resolves, which is
equivalent to a simultaneous move because the policy only conditions on
columns up to the current turn.

The server clock is authoritative: a late action can never overwrite the
forced move. Payload dicts produced here are the wire format; they never
mention the opponent's objective or what kind of agent it is.
"""

from __future__ import annotations

import json
import os
import random
import threading
import uuid
from dataclasses import dataclass
from typing import IO, Union

from .baselines import BaselineKind, BaselineSpec, baseline_action
from .env import (
    ACTION_NAMES,
    ACTIONS_BY_NAME,
    OBJECTIVE_NAMES,
    OUTCOME_NAMES,
    Action,
    GridConfig,
    Objective,
    Outcome,
    Seat,
    reset,
    step,
)
from .metrics import EpisodeRecord, success_rates
from .qtable import SparseQTable, load_table

DEFAULT_ROUNDS = 100
DEFAULT_TURN_TIMEOUT_MS = 5000

OpponentPolicy = Union[SparseQTable, BaselineSpec]


class SessionError(Exception):
    """Protocol-level error with a wire code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class GameSession:
    """One human-vs-agent session; not thread-safe on its own (see SessionStore)."""

    def __init__(
        self,
        session_id: str,
        opponent: OpponentPolicy,
        rounds: int = DEFAULT_ROUNDS,
        seed: int | None = None,
        turn_timeout_ms: int = DEFAULT_TURN_TIMEOUT_MS,
        grid: GridConfig | None = None,
        log_stream: IO[str] | None = None,
    ):
        if rounds < 1:
            raise SessionError("bad-request", f"rounds must be >= 1, got {rounds}")
        if turn_timeout_ms < 1:
            raise SessionError("bad-request", "turn_timeout_ms must be positive")
        if isinstance(opponent, SparseQTable) and opponent.seat != Seat.P2:
            raise SessionError("bad-request", "opponent snapshots must be P2-seat tables")
        self.session_id = session_id
        self.opponent = opponent
        self.rounds_total = rounds
        self.turn_timeout_ms = turn_timeout_ms
        self.grid = grid or (opponent.config if isinstance(opponent, SparseQTable) else GridConfig())
        self.rng = random.Random(f"session-{seed}" if seed is not None else None)
        self.round_index = 0  # 1-based once the first round starts
        self.scores = {"you": 0, "opponent": 0}
        self.records: list[EpisodeRecord] = []
        self.finished = False
        self.deadline_ms: int | None = None
        self.log_stream = log_stream
        self._state = None
        self._cols1: list[int] = []
        self._cols2: list[int] = []
        self._acts1: list[int] = []
        self._acts2: list[int] = []
        self._forced: list[bool] = []

    # -- lifecycle -------------------------------------------------------

    def start(self, now_ms: int) -> dict:
        """Begin the first round and return the ``created`` payload."""
        self._start_round(now_ms)
        return {
            "session_id": self.session_id,
            "grid": {"rows": self.grid.rows, "cols": self.grid.cols, "turns": self.grid.turns},
            "round": self.round_index,
            "rounds_total": self.rounds_total,
            "your_objective": OBJECTIVE_NAMES[self._state.p1_objective],
            "positions": self._positions(),
            "deadline_ms": self.deadline_ms,
        }

    def _start_round(self, now_ms: int) -> None:
        self.round_index += 1
        self._state = reset(self.grid, self.rng)
        self._cols1 = [self._state.p1_col]
        self._cols2 = [self._state.p2_col]
        self._acts1 = []
        self._acts2 = []
        self._forced = []
        self.deadline_ms = now_ms + self.turn_timeout_ms

    def _positions(self) -> dict:
        return {
            "you": {"row": self._state.p1_row, "col": self._state.p1_col},
            "opponent": {"row": self._state.p2_row, "col": self._state.p2_col},
        }

    # -- turn handling ----------------------------------------------------

    def submit_action(self, action_name: str, now_ms: int, turn: int | None = None) -> dict:
        """Resolve one turn with the human's move; rejects late or stale input."""
        if self.finished:
            raise SessionError("finished", "session already finished")
        if action_name not in ACTIONS_BY_NAME:
            raise SessionError("bad-request", f"unknown action {action_name!r}")
        if turn is not None and turn != self._state.turn:
            raise SessionError(
                "conflict", f"turn {turn} already resolved (current turn is {self._state.turn})"
            )
        if now_ms >= self.deadline_ms:
            # late input never overrides the timeout move
            self.tick(now_ms)
            raise SessionError(
                "timeout-already-applied",
                "deadline expired; straight was applied on your behalf",
            )
        return self._resolve_turn(ACTIONS_BY_NAME[action_name], forced=False, now_ms=now_ms)

    def tick(self, now_ms: int) -> dict | None:
        """Apply the forced straight move if the deadline has passed."""
        if self.finished or self.deadline_ms is None or now_ms < self.deadline_ms:
            return None
        return self._resolve_turn(Action.STRAIGHT, forced=True, now_ms=now_ms)

    def _agent_action(self) -> Action:
        if isinstance(self.opponent, SparseQTable):
            key = self.opponent.key(
                self._state.turn, self._state.p2_objective, self._cols2, self._cols1
            )
            return self.opponent.select_action(key, 0.0, self.rng)
        return baseline_action(
            self.opponent,
            self._state.p2_col,
            self._state.p1_col,
            self._state.p2_objective,
            self._state.p1_objective,
            self.rng,
            self.grid.cols,
        )

    def _resolve_turn(self, human_action: Action, forced: bool, now_ms: int) -> dict:
        agent_action = self._agent_action()
        self._state = step(self._state, human_action, agent_action)
        self._cols1.append(self._state.p1_col)
        self._cols2.append(self._state.p2_col)
        self._acts1.append(int(human_action))
        self._acts2.append(int(agent_action))
        self._forced.append(forced)
        payload = {
            "round": self.round_index,
            "turn": self._state.turn,
            "moves": {"you": ACTION_NAMES[human_action], "opponent": ACTION_NAMES[agent_action]},
            "positions": self._positions(),
            "forced": forced,
            "round_status": "playing",
        }
        if self._state.terminal:
            self._finish_round(payload, now_ms)
        else:
            self.deadline_ms = now_ms + self.turn_timeout_ms
            payload["deadline_ms"] = self.deadline_ms
        return payload

    def _finish_round(self, payload: dict, now_ms: int) -> None:
        state = self._state
        out = Outcome.MEET if state.p1_col == state.p2_col else Outcome.PASS
        p1_success = int(out) == int(state.p1_objective)
        p2_success = int(out) == int(state.p2_objective)
        self.scores["you"] += p1_success
        self.scores["opponent"] += p2_success
        record = EpisodeRecord(
            index=self.round_index,
            p1_objective=state.p1_objective,
            p2_objective=state.p2_objective,
            p1_cols=list(self._cols1),
            p2_cols=list(self._cols2),
            p1_actions=list(self._acts1),
            p2_actions=list(self._acts2),
            outcome=out,
            p1_success=p1_success,
            p2_success=p2_success,
            forced=list(self._forced),
        )
        self.records.append(record)
        if self.log_stream is not None:
            self.log_stream.write(record.to_json() + "\n")
            self.log_stream.flush()
        payload["outcome"] = OUTCOME_NAMES[out]
        payload["your_success"] = p1_success
        payload["scores"] = dict(self.scores)
        if self.round_index >= self.rounds_total:
            self.finished = True
            self.deadline_ms = None
            payload["round_status"] = "finished"
            payload["deadline_ms"] = None
            if self.log_stream is not None:
                self.log_stream.close()
                self.log_stream = None
        else:
            self._start_round(now_ms)
            payload["round_status"] = "round-over"
            payload["deadline_ms"] = self.deadline_ms
            payload["next_round"] = {
                "round": self.round_index,
                "your_objective": OBJECTIVE_NAMES[self._state.p1_objective],
                "positions": self._positions(),
            }

    # -- reporting ----------------------------------------------------------

    def state(self) -> dict:
        return {
            "session_id": self.session_id,
            "round": self.round_index,
            "turn": 0 if self.finished else self._state.turn,
            "rounds_total": self.rounds_total,
            "your_objective": None if self.finished else OBJECTIVE_NAMES[self._state.p1_objective],
            "positions": None if self.finished else self._positions(),
            "scores": dict(self.scores),
            "deadline_ms": self.deadline_ms,
            "finished": self.finished,
        }

    def report(self) -> dict:
        """Success rates for the human over completed rounds (None until any)."""
        payload = {
            "session_id": self.session_id,
            "rounds_completed": len(self.records),
            "scores": dict(self.scores),
            "srcp": None,
            "srcl": None,
            "srp": None,
            "srm": None,
            "competitive_rounds": 0,
            "collaborative_rounds": 0,
        }
        if self.records:
            rates = success_rates(self.records, Seat.P1)
            payload.update(srcp=rates.srcp, srcl=rates.srcl, srp=rates.srp, srm=rates.srm)
            coll = sum(1 for r in self.records if r.collaborative)
            payload["collaborative_rounds"] = coll
            payload["competitive_rounds"] = len(self.records) - coll
        return payload


@dataclass
class Slot:
    """A selectable opponent; the name deliberately hides the agent type."""

    name: str
    snapshot_path: str | None = None
    baseline: BaselineSpec | None = None
    _table: SparseQTable | None = None

    def policy(self) -> OpponentPolicy:
        if self.baseline is not None:
            return self.baseline
        if self._table is None:
            self._table = load_table(self.snapshot_path)
        return self._table


def discover_slots(snapshots_dir: str) -> dict[str, Slot]:
    """Build the opponent registry from a snapshots directory.

    A ``slots.json`` manifest ({name: {"snapshot": path} | {"baseline":
    kind}}) takes precedence; otherwise every ``*.qtable`` file becomes
    ``slot-1``, ``slot-2``, ... in sorted filename order so the wire names
    stay neutral.
    """
    manifest = os.path.join(snapshots_dir, "slots.json")
    slots: dict[str, Slot] = {}
    if os.path.exists(manifest):
        with open(manifest, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        for name, entry in doc.items():
            if "snapshot" in entry:
                path = os.path.join(snapshots_dir, entry["snapshot"])
                slots[name] = Slot(name=name, snapshot_path=path)
            elif "baseline" in entry:
                slots[name] = Slot(name=name, baseline=BaselineSpec(BaselineKind(entry["baseline"])))
            else:
                raise ValueError(f"slot {name!r} needs a 'snapshot' or 'baseline' field")
        return slots
    files = sorted(f for f in os.listdir(snapshots_dir) if f.endswith(".qtable"))
    for i, fname in enumerate(files, start=1):
        name = f"slot-{i}"
        slots[name] = Slot(name=name, snapshot_path=os.path.join(snapshots_dir, fname))
    return slots


class SessionStore:
    """Session registry with per-session locking for concurrent transports."""

    def __init__(
        self,
        slots: dict[str, Slot],
        log_dir: str | None = None,
        default_rounds: int = DEFAULT_ROUNDS,
        default_timeout_ms: int = DEFAULT_TURN_TIMEOUT_MS,
    ):
        self.slots = slots
        self.log_dir = log_dir
        self.default_rounds = default_rounds
        self.default_timeout_ms = default_timeout_ms
        self._sessions: dict[str, GameSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(
        self,
        opponent_slot: str,
        now_ms: int,
        rounds: int | None = None,
        seed: int | None = None,
        turn_timeout_ms: int | None = None,
    ) -> dict:
        slot = self.slots.get(opponent_slot)
        if slot is None:
            raise SessionError("not-found", f"unknown opponent slot {opponent_slot!r}")
        session_id = uuid.uuid4().hex[:12]
        log_stream = None
        if self.log_dir is not None:
            os.makedirs(self.log_dir, exist_ok=True)
            log_stream = open(
                os.path.join(self.log_dir, f"{session_id}.jsonl"), "w", encoding="utf-8", newline="\n"
            )
        session = GameSession(
            session_id=session_id,
            opponent=slot.policy(),
            rounds=rounds if rounds is not None else self.default_rounds,
            seed=seed,
            turn_timeout_ms=turn_timeout_ms if turn_timeout_ms is not None else self.default_timeout_ms,
            log_stream=log_stream,
        )
        payload = session.start(now_ms)
        with self._registry_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        return payload

    def _get(self, session_id: str) -> tuple[GameSession, threading.Lock]:
        with self._registry_lock:
            session = self._sessions.get(session_id)
            lock = self._locks.get(session_id)
        if session is None:
            raise SessionError("not-found", f"unknown session {session_id!r}")
        return session, lock

    def act(self, session_id: str, action: str, now_ms: int, turn: int | None = None) -> dict:
        session, lock = self._get(session_id)
        with lock:
            return session.submit_action(action, now_ms, turn)

    def tick(self, session_id: str, now_ms: int) -> dict | None:
        session, lock = self._get(session_id)
        with lock:
            return session.tick(now_ms)

    def tick_all(self, now_ms: int) -> list[tuple[str, dict]]:
        """Tick every live session; returns (session_id, forced turn) pairs."""
        with self._registry_lock:
            ids = list(self._sessions)
        forced = []
        for sid in ids:
            try:
                payload = self.tick(sid, now_ms)
            except SessionError:
                continue
            if payload is not None:
                forced.append((sid, payload))
        return forced

    def report(self, session_id: str) -> dict:
        session, lock = self._get(session_id)
        with lock:
            return session.report()

    def state(self, session_id: str) -> dict:
        session, lock = self._get(session_id)
        with lock:
            return session.state()

    def slot_names(self) -> list[str]:
        return sorted(self.slots)
