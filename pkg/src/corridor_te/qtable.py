"""History-keyed sparse Q-tables with softmax policies and per-step TE.

A table belongs to one seat and maps (history key, action) to a Q-value,
with absent entries reading as 0. A history key carries the turn, the
seat's own objective and the column windows of both players (most recent
column last, truncated to ``history_len + 1`` entries).

Alongside the per-key entries the table maintains running marginal sums
over opponent histories, so the opponent-marginalised policy is available
in constant time: the marginal Q-vector for an ego key is the sum over
all *present* joint keys sharing it, divided by the number of *possible*
opponent histories m. Absent joint keys contribute zero, which is exactly
the sparse-matrix convention the rest of the package relies on. By
default m counts full-length histories (a constant per table), which
keeps the marginal policy close to uniform and the no-influence entropy
near its 1.585-bit maximum; dividing by the per-turn window count instead
is available as ``marginal_divisor="turn"``.

Tables are exclusively owned while training; frozen tables are read-only
and safe to share.
"""

from __future__ import annotations

import math
import random
from typing import IO, Iterator, NamedTuple, Sequence, Union

from .env import (
    OBJECTIVE_NAMES,
    OBJECTIVES_BY_NAME,
    Action,
    GridConfig,
    Objective,
    Seat,
)
from .info_theory import entropy_of_logits, normalized_te, softmax

N_ACTIONS = 3
LOG2_3 = math.log2(3.0)

REWARD_MODE_TE = "te"
REWARD_MODE_ENTROPY = "entropy"
REWARD_MODE_NONE = "none"
REWARD_MODES = (REWARD_MODE_TE, REWARD_MODE_ENTROPY, REWARD_MODE_NONE)

# Marginalisation divisors: "full" divides by the number of possible
# full-length opponent histories regardless of the current turn, "turn"
# by the number of histories matching the key's actual window length.
DIVISOR_FULL = "full"
DIVISOR_TURN = "turn"
MARGINAL_DIVISORS = (DIVISOR_FULL, DIVISOR_TURN)

SNAPSHOT_MAGIC = "corridor-te-qtable"
SNAPSHOT_VERSION = "v1"


class JointHistoryKey(NamedTuple):
    seat: Seat
    turn: int
    objective: Objective
    ego_cols: tuple[int, ...]
    opp_cols: tuple[int, ...]

    @property
    def ego(self) -> "EgoHistoryKey":
        return EgoHistoryKey(self.seat, self.turn, self.objective, self.ego_cols)

    def validate(self, config: GridConfig) -> None:
        self.ego.validate(config)
        _validate_window(self.opp_cols, config)
        if len(self.opp_cols) != len(self.ego_cols):
            raise ValueError("ego and opponent windows must have equal length")


class EgoHistoryKey(NamedTuple):
    seat: Seat
    turn: int
    objective: Objective
    ego_cols: tuple[int, ...]

    def validate(self, config: GridConfig) -> None:
        if not 0 <= self.turn < config.turns:
            raise ValueError(f"turn {self.turn} outside [0, {config.turns})")
        if not self.ego_cols:
            raise ValueError("empty column window")
        if len(self.ego_cols) > self.turn + 1:
            raise ValueError("window longer than the turns seen so far")
        _validate_window(self.ego_cols, config)


def _validate_window(cols_window: Sequence[int], config: GridConfig) -> None:
    prev = None
    for c in cols_window:
        if not 0 <= c < config.cols:
            raise ValueError(f"column {c} outside [0, {config.cols})")
        if prev is not None and abs(c - prev) > 1:
            raise ValueError(f"columns {prev} -> {c} differ by more than one")
        prev = c


def possible_history_counts(cols: int, max_len: int) -> list[int]:
    """Number of column windows of length 1..max_len with steps in {-1,0,+1}.

    Every such window is realisable under wall clamping, so this is the
    count of possible opponent observations used as the marginalisation
    divisor. For 5 columns: 5, 13, 35, 95, 259, ...
    """
    counts = [cols]
    v = [1] * cols
    for _ in range(max_len - 1):
        v = [sum(v[max(c - 1, 0) : min(c + 1, cols - 1) + 1]) for c in range(cols)]
        counts.append(sum(v))
    return counts


def enumerate_opponent_histories(
    ego: EgoHistoryKey, config: GridConfig
) -> tuple[int, Iterator[tuple[int, ...]]]:
    """All possible opponent column windows matching an ego key's length.

    Returns the count m and a lexicographic iterator over the windows.
    """
    length = len(ego.ego_cols)
    m = possible_history_counts(config.cols, length)[length - 1]

    def gen() -> Iterator[tuple[int, ...]]:
        stack: list[tuple[int, ...]] = [(c,) for c in reversed(range(config.cols))]
        while stack:
            prefix = stack.pop()
            if len(prefix) == length:
                yield prefix
                continue
            last = prefix[-1]
            lo = max(last - 1, 0)
            hi = min(last + 1, config.cols - 1)
            for c in range(hi, lo - 1, -1):
                stack.append(prefix + (c,))

    return m, gen()


class SparseQTable:
    """Seat-specific sparse Q-table with incremental opponent marginals."""

    def __init__(
        self,
        seat: Seat,
        phi: float = 0.0,
        reward_mode: str = REWARD_MODE_TE,
        history_len: int = 5,
        config: GridConfig | None = None,
        marginal_divisor: str = DIVISOR_FULL,
    ):
        if reward_mode not in REWARD_MODES:
            raise ValueError(f"unknown reward mode {reward_mode!r}")
        if history_len < 0:
            raise ValueError(f"history length must be >= 0, got {history_len}")
        if marginal_divisor not in MARGINAL_DIVISORS:
            raise ValueError(f"unknown marginal divisor {marginal_divisor!r}")
        self.seat = Seat(seat)
        self.phi = float(phi)
        self.reward_mode = reward_mode
        self.history_len = history_len
        self.config = config or GridConfig()
        self.marginal_divisor = marginal_divisor
        # Encoded storage: one list of 3 Q-values per visited joint key, and
        # one list of 3 running sums per ego key seen in an update.
        self._rows: dict[int, list[float]] = {}
        self._marginal: dict[int, list[float]] = {}
        max_window = min(history_len, self.config.turns - 1) + 1
        self._max_window = max_window
        self._m_counts = possible_history_counts(self.config.cols, max_window)
        self._m_full = self._m_counts[max_window - 1]
        self._code_base = self.config.cols**max_window

    def _divisor(self, wlen: int) -> int:
        if self.marginal_divisor == DIVISOR_FULL:
            return self._m_full
        return self._m_counts[wlen - 1]

    # -- key handling -------------------------------------------------

    def key(
        self,
        turn: int,
        objective: Objective,
        ego_cols_seen: Sequence[int],
        opp_cols_seen: Sequence[int],
    ) -> JointHistoryKey:
        """Build a key from full column logs, applying history truncation."""
        keep = self.history_len + 1
        return JointHistoryKey(
            self.seat,
            turn,
            objective,
            tuple(ego_cols_seen[-keep:]),
            tuple(opp_cols_seen[-keep:]),
        )

    def _window_code(self, window: Sequence[int]) -> int:
        code = 0
        base = 1
        cols = self.config.cols
        for c in window:
            code += c * base
            base *= cols
        return code

    def _ids(self, key: JointHistoryKey) -> tuple[int, int, int]:
        """(joint id, ego id, window length) for a key; validates the seat."""
        if key.seat != self.seat:
            raise ValueError(f"key for seat {key.seat!r} used with a {self.seat!r} table")
        wlen = len(key.ego_cols)
        eid = (key.turn * 2 + int(key.objective)) * self._code_base + self._window_code(
            key.ego_cols
        )
        kid = eid * self._code_base + self._window_code(key.opp_cols)
        return kid, eid, wlen

    def _ids_from(
        self, turn: int, objective: int, ego_seen: Sequence[int], opp_seen: Sequence[int]
    ) -> tuple[int, int, int]:
        """As _ids, but straight from full column logs (hot path, no key object)."""
        keep = self.history_len + 1
        n = len(ego_seen)
        start = n - keep if n > keep else 0
        cols = self.config.cols
        ego_code = 0
        opp_code = 0
        base = 1
        for i in range(start, n):
            ego_code += ego_seen[i] * base
            opp_code += opp_seen[i] * base
            base *= cols
        eid = (turn * 2 + objective) * self._code_base + ego_code
        return eid * self._code_base + opp_code, eid, n - start

    def _decode(self, kid: int) -> tuple[int, int, tuple[int, ...], tuple[int, ...]]:
        base = self._code_base
        opp_code = kid % base
        rest = kid // base
        ego_code = rest % base
        rest //= base
        obj = rest % 2
        turn = rest // 2
        wlen = min(turn, self.history_len) + 1
        return turn, obj, self._decode_window(ego_code, wlen), self._decode_window(opp_code, wlen)

    def _decode_window(self, code: int, length: int) -> tuple[int, ...]:
        cols = self.config.cols
        out = []
        for _ in range(length):
            out.append(code % cols)
            code //= cols
        return tuple(out)

    # -- policies and information measures ------------------------------

    def q_values(self, key: JointHistoryKey) -> tuple[float, float, float]:
        kid, _, _ = self._ids(key)
        row = self._rows.get(kid)
        return (0.0, 0.0, 0.0) if row is None else (row[0], row[1], row[2])

    def policy_full(self, key: JointHistoryKey) -> tuple[float, ...]:
        """Softmax over the three Q-values of the joint key (absent = 0)."""
        kid, _, _ = self._ids(key)
        row = self._rows.get(kid)
        if row is None:
            third = 1.0 / N_ACTIONS
            return (third, third, third)
        return softmax(row)

    def marginal_q_values(self, ego: EgoHistoryKey) -> tuple[float, float, float]:
        """Q-values summed over present opponent windows, divided by m.

        With the default "full" divisor m is the number of possible
        full-length opponent histories (259 for the 5-column, length-5
        case), whatever the key's turn; with "turn" it is the number of
        histories matching the key's window length (5, 13, 35, ...).
        """
        if ego.seat != self.seat:
            raise ValueError(f"key for seat {ego.seat!r} used with a {self.seat!r} table")
        wlen = len(ego.ego_cols)
        eid = (ego.turn * 2 + int(ego.objective)) * self._code_base + self._window_code(
            ego.ego_cols
        )
        sums = self._marginal.get(eid)
        if sums is None:
            return (0.0, 0.0, 0.0)
        m = self._divisor(wlen)
        return (sums[0] / m, sums[1] / m, sums[2] / m)

    def policy_marginal(self, ego: EgoHistoryKey) -> tuple[float, ...]:
        """Softmax over the opponent-marginalised Q-values."""
        return softmax(self.marginal_q_values(ego))

    def policy_entropies(self, key: JointHistoryKey) -> tuple[float, float]:
        """(H without opponent history, H with it), both in bits."""
        kid, eid, wlen = self._ids(key)
        return self._entropies_id(kid, eid, wlen)

    def _entropies_id(self, kid: int, eid: int, wlen: int) -> tuple[float, float]:
        row = self._rows.get(kid)
        h_plus = LOG2_3 if row is None else entropy_of_logits(row)
        sums = self._marginal.get(eid)
        if sums is None:
            h_minus = LOG2_3
        else:
            m = self._divisor(wlen)
            h_minus = entropy_of_logits((sums[0] / m, sums[1] / m, sums[2] / m))
        return h_minus, h_plus

    def step_te(self, key: JointHistoryKey) -> float:
        """Transfer entropy (bits) at this key: H(marginal) - H(full)."""
        h_minus, h_plus = self.policy_entropies(key)
        return h_minus - h_plus

    def shaped_reward(self, key: JointHistoryKey, env_reward: float) -> float:
        """Reward augmented according to the table's mode and phi."""
        kid, eid, wlen = self._ids(key)
        return self._shaped_reward_id(kid, eid, wlen, env_reward)

    def _shaped_reward_id(self, kid: int, eid: int, wlen: int, env_reward: float) -> float:
        if self.reward_mode == REWARD_MODE_NONE or self.phi == 0.0:
            return env_reward
        h_minus, h_plus = self._entropies_id(kid, eid, wlen)
        return self.shaped_from_entropies(h_minus, h_plus, env_reward)

    def shaped_from_entropies(self, h_minus: float, h_plus: float, env_reward: float) -> float:
        """Shaped reward given already-computed policy entropies (bits).

        TE mode adds phi times the normalised transfer entropy; entropy
        mode subtracts phi times the normalised conditioned entropy.
        """
        mode = self.reward_mode
        if mode == REWARD_MODE_NONE or self.phi == 0.0:
            return env_reward
        if mode == REWARD_MODE_TE:
            return self.phi * normalized_te(h_minus - h_plus, N_ACTIONS) + env_reward
        if mode == REWARD_MODE_ENTROPY:
            return -self.phi * (h_plus / LOG2_3) + env_reward
        raise ValueError(f"unknown reward mode {mode!r}")

    # -- learning -------------------------------------------------------

    def td_update(
        self,
        key: JointHistoryKey,
        action: Action | int,
        reward: float,
        next_key: JointHistoryKey | None,
        alpha: float,
        gamma: float,
    ) -> None:
        """One-step temporal-difference update toward reward + gamma*max(next)."""
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {gamma}")
        kid, eid, _ = self._ids(key)
        next_kid = None if next_key is None else self._ids(next_key)[0]
        self._td_update_id(kid, eid, int(action), reward, next_kid, alpha, gamma)

    def _td_update_id(
        self,
        kid: int,
        eid: int,
        action: int,
        reward: float,
        next_kid: int | None,
        alpha: float,
        gamma: float,
    ) -> None:
        best_next = 0.0
        if next_kid is not None:
            next_row = self._rows.get(next_kid)
            if next_row is not None:
                best_next = max(next_row)
        target = reward + gamma * best_next
        row = self._rows.get(kid)
        if row is None:
            row = [0.0, 0.0, 0.0]
            self._rows[kid] = row
        old = row[action]
        new = (1.0 - alpha) * old + alpha * target
        row[action] = new
        sums = self._marginal.get(eid)
        if sums is None:
            sums = [0.0, 0.0, 0.0]
            self._marginal[eid] = sums
        sums[action] += new - old

    def select_action(
        self, key: JointHistoryKey, epsilon: float, rng: random.Random
    ) -> Action:
        """Epsilon-uniform exploration, otherwise a sample from policy_full."""
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
        kid, _, _ = self._ids(key)
        return Action(self._select_id(kid, epsilon, rng))

    def _select_id(self, kid: int, epsilon: float, rng: random.Random) -> int:
        if epsilon > 0.0 and rng.random() < epsilon:
            return rng.randrange(N_ACTIONS)
        row = self._rows.get(kid)
        if row is None:
            return rng.randrange(N_ACTIONS)
        top = max(row)
        e0 = math.exp(row[0] - top)
        e1 = math.exp(row[1] - top)
        e2 = math.exp(row[2] - top)
        u = rng.random() * (e0 + e1 + e2)
        if u < e0:
            return 0
        if u < e0 + e1:
            return 1
        return 2

    # -- bookkeeping ----------------------------------------------------

    @property
    def entry_count(self) -> int:
        return N_ACTIONS * len(self._rows)

    def keys(self) -> Iterator[JointHistoryKey]:
        for kid in self._rows:
            turn, obj, ego, opp = self._decode(kid)
            yield JointHistoryKey(self.seat, turn, Objective(obj), ego, opp)

    def marginal_drift(self) -> float:
        """Max |incremental sum - recomputed sum| over all ego keys/actions."""
        fresh: dict[int, list[float]] = {}
        base = self._code_base
        for kid, row in self._rows.items():
            eid = kid // base
            acc = fresh.get(eid)
            if acc is None:
                acc = [0.0, 0.0, 0.0]
                fresh[eid] = acc
            for a in range(N_ACTIONS):
                acc[a] += row[a]
        drift = 0.0
        for eid in set(fresh) | set(self._marginal):
            got = self._marginal.get(eid, [0.0, 0.0, 0.0])
            want = fresh.get(eid, [0.0, 0.0, 0.0])
            for a in range(N_ACTIONS):
                drift = max(drift, abs(got[a] - want[a]))
        return drift

    def _rebuild_marginals(self) -> None:
        self._marginal.clear()
        base = self._code_base
        for kid in sorted(self._rows):
            row = self._rows[kid]
            eid = kid // base
            sums = self._marginal.get(eid)
            if sums is None:
                sums = [0.0, 0.0, 0.0]
                self._marginal[eid] = sums
            for a in range(N_ACTIONS):
                sums[a] += row[a]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseQTable):
            return NotImplemented
        return (
            self.seat == other.seat
            and self.phi == other.phi
            and self.reward_mode == other.reward_mode
            and self.history_len == other.history_len
            and self.config == other.config
            and self.marginal_divisor == other.marginal_divisor
            and self._rows == other._rows
        )

    def __repr__(self) -> str:
        return (
            f"SparseQTable(seat={self.seat.name}, phi={self.phi}, mode={self.reward_mode}, "
            f"history={self.history_len}, entries={self.entry_count})"
        )


class SnapshotFormatError(ValueError):
    """Raised when a Q-table snapshot cannot be parsed."""


def save_table(table: SparseQTable, destination: Union[str, "IO[str]"]) -> None:
    """Write a snapshot: one header line, then records sorted by key.

    Record lines are ``turn objective ego-cols opp-cols action q`` with the
    column windows comma-joined and Q-values as shortest round-trip
    decimals, so identical tables produce identical bytes.
    """
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            save_table(table, fh)
        return
    out = destination
    cfg = table.config
    out.write(
        f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} seat={table.seat.name} phi={table.phi!r} "
        f"mode={table.reward_mode} history={table.history_len} divisor={table.marginal_divisor} "
        f"rows={cfg.rows} cols={cfg.cols} turns={cfg.turns} entries={table.entry_count}\n"
    )
    decoded = [(table._decode(kid), row) for kid, row in table._rows.items()]
    decoded.sort(key=lambda item: item[0])
    for (turn, obj, ego, opp), row in decoded:
        ego_s = ",".join(map(str, ego))
        opp_s = ",".join(map(str, opp))
        name = OBJECTIVE_NAMES[Objective(obj)]
        for a in range(N_ACTIONS):
            out.write(f"{turn} {name} {ego_s} {opp_s} {a} {row[a]!r}\n")


def load_table(source: Union[str, "IO[str]"]) -> SparseQTable:
    """Read a snapshot written by save_table; round-trips exactly."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return load_table(fh)
    header = source.readline()
    fields = header.split()
    if len(fields) < 2 or fields[0] != SNAPSHOT_MAGIC:
        raise SnapshotFormatError("line 1: not a corridor-te Q-table snapshot")
    if fields[1] != SNAPSHOT_VERSION:
        raise SnapshotFormatError(
            f"line 1: unsupported snapshot version {fields[1]!r} (expected {SNAPSHOT_VERSION})"
        )
    meta = {}
    for tok in fields[2:]:
        if "=" not in tok:
            raise SnapshotFormatError(f"line 1: malformed header field {tok!r}")
        k, v = tok.split("=", 1)
        meta[k] = v
    try:
        config = GridConfig(rows=int(meta["rows"]), cols=int(meta["cols"]), turns=int(meta["turns"]))
        table = SparseQTable(
            seat=Seat[meta["seat"]],
            phi=float(meta["phi"]),
            reward_mode=meta["mode"],
            history_len=int(meta["history"]),
            config=config,
            marginal_divisor=meta.get("divisor", DIVISOR_FULL),
        )
        expected = int(meta["entries"])
    except (KeyError, ValueError) as exc:
        raise SnapshotFormatError(f"line 1: bad header ({exc})") from exc

    count = 0
    for lineno, line in enumerate(source, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise SnapshotFormatError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        try:
            turn = int(parts[0])
            obj = OBJECTIVES_BY_NAME[parts[1]]
            ego = tuple(int(c) for c in parts[2].split(","))
            opp = tuple(int(c) for c in parts[3].split(","))
            action = int(parts[4])
            q = float(parts[5])
        except (KeyError, ValueError) as exc:
            raise SnapshotFormatError(f"line {lineno}: {exc}") from exc
        if not 0 <= action < N_ACTIONS:
            raise SnapshotFormatError(f"line {lineno}: action index {action} out of range")
        key = JointHistoryKey(table.seat, turn, obj, ego, opp)
        try:
            kid, _, _ = table._ids(key)
        except ValueError as exc:
            raise SnapshotFormatError(f"line {lineno}: {exc}") from exc
        row = table._rows.get(kid)
        if row is None:
            row = [0.0, 0.0, 0.0]
            table._rows[kid] = row
        row[action] = q
        count += 1
    if count != expected:
        raise SnapshotFormatError(f"expected {expected} records, found {count}")
    table._rebuild_marginals()
    return table


__all__ = [
    "JointHistoryKey",
    "EgoHistoryKey",
    "SparseQTable",
    "SnapshotFormatError",
    "possible_history_counts",
    "enumerate_opponent_histories",
    "save_table",
    "load_table",
    "N_ACTIONS",
    "LOG2_3",
    "REWARD_MODES",
    "REWARD_MODE_TE",
    "REWARD_MODE_ENTROPY",
    "REWARD_MODE_NONE",
    "MARGINAL_DIVISORS",
    "DIVISOR_FULL",
    "DIVISOR_TURN",
]
