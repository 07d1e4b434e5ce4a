import io
import itertools
import math
import random

import pytest

from corridor_te.env import Action, GridConfig, Objective, Seat, clamp_col
from corridor_te.info_theory import shannon_entropy, softmax
from corridor_te.qtable import (
    DIVISOR_TURN,
    LOG2_3,
    EgoHistoryKey,
    JointHistoryKey,
    SnapshotFormatError,
    SparseQTable,
    enumerate_opponent_histories,
    load_table,
    possible_history_counts,
    save_table,
)

GRID = GridConfig()


def key(turn, obj, ego, opp, seat=Seat.P1):
    return JointHistoryKey(seat, turn, obj, tuple(ego), tuple(opp))


def set_q(table, k, action, value):
    # alpha=1 with no successor writes the raw value
    table.td_update(k, action, value, None, 1.0, 0.0)


def random_walk(rng, length, cols=5):
    c = rng.randrange(cols)
    seq = [c]
    for _ in range(length - 1):
        c = clamp_col(c + rng.randrange(3) - 1, cols)
        seq.append(c)
    return tuple(seq)


def random_key(rng, table, turn=None):
    turn = rng.randrange(GRID.turns) if turn is None else turn
    length = min(turn, table.history_len) + 1
    return JointHistoryKey(
        table.seat,
        turn,
        Objective(rng.randrange(2)),
        random_walk(rng, length),
        random_walk(rng, length),
    )


# -- history enumeration -------------------------------------------------------


def brute_force_windows(length, cols=5):
    out = [
        seq
        for seq in itertools.product(range(cols), repeat=length)
        if all(abs(a - b) <= 1 for a, b in zip(seq, seq[1:]))
    ]
    return out


def test_possible_history_counts_against_brute_force():
    counts = possible_history_counts(5, 5)
    assert counts == [len(brute_force_windows(n)) for n in range(1, 6)]
    assert counts == [5, 13, 35, 95, 259]


def test_enumerate_opponent_histories_counts():
    ego0 = EgoHistoryKey(Seat.P1, 0, Objective.MEET, (2,))
    m0, it0 = enumerate_opponent_histories(ego0, GRID)
    assert m0 == 5
    assert sorted(it0) == sorted(brute_force_windows(1))

    ego1 = EgoHistoryKey(Seat.P1, 1, Objective.MEET, (2, 2))
    m1, it1 = enumerate_opponent_histories(ego1, GRID)
    seqs = list(it1)
    assert m1 == 5 * 3 - 2 == 13
    assert len(seqs) == 13
    assert sorted(seqs) == sorted(brute_force_windows(2))
    for seq in seqs:
        assert all(abs(a - b) <= 1 for a, b in zip(seq, seq[1:]))


# -- policies -------------------------------------------------------------------


def test_policy_full_unvisited_is_uniform():
    table = SparseQTable(Seat.P1)
    k = key(0, Objective.MEET, (2,), (3,))
    assert table.policy_full(k) == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-15)


def test_policy_full_matches_softmax():
    table = SparseQTable(Seat.P1)
    k = key(0, Objective.MEET, (2,), (3,))
    set_q(table, k, 2, 1.0)
    p = table.policy_full(k)
    assert p == pytest.approx((0.21194155761708544, 0.21194155761708544, 0.5761168847658291))


def test_policy_full_shift_invariance():
    t1 = SparseQTable(Seat.P1)
    t2 = SparseQTable(Seat.P1)
    k = key(2, Objective.PASS, (1, 2, 3), (4, 4, 3))
    for a, v in enumerate((0.5, -1.0, 2.0)):
        set_q(t1, k, a, v)
        set_q(t2, k, a, v + 7.25)
    assert t1.policy_full(k) == pytest.approx(t2.policy_full(k), abs=1e-12)


def test_policy_marginal_spec_arithmetic_turn_divisor():
    # Two present opponent histories at turn 1 (13 possible windows):
    # marginal Q is the present sum divided by 13.
    table = SparseQTable(Seat.P1, marginal_divisor=DIVISOR_TURN)
    ego = (2, 2)
    set_q(table, key(1, Objective.MEET, ego, (0, 0)), 0, 10.0)
    set_q(table, key(1, Objective.MEET, ego, (0, 1)), 1, 10.0)
    got = table.policy_marginal(EgoHistoryKey(Seat.P1, 1, Objective.MEET, ego))
    assert got == pytest.approx(softmax((10 / 13, 10 / 13, 0.0)), abs=1e-12)


def test_policy_marginal_full_divisor_uses_max_length_count():
    table = SparseQTable(Seat.P1)  # default "full" divisor: 259 everywhere
    ego = (2, 2)
    set_q(table, key(1, Objective.MEET, ego, (0, 0)), 0, 10.0)
    got = table.policy_marginal(EgoHistoryKey(Seat.P1, 1, Objective.MEET, ego))
    assert got == pytest.approx(softmax((10 / 259, 0.0, 0.0)), abs=1e-12)


def test_policy_marginal_constant_across_histories_equals_full():
    table = SparseQTable(Seat.P1, marginal_divisor=DIVISOR_TURN)
    ego = (3, 3)
    ego_key = EgoHistoryKey(Seat.P1, 1, Objective.PASS, ego)
    _, hists = enumerate_opponent_histories(ego_key, GRID)
    joint_keys = [key(1, Objective.PASS, ego, opp) for opp in hists]
    for jk in joint_keys:
        for a, v in enumerate((1.0, -0.5, 0.25)):
            set_q(table, jk, a, v)
    marginal = table.policy_marginal(ego_key)
    for jk in joint_keys:
        assert marginal == pytest.approx(table.policy_full(jk), abs=1e-12)


def test_policy_marginal_empty_table_uniform():
    table = SparseQTable(Seat.P2)
    ego = EgoHistoryKey(Seat.P2, 3, Objective.MEET, (0, 1, 2, 2))
    assert table.policy_marginal(ego) == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-15)


# -- transfer entropy and shaped rewards --------------------------------------


def test_step_te_zero_when_q_ignores_opponent():
    table = SparseQTable(Seat.P1, marginal_divisor=DIVISOR_TURN)
    ego = (1, 2)
    ego_key = EgoHistoryKey(Seat.P1, 1, Objective.MEET, ego)
    _, hists = enumerate_opponent_histories(ego_key, GRID)
    for opp in hists:
        for a, v in enumerate((3.0, 0.0, -1.0)):
            set_q(table, key(1, Objective.MEET, ego, opp), a, v)
    for opp in ((0, 0), (2, 3), (4, 4)):
        assert table.step_te(key(1, Objective.MEET, ego, opp)) == pytest.approx(0.0, abs=1e-12)


def test_step_te_two_history_example_against_brute_force():
    table = SparseQTable(Seat.P1, marginal_divisor=DIVISOR_TURN)
    ego = (2, 2)
    k1 = key(1, Objective.MEET, ego, (0, 0))
    k2 = key(1, Objective.MEET, ego, (0, 1))
    set_q(table, k1, 0, 10.0)
    set_q(table, k2, 1, 10.0)
    # independent entropy arithmetic on explicitly-formed distributions
    p_minus = softmax((10 / 13, 10 / 13, 0.0))
    p_plus = softmax((10.0, 0.0, 0.0))
    want = shannon_entropy(p_minus) - shannon_entropy(p_plus)
    assert table.step_te(k1) == pytest.approx(want, abs=1e-12)
    assert abs(table.step_te(k1)) <= LOG2_3


def test_step_te_boundary_magnitude():
    # Three symmetric opponent histories keep the marginal exactly uniform
    # while each full policy is essentially deterministic.
    table = SparseQTable(Seat.P1)
    ego = (2,) * 5
    opps = ((3,) * 5, (3, 3, 3, 3, 4), (3, 3, 3, 3, 2))
    for action, opp in enumerate(opps):
        set_q(table, key(4, Objective.MEET, ego, opp), action, 500.0)
    te = table.step_te(key(4, Objective.MEET, ego, opps[0]))
    assert te == pytest.approx(LOG2_3, abs=1e-2)
    assert te <= LOG2_3 + 1e-12


def test_shaped_reward_phi_zero_identity():
    table = SparseQTable(Seat.P1, phi=0.0)
    rng = random.Random(4)
    for _ in range(50):
        k = random_key(rng, table)
        set_q(table, k, rng.randrange(3), rng.uniform(-10, 10))
        assert table.shaped_reward(k, 3.5) == 3.5


def test_shaped_reward_boundaries_from_entropies():
    pos = SparseQTable(Seat.P1, phi=10.0)
    neg = SparseQTable(Seat.P1, phi=-10.0)
    r = 2.0
    assert pos.shaped_from_entropies(LOG2_3, 0.0, r) == pytest.approx(r + 10.0, abs=1e-12)
    assert neg.shaped_from_entropies(LOG2_3, 0.0, r) == pytest.approx(r - 10.0, abs=1e-12)


def test_shaped_reward_te_mode_matches_step_te():
    table = SparseQTable(Seat.P1, phi=10.0)
    rng = random.Random(5)
    for _ in range(50):
        k = random_key(rng, table)
        set_q(table, k, rng.randrange(3), rng.uniform(-10, 10))
        want = 10.0 * table.step_te(k) / LOG2_3 + 1.0
        assert table.shaped_reward(k, 1.0) == pytest.approx(want, abs=1e-12)


def test_shaped_reward_entropy_mode():
    table = SparseQTable(Seat.P1, phi=10.0, reward_mode="entropy")
    k = key(0, Objective.MEET, (2,), (3,))
    # unvisited: H+ is maximal, so the penalty is the full -phi
    assert table.shaped_reward(k, 0.0) == pytest.approx(-10.0, abs=1e-12)
    set_q(table, k, 0, 400.0)
    assert table.shaped_reward(k, 0.0) == pytest.approx(0.0, abs=1e-2)


def test_reward_mode_validation():
    with pytest.raises(ValueError):
        SparseQTable(Seat.P1, reward_mode="bogus")
    with pytest.raises(ValueError):
        SparseQTable(Seat.P1, marginal_divisor="bogus")


# -- TD updates -----------------------------------------------------------------


def test_td_update_terminal_examples():
    table = SparseQTable(Seat.P1)
    k = key(4, Objective.MEET, (2,) * 5, (2,) * 5)
    table.td_update(k, 1, 10.0, None, alpha=0.8, gamma=0.8)
    assert table.q_values(k)[1] == pytest.approx(8.0, abs=1e-12)
    table.td_update(k, 1, -10.0, None, alpha=0.8, gamma=0.8)
    assert table.q_values(k)[1] == pytest.approx(0.2 * 8.0 + 0.8 * -10.0, abs=1e-12)


def test_td_update_fixed_point():
    table = SparseQTable(Seat.P1)
    k = key(4, Objective.PASS, (0, 0, 0, 0, 0), (4, 4, 4, 4, 4))
    for _ in range(60):
        table.td_update(k, 0, 7.0, None, alpha=0.8, gamma=0.8)
    assert table.q_values(k)[0] == pytest.approx(7.0, abs=1e-6)


def test_td_update_uses_next_state_max():
    table = SparseQTable(Seat.P1)
    nxt = key(1, Objective.MEET, (2, 2), (3, 3))
    set_q(table, nxt, 2, 5.0)
    set_q(table, nxt, 0, -1.0)
    cur = key(0, Objective.MEET, (2,), (3,))
    table.td_update(cur, 1, 1.0, nxt, alpha=0.5, gamma=0.8)
    assert table.q_values(cur)[1] == pytest.approx(0.5 * (1.0 + 0.8 * 5.0), abs=1e-12)


def test_td_update_changes_exactly_one_entry():
    rng = random.Random(6)
    table = SparseQTable(Seat.P1)
    for _ in range(200):
        before = {kid: list(row) for kid, row in table._rows.items()}
        k = random_key(rng, table)
        a = rng.randrange(3)
        table.td_update(k, a, rng.uniform(-10, 10), None, alpha=0.8, gamma=0.8)
        after = {kid: list(row) for kid, row in table._rows.items()}
        changed = 0
        for kid in after:
            old_row = before.get(kid, [0.0, 0.0, 0.0])
            changed += sum(1 for x, y in zip(old_row, after[kid]) if x != y)
        assert changed <= 1  # == 0 only if the update happened to be a no-op


def test_td_update_validates_rates():
    table = SparseQTable(Seat.P1)
    k = key(0, Objective.MEET, (2,), (3,))
    with pytest.raises(ValueError):
        table.td_update(k, 0, 1.0, None, alpha=0.0, gamma=0.8)
    with pytest.raises(ValueError):
        table.td_update(k, 0, 1.0, None, alpha=0.8, gamma=1.5)


def test_marginal_sums_stay_consistent_under_random_updates():
    rng = random.Random(77)
    table = SparseQTable(Seat.P2)
    keys = [random_key(rng, table) for _ in range(400)]
    for _ in range(10_000):
        k = keys[rng.randrange(len(keys))]
        nxt = None
        if k.turn < 4 and rng.random() < 0.5:
            nxt = random_key(rng, table, turn=k.turn + 1)
        table.td_update(k, rng.randrange(3), rng.uniform(-10, 10), nxt, alpha=0.8, gamma=0.8)
    assert table.marginal_drift() <= 1e-9


# -- action selection ------------------------------------------------------------


def test_select_action_epsilon_one_is_uniform():
    table = SparseQTable(Seat.P1)
    k = key(0, Objective.MEET, (2,), (3,))
    set_q(table, k, 2, 50.0)  # would dominate softmax, must be ignored at eps=1
    rng = random.Random(8)
    counts = [0, 0, 0]
    n = 100_000
    for _ in range(n):
        counts[int(table.select_action(k, 1.0, rng))] += 1
    for c in counts:
        assert c / n == pytest.approx(1 / 3, abs=0.01)


def test_select_action_softmax_sampling():
    table = SparseQTable(Seat.P1)
    k = key(0, Objective.MEET, (2,), (3,))
    set_q(table, k, 2, 10.0)
    rng = random.Random(9)
    n = 100_000
    hits = sum(1 for _ in range(n) if table.select_action(k, 0.0, rng) == Action.RIGHT)
    assert hits / n == pytest.approx(0.9999092083843409, abs=0.001)


def test_select_action_reproducible():
    table = SparseQTable(Seat.P1)
    k = key(0, Objective.PASS, (1,), (3,))
    set_q(table, k, 0, 1.0)
    seq1 = [table.select_action(k, 0.3, random.Random(11)) for _ in range(1)]
    draws1 = [int(a) for a in (table.select_action(k, 0.3, random.Random(42)) for _ in range(20))]
    draws2 = [int(a) for a in (table.select_action(k, 0.3, random.Random(42)) for _ in range(20))]
    assert draws1 == draws2
    assert seq1  # smoke: no exceptions


def test_select_action_validates_epsilon():
    table = SparseQTable(Seat.P1)
    k = key(0, Objective.MEET, (2,), (3,))
    with pytest.raises(ValueError):
        table.select_action(k, -0.1, random.Random(1))
    with pytest.raises(ValueError):
        table.select_action(k, 1.1, random.Random(1))


def test_seat_mismatch_rejected():
    table = SparseQTable(Seat.P1)
    with pytest.raises(ValueError):
        table.policy_full(key(0, Objective.MEET, (2,), (3,), seat=Seat.P2))


def test_key_validation():
    k = key(1, Objective.MEET, (0, 2), (3, 3))
    with pytest.raises(ValueError):
        k.validate(GRID)  # ego jump of 2 columns
    key(1, Objective.MEET, (0, 1), (3, 4)).validate(GRID)
    with pytest.raises(ValueError):
        key(0, Objective.MEET, (5,), (0,)).validate(GRID)
    with pytest.raises(ValueError):
        key(0, Objective.MEET, (1, 1), (0, 0)).validate(GRID)  # longer than turn+1


# -- snapshots --------------------------------------------------------------------


def test_snapshot_empty_round_trip():
    table = SparseQTable(Seat.P2, phi=-10.0, reward_mode="entropy", history_len=3)
    buf = io.StringIO()
    save_table(table, buf)
    loaded = load_table(io.StringIO(buf.getvalue()))
    assert loaded == table
    assert loaded.phi == -10.0
    assert loaded.reward_mode == "entropy"
    assert loaded.history_len == 3


def test_snapshot_random_table_round_trip_byte_identical(tmp_path):
    rng = random.Random(13)
    table = SparseQTable(Seat.P1, phi=10.0)
    for _ in range(5000):
        set_q(table, random_key(rng, table), rng.randrange(3), rng.uniform(-20, 20))
    path1 = str(tmp_path / "a.qtable")
    path2 = str(tmp_path / "b.qtable")
    save_table(table, path1)
    loaded = load_table(path1)
    assert loaded == table
    save_table(loaded, path2)
    assert open(path1, "rb").read() == open(path2, "rb").read()


def test_snapshot_version_mismatch_rejected():
    table = SparseQTable(Seat.P1)
    buf = io.StringIO()
    save_table(table, buf)
    tampered = buf.getvalue().replace(" v1 ", " v9 ", 1)
    with pytest.raises(SnapshotFormatError, match="version"):
        load_table(io.StringIO(tampered))


def test_snapshot_malformed_record_reports_line():
    table = SparseQTable(Seat.P1)
    k = key(0, Objective.MEET, (2,), (3,))
    set_q(table, k, 0, 1.25)
    buf = io.StringIO()
    save_table(table, buf)
    lines = buf.getvalue().splitlines()
    lines[1] = "0 meet 2 3 not-an-action 1.25"
    with pytest.raises(SnapshotFormatError, match="line 2"):
        load_table(io.StringIO("\n".join(lines) + "\n"))


def test_snapshot_entry_count_mismatch_rejected():
    table = SparseQTable(Seat.P1)
    set_q(table, key(0, Objective.MEET, (2,), (3,)), 0, 1.0)
    buf = io.StringIO()
    save_table(table, buf)
    truncated = "\n".join(buf.getvalue().splitlines()[:-1]) + "\n"
    with pytest.raises(SnapshotFormatError, match="records"):
        load_table(io.StringIO(truncated))


def test_snapshot_not_a_snapshot():
    with pytest.raises(SnapshotFormatError, match="line 1"):
        load_table(io.StringIO("just some text\n"))
