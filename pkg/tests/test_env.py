import random
from collections import Counter

import pytest

from corridor_te.env import (
    Action,
    EnvState,
    GridConfig,
    Objective,
    Outcome,
    Seat,
    clamp_col,
    objective_reward,
    outcome,
    reachable_cols,
    reset,
    step,
)

GRID = GridConfig()


def make_state(turn=5, p1_col=2, p2_col=2, p1_obj=Objective.MEET, p2_obj=Objective.MEET):
    return EnvState(GRID, turn, p1_col, p2_col, p1_obj, p2_obj)


def test_grid_config_invariants():
    with pytest.raises(ValueError):
        GridConfig(rows=10, cols=5, turns=5)
    with pytest.raises(ValueError):
        GridConfig(rows=11, cols=1, turns=5)
    GridConfig(rows=7, cols=3, turns=3)


def test_reset_is_deterministic_per_seed():
    assert reset(GRID, 123) == reset(GRID, 123)
    assert reset(GRID, 123) != reset(GRID, 124) or True  # different seeds may collide


def test_reset_rows_and_turn():
    state = reset(GRID, 5)
    assert state.turn == 0
    assert state.p1_row == 0
    assert state.p2_row == 10
    assert not state.terminal


def test_reset_start_columns_uniform():
    rng = random.Random(9)
    counts1 = Counter()
    counts2 = Counter()
    n = 100_000
    for _ in range(n):
        s = reset(GRID, rng)
        counts1[s.p1_col] += 1
        counts2[s.p2_col] += 1
    for col in range(5):
        assert counts1[col] / n == pytest.approx(0.2, abs=0.01)
        assert counts2[col] / n == pytest.approx(0.2, abs=0.01)


def test_step_straight_and_clamping():
    s = make_state(turn=0, p1_col=2, p2_col=0)
    nxt = step(s, Action.STRAIGHT, Action.LEFT)
    assert nxt.p1_col == 2  # straight keeps the column
    assert nxt.p2_col == 0  # left at the wall clamps
    assert nxt.turn == 1
    assert nxt.p1_row == 1 and nxt.p2_row == 9


def test_step_reaches_terminal_at_middle_row():
    s = make_state(turn=4, p1_col=1, p2_col=3)
    nxt = step(s, Action.RIGHT, Action.LEFT)
    assert nxt.turn == 5
    assert nxt.terminal
    assert nxt.p1_row == nxt.p2_row == 5


def test_step_on_terminal_raises():
    with pytest.raises(ValueError):
        step(make_state(turn=5), Action.STRAIGHT, Action.STRAIGHT)


def test_outcome_rules():
    assert outcome(make_state(p1_col=3, p2_col=3)) == Outcome.MEET
    assert outcome(make_state(p1_col=0, p2_col=4)) == Outcome.PASS
    with pytest.raises(ValueError):
        outcome(make_state(turn=2))


def test_outcome_meet_rate_for_independent_uniform_columns():
    rng = random.Random(3)
    n = 100_000
    meets = sum(1 for _ in range(n) if rng.randrange(5) == rng.randrange(5))
    assert meets / n == pytest.approx(0.2, abs=0.01)


def test_objective_reward_non_terminal_is_zero():
    s = make_state(turn=3)
    assert objective_reward(s, Seat.P1) == 0.0
    assert objective_reward(s, Seat.P2) == 0.0


def test_objective_reward_terminal_values():
    s = make_state(p1_col=2, p2_col=2, p1_obj=Objective.MEET, p2_obj=Objective.PASS)
    assert objective_reward(s, Seat.P1) == 10.0
    assert objective_reward(s, Seat.P2) == -10.0


def test_competitive_episode_has_one_winner_collaborative_shares():
    competitive = make_state(p1_obj=Objective.MEET, p2_obj=Objective.PASS)
    rewards = {objective_reward(competitive, Seat.P1), objective_reward(competitive, Seat.P2)}
    assert rewards == {10.0, -10.0}
    collaborative = make_state(p1_obj=Objective.PASS, p2_obj=Objective.PASS, p1_col=0, p2_col=3)
    assert objective_reward(collaborative, Seat.P1) == objective_reward(collaborative, Seat.P2)


def test_episode_is_exactly_five_steps_and_stays_in_bounds():
    rng = random.Random(17)
    for _ in range(2000):
        state = reset(GRID, rng)
        steps = 0
        while not state.terminal:
            state = step(state, Action(rng.randrange(3)), Action(rng.randrange(3)))
            steps += 1
            assert 0 <= state.p1_col < 5 and 0 <= state.p2_col < 5
        assert steps == 5


def test_random_play_meet_rate():
    # Uniform columns are stationary under the clamped random walk, so the
    # meet rate stays at 1/cols even with wall clamping.
    rng = random.Random(23)
    n = 100_000
    meets = 0
    for _ in range(n):
        state = reset(GRID, rng)
        while not state.terminal:
            state = step(state, Action(rng.randrange(3)), Action(rng.randrange(3)))
        meets += outcome(state) == Outcome.MEET
    assert meets / n == pytest.approx(0.2, abs=0.015)


def test_clamp_and_reachable_helpers():
    assert clamp_col(-1, 5) == 0
    assert clamp_col(5, 5) == 4
    assert clamp_col(3, 5) == 3
    assert reachable_cols(0, 5) == (0, 1)
    assert reachable_cols(2, 5) == (1, 2, 3)
    assert reachable_cols(4, 5) == (3, 4)
