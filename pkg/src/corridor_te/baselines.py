"""Rule-based opponents spanning zero to full knowledge of the other side.

Three social-force style policies plus the uniform-random agent:

* Pure-SF reacts to the opponent's *current* column, stepping toward it
  (meet) or away from it (pass).
* PK-SF knows the opponent's objective, predicts its next column by
  assuming it plays Pure-SF, and reacts to the prediction.
* IPK-SF is PK-SF that is only informed 80% of the time; otherwise it
  guesses the opponent's next column uniformly among reachable columns.

All are memoryless, act on the current columns only, and never touch a
Q-table. Ties are broken uniformly at random.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .env import Action, Objective, clamp_col, reachable_cols


class BaselineKind(Enum):
    RANDOM = "random"
    PURE_SF = "pure-sf"
    IPK_SF = "ipk-sf"
    PK_SF = "pk-sf"


@dataclass(frozen=True)
class BaselineSpec:
    kind: BaselineKind
    p_know: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_know <= 1.0:
            raise ValueError(f"p_know must be in [0, 1], got {self.p_know}")


def random_action(rng: random.Random) -> Action:
    return Action(rng.randrange(3))


def _pick(best: list[Action], rng: random.Random) -> Action:
    if len(best) == 1:
        return best[0]
    return best[rng.randrange(len(best))]


def _best_actions(own_col: int, cols: int, objective: Objective, target: float) -> list[Action]:
    """Actions minimising (meet) or maximising (pass) |next own col - target|."""
    scores = [abs(clamp_col(own_col + a.delta, cols) - target) for a in Action]
    pick = min(scores) if objective == Objective.MEET else max(scores)
    return [a for a in Action if scores[int(a)] == pick]


def _expected_best_actions(
    own_col: int, cols: int, objective: Objective, targets: list[tuple[int, float]]
) -> list[Action]:
    """Same as _best_actions but against a weighted set of predicted columns."""
    scores = []
    for a in Action:
        nxt = clamp_col(own_col + a.delta, cols)
        scores.append(sum(w * abs(nxt - t) for t, w in targets))
    pick = min(scores) if objective == Objective.MEET else max(scores)
    return [a for a in Action if abs(scores[int(a)] - pick) < 1e-12]


def pure_sf_action(
    own_col: int,
    opp_col: int,
    objective: Objective,
    rng: random.Random,
    cols: int = 5,
) -> Action:
    """Step toward (meet) or away from (pass) the opponent's current column."""
    return _pick(_best_actions(own_col, cols, objective, opp_col), rng)


def _predicted_opponent_cols(
    own_col: int, opp_col: int, opp_objective: Objective, cols: int
) -> list[tuple[int, float]]:
    """Next-column distribution of a Pure-SF opponent, ties split evenly."""
    best = _best_actions(opp_col, cols, opp_objective, own_col)
    w = 1.0 / len(best)
    spread: dict[int, float] = {}
    for a in best:
        c = clamp_col(opp_col + a.delta, cols)
        spread[c] = spread.get(c, 0.0) + w
    return sorted(spread.items())


def predictive_sf_action(
    own_col: int,
    opp_col: int,
    own_objective: Objective,
    opp_objective: Objective | None,
    rng: random.Random,
    cols: int = 5,
) -> Action:
    """React to the opponent's predicted next column rather than its current one.

    With the objective known the prediction assumes a Pure-SF opponent
    (tie-broken by expectation); with it unknown (None) the prediction is a
    uniform draw over the opponent's reachable next columns.
    """
    if opp_objective is None:
        options = reachable_cols(opp_col, cols)
        guess = options[rng.randrange(len(options))]
        targets = [(guess, 1.0)]
    else:
        targets = _predicted_opponent_cols(own_col, opp_col, opp_objective, cols)
    return _pick(_expected_best_actions(own_col, cols, own_objective, targets), rng)


def baseline_action(
    spec: BaselineSpec,
    own_col: int,
    opp_col: int,
    own_objective: Objective,
    opp_objective: Objective,
    rng: random.Random,
    cols: int = 5,
) -> Action:
    """Dispatch one move for any baseline kind.

    The true opponent objective is always supplied by the episode runner;
    whether the policy gets to see it is this function's business.
    """
    kind = spec.kind
    if kind == BaselineKind.RANDOM:
        return random_action(rng)
    if kind == BaselineKind.PURE_SF:
        return pure_sf_action(own_col, opp_col, own_objective, rng, cols)
    if kind == BaselineKind.PK_SF:
        known = opp_objective
    elif kind == BaselineKind.IPK_SF:
        if spec.p_know >= 1.0:
            informed = True
        elif spec.p_know <= 0.0:
            informed = False
        else:
            informed = rng.random() < spec.p_know
        known = opp_objective if informed else None
    else:
        raise ValueError(f"unknown baseline kind {kind!r}")
    return predictive_sf_action(own_col, opp_col, own_objective, known, rng, cols)
