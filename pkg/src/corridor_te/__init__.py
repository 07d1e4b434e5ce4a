"""Transfer-entropy reward shaping in the corridor dilemma.

Self-play tabular Q-learning with information-theoretic reward
augmentation, rule-based social-force baselines, evaluation metrics, and
a turn-based game service for playing against the trained agents.
"""

__version__ = "0.1.0"

from .env import Action, GridConfig, Objective, Outcome, Seat  # noqa: F401
from .qtable import JointHistoryKey, SparseQTable, load_table, save_table  # noqa: F401
from .training import ExperimentConfig, QLearnerSpec, run_experiment  # noqa: F401
