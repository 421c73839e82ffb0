"""Softmax policy gradient and natural policy gradient on linear bandits.

Tools for checking when log-linear policy optimisation reaches the optimal
action: exact condition checks (non-domination, order preservation), fast
PG/NPG runners, rate fits and a reproduction suite.
"""

from .bandit import BanditInstance, InstanceError, expected_reward, pg_gradient, policy_of, softmax
from .conditions import check_non_domination, check_optimal_action_preservation, check_order_preservation, predict
from .instances import builtin, load, names
from .linalg import DimensionError, RankDeficientError
from .optim import RunConfig, Trajectory, run

__version__ = "0.1.0"
