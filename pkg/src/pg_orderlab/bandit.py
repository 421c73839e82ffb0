"""Finite-arm bandits with log-linear policies.

A policy here is a plain probability vector and parameters are plain
``theta`` vectors; the instance carries the feature matrix ``X`` (K x d) and
the exact reward vector ``r``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, RankDeficientError, as_matrix, as_vector, first_dependent_column, lambda_max


class InstanceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BanditInstance:
    X: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        r = as_vector(self.r, "r")
        K, d = X.shape
        if r.shape[0] != K:
            raise InstanceError(f"X has {K} rows but r has {r.shape[0]} entries")
        if d >= K:
            raise InstanceError(f"requires d < K (got K={K}, d={d})")
        dep = first_dependent_column(X)
        if dep is not None:
            raise InstanceError(str(RankDeficientError(dep)))
        if np.all(r == r[0]):
            raise InstanceError("reward vector is constant; need at least two distinct rewards")
        X.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "r", r)

    @property
    def K(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def r_max(self):
        return float(self.r.max())

    @property
    def optimal_actions(self):
        return np.flatnonzero(self.r == self.r.max())

    @property
    def optimal_action(self):
        """Index of the unique best action, or None when the best reward is tied."""
        best = self.optimal_actions
        return int(best[0]) if best.size == 1 else None

    def __eq__(self, other):
        if not isinstance(other, BanditInstance):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.r, other.r)

    def __hash__(self):
        return hash((self.X.tobytes(), self.r.tobytes(), self.X.shape))


def softmax(scores):
    z = np.asarray(scores, dtype=float)
    e = np.exp(z - z.max())
    return e / e.sum()


def _theta(inst, theta):
    theta = as_vector(theta, "theta")
    if theta.shape[0] != inst.d:
        raise DimensionError(f"theta has length {theta.shape[0]}, instance has d={inst.d}")
    return theta


def policy_of(inst, theta):
    return softmax(inst.X @ _theta(inst, theta))


def expected_reward(inst, pi):
    return float(np.dot(pi, inst.r))


def suboptimality_gap(inst, pi):
    # Summing nonnegative terms keeps the gap accurate long after pi^T r rounds to r_max.
    return float(np.dot(pi, inst.r_max - inst.r))


def pg_gradient(inst, theta):
    """Exact gradient of theta -> pi_theta^T r, i.e. X^T (diag(pi) - pi pi^T) r."""
    pi = policy_of(inst, theta)
    advantage = (inst.r - inst.r_max) + suboptimality_gap(inst, pi)
    return inst.X.T @ (pi * advantage)


def covariance(pi, x, y):
    pi, x, y = np.asarray(pi, float), np.asarray(x, float), np.asarray(y, float)
    if not (pi.shape == x.shape == y.shape):
        raise DimensionError("policy and vectors must share length K")
    return float(np.dot(pi * x, y) - np.dot(pi, x) * np.dot(pi, y))


def covariance_pairwise(pi, x, y):
    """Covariance as a sum over action pairs weighted by pi(i) pi(j)."""
    pi, x, y = np.asarray(pi, float), np.asarray(x, float), np.asarray(y, float)
    if not (pi.shape == x.shape == y.shape):
        raise DimensionError("policy and vectors must share length K")
    total = 0.0
    K = pi.shape[0]
    for i in range(K - 1):
        j = slice(i + 1, K)
        total += pi[i] * np.sum(pi[j] * (x[i] - x[j]) * (y[i] - y[j]))
    return float(total)


def smoothness_beta(inst):
    return 4.5 * float(np.abs(inst.r).max()) * lambda_max(inst.X.T @ inst.X)


def safe_step_size(inst):
    """Largest constant step for which every PG step provably improves the value."""
    denom = 9.0 * float(np.abs(inst.r).max()) * lambda_max(inst.X.T @ inst.X)
    # Features so small that X^T X underflows: no finite step can be unsafe.
    return 4.0 / denom if denom > 0 else math.inf
