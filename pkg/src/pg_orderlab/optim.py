"""Softmax policy gradient and natural policy gradient runners.

Both algorithms iterate ``theta <- theta + eta * direction`` from a starting
point ``theta1``. For Softmax PG the direction is the exact gradient of the
expected reward; for NPG it is the fixed regression direction
``(X^T X)^{-1} X^T r``, which does not depend on theta.

Long PG runs (10^7 steps on K=4) go through a compiled loop; single steps
are available in plain numpy for tests and interactive use.
"""

import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from .bandit import pg_gradient, policy_of, safe_step_size
from .linalg import as_vector, least_squares

ONE_HOT_TOL = 1e-3
THETA_CAP = 1e8
MAX_DEFAULT_SAMPLES = 10_000

TERMINALS = ("reached-gap-tol", "max-iters", "numerical-failure")


class NumericalFailure(FloatingPointError):
    pass


class StepSizeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NpgDirection:
    w_star: np.ndarray
    r_hat: np.ndarray
    delta_hat: float


@dataclass
class RunConfig:
    algorithm: str
    eta: float
    theta1: np.ndarray
    max_iters: int
    gap_tol: float = 0.0
    record_stride: int | None = None
    enforce_safe_eta: bool = False

    def __post_init__(self):
        if self.algorithm not in ("pg", "npg"):
            raise ValueError(f"algorithm must be 'pg' or 'npg', not {self.algorithm!r}")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.gap_tol < 0:
            raise ValueError("gap_tol must be nonnegative")
        if self.record_stride is None:
            self.record_stride = default_stride(self.max_iters)
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")
        self.theta1 = as_vector(self.theta1, "theta1")


def default_stride(max_iters):
    if max_iters <= MAX_DEFAULT_SAMPLES:
        return 1
    return math.ceil(max_iters / MAX_DEFAULT_SAMPLES)


@dataclass
class Trajectory:
    """Recorded iterates of a run.

    Sample arrays are aligned: ``t[k]`` is the iteration index (1-based, so
    ``t == 1`` is ``theta1``) of ``theta[k]``, ``value[k]``, ``gap[k]`` and
    ``grad_norm[k]``. The last sample is always the final iterate.
    """

    t: np.ndarray
    theta: np.ndarray
    value: np.ndarray
    gap: np.ndarray
    grad_norm: np.ndarray
    terminal: str
    final_theta: np.ndarray
    final_policy: np.ndarray
    limit_action: int | None
    iterations: int
    support: str

    @property
    def samples(self):
        return list(zip(self.t, self.theta, self.value, self.gap, self.grad_norm))

    @property
    def final_value(self):
        return float(self.value[-1])

    @property
    def final_gap(self):
        return float(self.gap[-1])


def step_pg(inst, theta, eta):
    new = np.asarray(theta, dtype=float) + eta * pg_gradient(inst, theta)
    if not np.all(np.isfinite(new)):
        raise NumericalFailure("PG step produced a non-finite parameter")
    return new


def npg_direction(inst):
    w_star, r_hat, _ = least_squares(inst.X, inst.r)
    best = inst.optimal_action
    if best is None:
        delta_hat = math.nan
    else:
        delta_hat = float(r_hat[best] - np.delete(r_hat, best).max())
    return NpgDirection(w_star, r_hat, delta_hat)


def step_npg(inst, theta, direction, eta):
    return np.asarray(theta, dtype=float) + eta * direction.w_star


@numba.njit(cache=True, nogil=True)
def _iterate(X, r, theta1, eta, use_npg, w_star, max_iters, gap_tol, stride, cap):
    K, d = X.shape
    r_max = r.max()
    n_slots = (max_iters + stride - 1) // stride + 1
    ts = np.empty(n_slots, dtype=np.int64)
    thetas = np.empty((n_slots, d))
    values = np.empty(n_slots)
    gaps = np.empty(n_slots)
    gnorms = np.empty(n_slots)

    theta = theta1.copy()
    nxt = np.empty(d)
    scores = np.empty(K)
    pi = np.empty(K)
    grad = np.empty(d)
    n = 0
    terminal = 1  # 0 gap tol, 1 max iters, 2 numerical failure
    t = 1
    while True:
        top = -np.inf
        for a in range(K):
            s = 0.0
            for j in range(d):
                s += X[a, j] * theta[j]
            scores[a] = s
            if s > top:
                top = s
        z = 0.0
        for a in range(K):
            pi[a] = math.exp(scores[a] - top)
            z += pi[a]
        value = 0.0
        gap = 0.0
        for a in range(K):
            pi[a] /= z
            value += pi[a] * r[a]
            gap += pi[a] * (r_max - r[a])
        gn = 0.0
        for j in range(d):
            g = 0.0
            for a in range(K):
                g += X[a, j] * pi[a] * ((r[a] - r_max) + gap)
            grad[j] = g
            gn += g * g

        stop = False
        if gap < gap_tol:
            terminal = 0
            stop = True
        elif t >= max_iters:
            terminal = 1
            stop = True
        else:
            for j in range(d):
                if use_npg:
                    nxt[j] = theta[j] + eta * w_star[j]
                else:
                    nxt[j] = theta[j] + eta * grad[j]
                if not (abs(nxt[j]) <= cap):
                    terminal = 2
                    stop = True

        if stop or (t - 1) % stride == 0:
            ts[n] = t
            for j in range(d):
                thetas[n, j] = theta[j]
            values[n] = value
            gaps[n] = gap
            gnorms[n] = math.sqrt(gn)
            n += 1
        if stop:
            break
        for j in range(d):
            theta[j] = nxt[j]
        t += 1
    return ts[:n], thetas[:n], values[:n], gaps[:n], gnorms[:n], terminal, t


def classify_support(inst, pi, tol=ONE_HOT_TOL):
    """Return ``(limit_action, support)`` for a final policy.

    ``support`` is "one-hot" when a single action carries more than 1 - tol of
    the mass, "tied-support" when an equal-reward group of several actions does,
    and "spread" otherwise.
    """
    top = int(np.argmax(pi))
    if pi[top] > 1 - tol:
        return top, "one-hot"
    for level in np.unique(inst.r):
        group = inst.r == level
        if group.sum() > 1 and pi[group].sum() > 1 - tol:
            return None, "tied-support"
    return None, "spread"


def run(inst, cfg):
    if cfg.theta1.shape[0] != inst.d:
        raise ValueError(f"theta1 has length {cfg.theta1.shape[0]}, instance has d={inst.d}")
    use_npg = cfg.algorithm == "npg"
    if use_npg:
        w_star = npg_direction(inst).w_star
    else:
        w_star = np.zeros(inst.d)
        bound = safe_step_size(inst)
        if cfg.eta > bound:
            msg = f"eta={cfg.eta:g} exceeds the monotone-ascent bound {bound:.6g}"
            if cfg.enforce_safe_eta:
                raise ValueError(msg)
            warnings.warn(msg, StepSizeWarning, stacklevel=2)
    if not np.all(np.abs(cfg.theta1) <= THETA_CAP):
        raise ValueError("theta1 is outside the representable range")

    ts, thetas, values, gaps, gnorms, code, t_last = _iterate(
        np.ascontiguousarray(inst.X), np.ascontiguousarray(inst.r), cfg.theta1.copy(),
        float(cfg.eta), use_npg, w_star, int(cfg.max_iters), float(cfg.gap_tol),
        int(cfg.record_stride), THETA_CAP,
    )
    final_theta = thetas[-1].copy()
    final_policy = policy_of(inst, final_theta)
    limit, support = classify_support(inst, final_policy)
    return Trajectory(
        t=ts, theta=thetas, value=values, gap=gaps, grad_norm=gnorms,
        terminal=TERMINALS[code], final_theta=final_theta, final_policy=final_policy,
        limit_action=limit, iterations=int(t_last), support=support,
    )


def policies(inst, thetas):
    """Row-wise softmax policies for an array of parameters (n x d)."""
    scores = np.asarray(thetas) @ inst.X.T
    scores -= scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    return e / e.sum(axis=1, keepdims=True)

