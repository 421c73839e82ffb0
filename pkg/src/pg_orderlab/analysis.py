"""Post-hoc diagnostics: rate fits, landscape grids, one-sided error."""

from dataclasses import dataclass

import numpy as np

from .bandit import policy_of
from .linalg import least_squares

GAP_FLOOR = 1e-14
MIN_FIT_SAMPLES = 10
MODELS = ("exp", "power")


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class RateFit:
    model: str  # "exp": log gap ~ t, "power": log gap ~ log t
    slope: float
    intercept: float
    r_squared: float
    window: tuple[int, int]
    n_points: int


def fit_rate_arrays(t, gap, model="exp", window_fraction=0.5):
    """Least-squares line through the transformed tail of a gap sequence."""
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, not {model!r}")
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must be in (0, 1]")
    t = np.asarray(t, dtype=float)
    gap = np.asarray(gap, dtype=float)
    n = t.shape[0]
    start = n - max(1, int(round(window_fraction * n)))
    t, gap = t[start:], gap[start:]
    keep = gap > GAP_FLOOR
    if model == "power":
        keep &= t > 0
    t, gap = t[keep], gap[keep]
    if t.shape[0] < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_FIT_SAMPLES} positive-gap samples in the fit window, got {t.shape[0]}"
        )
    x = t if model == "exp" else np.log(t)
    y = np.log(gap)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    r2 = min(1.0, max(0.0, r2))
    return RateFit(model, float(slope), float(intercept), r2, (int(t[0]), int(t[-1])), int(t.shape[0]))


def fit_rate(traj, model="exp", window_fraction=0.5):
    return fit_rate_arrays(traj.t, traj.gap, model, window_fraction)


@dataclass(frozen=True)
class LandscapeGrid:
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray  # values[i, j] at (axis1[i], axis2[j])
    dims: tuple[int, int]


def sample_landscape(inst, center, half_width, n, dims=(0, 1)):
    """Expected reward on an n x n grid over two coordinates of theta."""
    center = np.asarray(center, dtype=float)
    i, j = dims
    if n < 2:
        raise ValueError("grid needs n >= 2")
    if center.shape[0] != inst.d:
        raise ValueError(f"center has length {center.shape[0]}, instance has d={inst.d}")
    if i == j or not (0 <= i < inst.d and 0 <= j < inst.d):
        raise ValueError(f"dims must be two distinct coordinates in [0, {inst.d})")
    axis1 = np.linspace(center[i] - half_width, center[i] + half_width, n)
    axis2 = np.linspace(center[j] - half_width, center[j] + half_width, n)
    thetas = np.broadcast_to(center, (n, n, inst.d)).copy()
    thetas[:, :, i] = axis1[:, None]
    thetas[:, :, j] = axis2[None, :]
    scores = thetas @ inst.X.T
    scores -= scores.max(axis=-1, keepdims=True)
    w = np.exp(scores)
    pi = w / w.sum(axis=-1, keepdims=True)
    # Mixture of rewards cannot leave [min r, max r]; clip float spill-over.
    values = np.clip(pi @ inst.r, inst.r.min(), inst.r.max())
    return LandscapeGrid(axis1, axis2, values, (i, j))


def one_sided_error(inst, theta):
    """r(a*) - pi^T r - (r_hat(a*) - pi^T r_hat), with r_hat the projection of r."""
    _, r_hat, _ = least_squares(inst.X, inst.r)
    pi = policy_of(inst, theta)
    best = int(np.argmax(inst.r))
    return float((inst.r[best] - pi @ inst.r) - (r_hat[best] - pi @ r_hat))
