"""Checkers for the ordering-based global convergence conditions.

* non-domination of features: x_i^T x_i > x_i^T x_j for every j != i;
* reward order preservation: some w makes Xw rank the actions exactly as r;
* optimal action preservation: the least-squares projection of r keeps the
  best action as its unique argmax.

The first two together are sufficient for Softmax PG to reach the optimum
from any start; the third is necessary and sufficient for NPG.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import least_squares
from .simplex import DegenerateLPError, solve_lp

MARGIN_TOL = 1e-9
COMPARE_TOL = 1e-10


@dataclass(frozen=True)
class OrderPreservationResult:
    feasible: bool
    witness: np.ndarray | None
    margin: float

    @property
    def status(self):
        return "feasible" if self.feasible else "infeasible"


@dataclass(frozen=True)
class ConditionReport:
    non_domination: bool
    violating_pair: tuple[int, int] | None
    order_preservation: OrderPreservationResult
    optimal_action_preserved: bool | None
    r_hat: np.ndarray
    eps_approx: float
    pg_prediction: str  # "guaranteed-global" | "unknown"
    npg_prediction: str  # "global" | "not-global" | "unsupported-tied-optimum"


def check_non_domination(inst, tol=COMPARE_TOL):
    """Return ``(holds, pair)``; ``pair`` is the first 0-based (i, j) violating it."""
    G = inst.X @ inst.X.T
    K = inst.K
    for i in range(K):
        for j in range(K):
            if j != i and not G[i, i] > G[i, j] + tol:
                return False, (i, j)
    return True, None


def consecutive_pairs(r):
    """Pairs (hi, lo) of neighbours after sorting actions by descending reward."""
    order = np.argsort(-np.asarray(r), kind="stable")
    return [(int(order[k]), int(order[k + 1])) for k in range(len(order) - 1)]


def check_order_preservation(inst):
    """Decide, by linear programming, whether some Xw preserves the order of r.

    Maximises the margin eps over w in the unit box subject to
    (x_i - x_j)^T w >= eps for each strictly ordered neighbour pair and
    (x_i - x_j)^T w == 0 for each tied pair. The order is preservable iff the
    optimal eps is positive.
    """
    X, r = inst.X, inst.r
    K, d = X.shape
    strict, tied = [], []
    for hi, lo in consecutive_pairs(r):
        (strict if r[hi] > r[lo] else tied).append(X[hi] - X[lo])

    # Variables: u = w + 1 in [0, 2]^d, then eps = e_plus - e_minus.
    n = d + 2
    c = np.zeros(n)
    c[d], c[d + 1] = 1.0, -1.0
    A_ub, b_ub = [], []
    for D in strict:
        A_ub.append(np.concatenate([-D, [1.0, -1.0]]))
        b_ub.append(-D.sum())
    for k in range(d):
        row = np.zeros(n)
        row[k] = 1.0
        A_ub.append(row)
        b_ub.append(2.0)
    A_eq = [np.concatenate([D, [0.0, 0.0]]) for D in tied]
    b_eq = [D.sum() for D in tied]

    sol = solve_lp(c, A_ub, b_ub, A_eq or None, b_eq or None, max_pivots=10 * (d + K) ** 2)
    if sol.status != "optimal":
        # The box keeps w bounded and u = 1 is always feasible.
        raise DegenerateLPError(f"degenerate LP: solver returned {sol.status}")
    w = sol.x[:d] - 1.0
    margin = float(sol.x[d] - sol.x[d + 1])
    if margin > MARGIN_TOL:
        return OrderPreservationResult(True, w, margin)
    return OrderPreservationResult(False, None, margin)


def preserves_order(r, r_prime, margin=0.0, tie_tol=1e-9):
    """All-pairs check that r_prime orders the actions exactly like r."""
    r, r_prime = np.asarray(r), np.asarray(r_prime)
    K = r.shape[0]
    for i in range(K):
        for j in range(K):
            if r[i] > r[j] and not r_prime[i] - r_prime[j] >= margin:
                return False
            if r[i] == r[j] and abs(r_prime[i] - r_prime[j]) > tie_tol:
                return False
    return True


def check_optimal_action_preservation(inst, tol=COMPARE_TOL):
    """Return ``(preserved, r_hat)``.

    ``preserved`` is None when the best reward is tied, since the condition is
    only defined for a unique best action.
    """
    _, r_hat, _ = least_squares(inst.X, inst.r)
    best = inst.optimal_action
    if best is None:
        return None, r_hat
    others = np.delete(r_hat, best)
    return bool(np.all(r_hat[best] > others + tol)), r_hat


def predict(inst):
    non_dom, pair = check_non_domination(inst)
    order = check_order_preservation(inst)
    oap, r_hat = check_optimal_action_preservation(inst)
    _, _, eps = least_squares(inst.X, inst.r)
    pg = "guaranteed-global" if non_dom and order.feasible else "unknown"
    if oap is None:
        npg = "unsupported-tied-optimum"
    else:
        npg = "global" if oap else "not-global"
    return ConditionReport(
        non_domination=non_dom,
        violating_pair=pair,
        order_preservation=order,
        optimal_action_preserved=oap,
        r_hat=r_hat,
        eps_approx=eps,
        pg_prediction=pg,
        npg_prediction=npg,
    )
