"""Dense two-phase tableau simplex for small linear programs.

Solves::

    maximize    c^T x
    subject to  A_ub x <= b_ub,  A_eq x == b_eq,  x >= 0

Entering variables are chosen by Dantzig's rule (most negative reduced cost).
Once a run of consecutive degenerate pivots shows up, the solver switches to
Bland's rule for the rest of the phase, which cannot cycle.
"""

from dataclasses import dataclass

import numpy as np


class DegenerateLPError(RuntimeError):
    pass


@dataclass
class LPSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None
    pivots: int


class _Tableau:
    def __init__(self, A, b, basis, max_pivots, tol):
        # Last row holds reduced costs; last column the rhs.
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, -1] = b
        self.basis = list(basis)
        self.max_pivots = max_pivots
        self.tol = tol
        self.pivots = 0

    @property
    def m(self):
        return self.T.shape[0] - 1

    def set_objective(self, cost):
        """Install a minimisation cost over the current columns, priced out."""
        self.T[-1, :] = 0.0
        self.T[-1, : cost.shape[0]] = cost
        for i, j in enumerate(self.basis):
            if self.T[-1, j] != 0.0:
                self.T[-1, :] -= self.T[-1, j] * self.T[i, :]

    def pivot(self, row, col):
        if self.pivots >= self.max_pivots:
            raise DegenerateLPError(f"degenerate LP: no optimum after {self.pivots} pivots")
        self.pivots += 1
        T = self.T
        T[row, :] /= T[row, col]
        for i in range(T.shape[0]):
            if i != row and T[i, col] != 0.0:
                T[i, :] -= T[i, col] * T[row, :]
        self.basis[row] = col

    def optimise(self, allowed):
        """Run primal simplex over the columns flagged in ``allowed``.

        Returns "optimal" or "unbounded".
        """
        T, tol = self.T, self.tol
        bland = False
        degenerate_run = 0
        while True:
            reduced = np.where(allowed, T[-1, :-1], 0.0)
            candidates = np.flatnonzero(reduced < -tol)
            if candidates.size == 0:
                return "optimal"
            col = int(candidates[0]) if bland else int(candidates[np.argmin(reduced[candidates])])
            column = T[:-1, col]
            rows = np.flatnonzero(column > tol)
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + tol * max(1.0, abs(best))]
            # Bland: leave on the smallest basic variable index among ties.
            row = int(min(ties, key=lambda i: self.basis[i])) if bland else int(ties[0])
            if best <= tol:
                degenerate_run += 1
                if degenerate_run > self.m:
                    bland = True
            else:
                degenerate_run = 0
            self.pivot(row, col)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_pivots=10_000, tol=1e-11):
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    blocks = []
    if A_ub is not None and len(A_ub):
        blocks.append((np.asarray(A_ub, float).reshape(-1, n), np.asarray(b_ub, float), "ub"))
    if A_eq is not None and len(A_eq):
        blocks.append((np.asarray(A_eq, float).reshape(-1, n), np.asarray(b_eq, float), "eq"))

    rows, rhs, kinds = [], [], []
    for A, b, kind in blocks:
        for a_row, b_i in zip(A, b):
            rows.append(a_row)
            rhs.append(b_i)
            kinds.append(kind)
    m = len(rows)
    if m == 0:
        # Only x >= 0: optimum at 0 unless some c_j > 0.
        if np.any(c > 0):
            return LPSolution("unbounded", None, None, 0)
        return LPSolution("optimal", np.zeros(n), 0.0, 0)

    A = np.array(rows).reshape(m, n)
    b = np.array(rhs)
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    # Slack for each <= row (+1, or -1 once the row was negated to a >= row).
    n_slack = kinds.count("ub")
    S = np.zeros((m, n_slack))
    slack_of = {}
    k = 0
    for i, kind in enumerate(kinds):
        if kind == "ub":
            S[i, k] = sign[i]
            slack_of[i] = n + k
            k += 1

    basis = [None] * m
    for i, col in slack_of.items():
        if sign[i] > 0:
            basis[i] = col
    need_art = [i for i in range(m) if basis[i] is None]
    R = np.zeros((m, len(need_art)))
    first_art = n + n_slack
    for k, i in enumerate(need_art):
        R[i, k] = 1.0
        basis[i] = first_art + k

    full = np.hstack([A, S, R])
    tab = _Tableau(full, b, basis, max_pivots, tol)
    n_total = full.shape[1]
    is_art = np.zeros(n_total, dtype=bool)
    is_art[first_art:] = True

    if need_art:
        cost = np.zeros(n_total)
        cost[first_art:] = 1.0
        tab.set_objective(cost)
        tab.optimise(np.ones(n_total, dtype=bool))
        if -tab.T[-1, -1] > 1e-9 * max(1.0, np.abs(b).max()):
            return LPSolution("infeasible", None, None, tab.pivots)
        # Drive zero-level artificials out of the basis; drop redundant rows.
        i = 0
        while i < tab.m:
            if is_art[tab.basis[i]]:
                entries = np.flatnonzero((np.abs(tab.T[i, :-1]) > tol) & ~is_art)
                if entries.size:
                    tab.pivot(i, int(entries[0]))
                else:
                    tab.T = np.delete(tab.T, i, axis=0)
                    del tab.basis[i]
                    continue
            i += 1

    tab.set_objective(np.concatenate([-c, np.zeros(n_total - n)]))
    status = tab.optimise(~is_art)
    if status == "unbounded":
        return LPSolution("unbounded", None, None, tab.pivots)
    x = np.zeros(n_total)
    for i, j in enumerate(tab.basis):
        x[j] = tab.T[i, -1]
    x = x[:n]
    return LPSolution("optimal", x, float(c @ x), tab.pivots)
