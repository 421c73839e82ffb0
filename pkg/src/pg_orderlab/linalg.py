"""Small dense linear algebra used throughout the package.

Everything here operates on numpy float arrays. Matrices are 2-D, vectors
1-D, and all entries must be finite.
"""

import numpy as np
import scipy.linalg

RANK_TOL = 1e-10


class DimensionError(ValueError):
    pass


class RankDeficientError(ValueError):
    """Raised when a matrix that must have full column rank does not.

    ``column`` is the 0-based index of the first column found to be a linear
    combination of the columns before it.
    """

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"rank-deficient feature matrix, column {column + 1}")


def as_matrix(m, name="matrix"):
    a = np.array(m, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_vector(v, name="vector"):
    a = np.array(v, dtype=float)
    if a.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def matvec(m, v):
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise DimensionError(f"cannot multiply {m.shape} matrix by length-{v.shape[0]} vector")
    return m @ v


def _dependent_columns(m, tol):
    """Column indices that add nothing to the span of the columns before them.

    Gaussian elimination with partial pivoting, column by column. A pivot whose
    magnitude is below ``tol`` times the largest entry of ``m`` counts as zero.
    """
    a = np.array(m, dtype=float)
    rows, cols = a.shape
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0:
        return list(range(cols))
    dependent = []
    row = 0
    for j in range(cols):
        if row >= rows:
            dependent.append(j)
            continue
        p = row + int(np.argmax(np.abs(a[row:, j])))
        if abs(a[p, j]) <= tol * scale:
            dependent.append(j)
            continue
        if p != row:
            a[[row, p]] = a[[p, row]]
        factors = a[row + 1:, j] / a[row, j]
        a[row + 1:, j:] -= np.outer(factors, a[row, j:])
        row += 1
    return dependent


def column_rank(m, tol=RANK_TOL):
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    return m.shape[1] - len(_dependent_columns(m, tol))


def first_dependent_column(m, tol=RANK_TOL):
    """0-based index of the first dependent column, or None at full column rank."""
    dep = _dependent_columns(as_matrix(m), tol)
    return dep[0] if dep else None


def least_squares(m, b):
    """Minimise ``||m w - b||_2`` through the normal equations.

    Returns ``(coeffs, projection, residual_norm)``. The Gram system is solved
    with LAPACK's pivoted symmetric-indefinite factorisation.
    """
    m = as_matrix(m)
    b = as_vector(b)
    if m.shape[0] != b.shape[0]:
        raise DimensionError(f"matrix has {m.shape[0]} rows but rhs has length {b.shape[0]}")
    dep = first_dependent_column(m)
    if dep is not None:
        raise RankDeficientError(dep)
    # Unit-scale columns so the Gram matrix neither underflows nor overflows.
    scale = np.abs(m).max(axis=0)
    ms = m / scale
    coeffs = scipy.linalg.solve(ms.T @ ms, ms.T @ b, assume_a="sym") / scale
    projection = m @ coeffs
    return coeffs, projection, float(np.linalg.norm(projection - b))


def lambda_max(m, tol=1e-12, max_iter=10_000, seed=0):
    """Dominant eigenvalue of a symmetric PSD matrix by power iteration.

    The random start is drawn from a fixed seed so results are reproducible.
    """
    m = as_matrix(m)
    n, k = m.shape
    if n != k:
        raise DimensionError(f"lambda_max needs a square matrix, got {m.shape}")
    if n == 0:
        raise DimensionError("lambda_max of an empty matrix")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    mv = m @ v
    rq = float(v @ mv)
    for _ in range(max_iter):
        norm = np.linalg.norm(mv)
        if norm == 0.0:
            return 0.0
        v = mv / norm
        mv = m @ v
        rq_next = float(v @ mv)
        if abs(rq_next - rq) < tol:
            return rq_next
        rq = rq_next
    return rq

