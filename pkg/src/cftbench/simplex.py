"""Dense two-phase revised simplex with Bland's pivoting rule.

Solves ``max c @ x  s.t.  A @ x == b, x >= 0`` for problems with a handful of
rows and up to a few thousand columns. Bland's rule (smallest eligible index
enters, ties in the ratio test broken by smallest basic index) makes the pivot
sequence deterministic and excludes cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SolverError


@dataclass
class LpResult:
    x: np.ndarray
    value: float
    duals: np.ndarray
    basis: np.ndarray
    iterations: int
    residual: float


def _solve_phase(A, b, c, basis, allowed, tol, max_iter):
    m, n = A.shape
    basis = basis.copy()
    for it in range(max_iter):
        B = A[:, basis]
        xB = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        rc = c - A.T @ y
        rc[basis] = 0.0
        rc[~allowed] = 0.0
        cand = np.flatnonzero(rc > tol)
        if cand.size == 0:
            return basis, xB, y, it
        j = cand[0]
        d = np.linalg.solve(B, A[:, j])
        rows = np.flatnonzero(d > tol)
        if rows.size == 0:
            raise SolverError("linear program is unbounded")
        ratios = np.maximum(xB[rows], 0.0) / d[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        leave = ties[np.argmin(basis[ties])]
        basis[leave] = j
    raise SolverError(f"simplex did not terminate within {max_iter} pivots")


def simplex_max(c, A, b, tol=1e-11, max_iter=50_000):
    """Maximize ``c @ x`` subject to ``A @ x == b`` and ``x >= 0``."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    # phase one: artificial identity block, minimize their sum
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), -np.ones(m)])
    allowed = np.ones(n + m, dtype=bool)
    basis = np.arange(n, n + m)
    basis, xB, _, it1 = _solve_phase(A1, b, c1, basis, allowed, tol, max_iter)
    infeas = float(xB[basis >= n].sum())
    if infeas > 1e-9 * max(1.0, np.abs(b).max()):
        raise SolverError(f"linear program is infeasible (phase-one residual {infeas:.3e})")

    # drive zero-level artificials out of the basis; drop rows that are redundant
    keep_rows = np.ones(m, dtype=bool)
    for pos in range(m):
        if basis[pos] < n:
            continue
        B = A1[:, basis]
        row = np.linalg.solve(B, A1[:, :n])[pos]
        row[basis[basis < n]] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-9)
        if cand.size:
            basis[pos] = cand[0]
        else:
            keep_rows[pos] = False
    A2 = A[keep_rows]
    b2 = b[keep_rows]
    basis2 = basis[keep_rows]
    basis2, xB, y, it2 = _solve_phase(A2, b2, c, basis2, np.ones(n, dtype=bool), tol, max_iter)

    x = np.zeros(n)
    x[basis2] = np.maximum(xB, 0.0)
    duals = np.zeros(m)
    duals[keep_rows] = y
    duals[flip] *= -1
    A_orig = np.array(A)
    A_orig[flip] *= -1
    b_orig = np.where(flip, -b, b)
    residual = float(np.abs(A_orig @ x - b_orig).max())
    return LpResult(x, float(c @ x), duals, basis2, it1 + it2, residual)
