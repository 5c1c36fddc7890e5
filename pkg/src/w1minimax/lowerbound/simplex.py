"""Dense two-phase tableau simplex with Bland's rule.

Solves ``max/min c.x  s.t.  A x = b, x >= 0``. Deterministic: the entering
variable is the lowest-index improving column, ties in the ratio test go to the
lowest-index basic variable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    x: np.ndarray | None
    objective: float
    basis: list
    rows: list  # indices of the constraint rows kept after dropping redundant ones
    iterations: int


def _pivot(T: np.ndarray, basis: list, r: int, c: int) -> None:
    T[r] /= T[r, c]
    for i in range(T.shape[0]):
        if i != r and T[i, c] != 0.0:
            T[i] -= T[i, c] * T[r]
    basis[r] = c


def _run(T, basis, allowed, tol, max_iter):
    """Minimize with reduced costs in the last row. Returns (status, iterations)."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        red = T[-1, :-1]
        enter = next((j for j in allowed if red[j] < -tol), None)
        if enter is None:
            return "optimal", it
        col = T[:m, enter]
        best, leave = None, None
        for i in range(m):
            if col[i] > tol:
                ratio = T[i, -1] / col[i]
                if best is None or ratio < best - tol or (abs(ratio - best) <= tol and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return "unbounded", it
        _pivot(T, basis, leave, enter)
    return "iteration-limit", max_iter


def simplex(c, A, b, maximize: bool = False, tol: float = 1e-11, max_iter: int = 100_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    cost = -c if maximize else c.copy()

    # phase I: artificials n..n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status, it1 = _run(T, basis, range(n), tol, max_iter)
    if status == "iteration-limit":
        return LPResult(status, None, np.nan, basis, list(range(m)), it1)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -T[-1, -1] > 1e-9 * scale:
        return LPResult("infeasible", None, np.nan, basis, list(range(m)), it1)

    # drive artificials out of the basis, dropping redundant rows
    rows = list(range(m))
    i = 0
    while i < len(basis):
        if basis[i] >= n:
            cand = [j for j in range(n) if abs(T[i, j]) > tol]
            if cand:
                _pivot(T, basis, i, cand[0])
            else:
                T = np.delete(T, i, axis=0)
                del basis[i]
                del rows[i]
                continue
        i += 1

    # phase II
    mm = len(basis)
    T2 = np.zeros((mm + 1, n + 1))
    T2[:mm, :n] = T[:mm, :n]
    T2[:mm, -1] = T[:mm, -1]
    cb = cost[basis]
    T2[-1, :n] = cost - cb @ T2[:mm, :n]
    T2[-1, -1] = -cb @ T2[:mm, -1]
    status, it2 = _run(T2, basis, range(n), tol, max_iter)
    x = np.zeros(n)
    x[basis] = T2[:mm, -1]
    obj = float(c @ x)
    return LPResult(status, x if status == "optimal" else None, obj, list(basis), rows, it1 + it2)
