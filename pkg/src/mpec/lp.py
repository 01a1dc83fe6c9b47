"""Dense two-phase simplex with Bland's rule, for the small LPs the kit needs.

Variables are free. Problems are posed as::

    min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq

Infeasible problems come back with a Farkas certificate ``(w_ub, w_eq)``:
``w_ub >= 0``, ``A_ub' w_ub + A_eq' w_eq = 0`` and ``b_ub' w_ub + b_eq' w_eq < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

PIVOT_TOL = 1e-11
COST_TOL = 1e-10
MAX_PIVOTS = 50_000


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    ray: Optional[np.ndarray] = None
    farkas_ub: Optional[np.ndarray] = None
    farkas_eq: Optional[np.ndarray] = None
    pivots: int = 0


def _as_rows(A, b, d):
    if A is None:
        return np.zeros((0, d)), np.zeros(0)
    A = np.asarray(A, dtype=float).reshape(-1, d)
    return A, np.asarray(b, dtype=float).reshape(-1)


class _Tableau:
    def __init__(self, T, basis):
        self.T = T
        self.basis = basis
        self.pivots = 0

    def pivot(self, row, col):
        T = self.T
        T[row] /= T[row, col]
        others = np.arange(T.shape[0]) != row
        T[others] -= np.outer(T[others, col], T[row])
        self.basis[row] = col
        self.pivots += 1

    def run(self, cost, ncols):
        """Bland's rule on columns ``[0, ncols)``. Returns ("optimal", None) or ("unbounded", col)."""
        T = self.T
        while True:
            if self.pivots > MAX_PIVOTS:
                raise RuntimeError("simplex pivot limit reached")
            cb = cost[self.basis]
            rc = cost[:ncols] - cb @ T[:, :ncols]
            candidates = np.flatnonzero(rc < -COST_TOL)
            if candidates.size == 0:
                return "optimal", None
            col = int(candidates[0])
            column = T[:, col]
            pos = np.flatnonzero(column > PIVOT_TOL)
            if pos.size == 0:
                return "unbounded", col
            ratios = T[pos, -1] / column[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            row = int(min(ties, key=lambda r: self.basis[r]))
            self.pivot(row, col)


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None) -> LpResult:
    c = np.asarray(c, dtype=float).reshape(-1)
    d = c.shape[0]
    A_ub, b_ub = _as_rows(A_ub, b_ub, d)
    A_eq, b_eq = _as_rows(A_eq, b_eq, d)
    k, p = A_ub.shape[0], A_eq.shape[0]
    r = k + p

    # columns: x+ (d), x- (d), slacks (k), artificials (r), rhs
    nstruct = 2 * d + k
    T = np.zeros((r, nstruct + r + 1))
    A_all = np.vstack([A_ub, A_eq])
    T[:, :d] = A_all
    T[:, d:2 * d] = -A_all
    T[:k, 2 * d:nstruct] = np.eye(k)
    T[:, -1] = np.concatenate([b_ub, b_eq])
    sign = np.where(T[:, -1] < 0, -1.0, 1.0)
    T[:, :nstruct] *= sign[:, None]
    T[:, -1] *= sign
    T[:, nstruct:nstruct + r] = np.eye(r)
    tab = _Tableau(T, list(range(nstruct, nstruct + r)))

    cost1 = np.zeros(nstruct + r)
    cost1[nstruct:] = 1.0
    tab.run(cost1, nstruct + r)
    infeas = float(cost1[tab.basis] @ T[:, -1])
    scale = max(1.0, float(np.max(np.abs(T[:, -1]), initial=0.0)))
    if infeas > 1e-9 * scale:
        y = cost1[tab.basis] @ T[:, nstruct:nstruct + r]
        w = -sign * y
        return LpResult("infeasible", farkas_ub=w[:k], farkas_eq=w[k:], pivots=tab.pivots)

    # Drive remaining artificials out of the basis; drop redundant rows.
    row = 0
    while row < T.shape[0]:
        if tab.basis[row] >= nstruct:
            nz = np.flatnonzero(np.abs(T[row, :nstruct]) > 1e-9)
            if nz.size:
                tab.pivot(row, int(nz[0]))
            else:
                T = np.delete(T, row, axis=0)
                tab.T = T
                del tab.basis[row]
                continue
        row += 1
    T = tab.T

    cost2 = np.zeros(nstruct + r)
    cost2[:d] = c
    cost2[d:2 * d] = -c
    status, col = tab.run(cost2, nstruct)
    T = tab.T

    xs = np.zeros(nstruct + r)
    xs[tab.basis] = T[:, -1]
    x = xs[:d] - xs[d:2 * d]
    if status == "unbounded":
        dirs = np.zeros(nstruct + r)
        dirs[col] = 1.0
        dirs[tab.basis] = -T[:, col]
        ray = dirs[:d] - dirs[d:2 * d]
        return LpResult("unbounded", x=x, ray=ray, pivots=tab.pivots)
    return LpResult("optimal", x=x, value=float(c @ x), pivots=tab.pivots)


def find_feasible_point(E, e, A_eq=None, b_eq=None) -> LpResult:
    E = np.asarray(E, dtype=float)
    return linprog(np.zeros(E.shape[1]), E, e, A_eq, b_eq)
