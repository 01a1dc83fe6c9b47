"""Primal active-set method for convex quadratic programs on polyhedra.

Minimizes ``0.5 z'Qz + c'z`` over ``{z : E z <= e, A_eq z = b_eq}`` with Q
positive semidefinite. A phase-1 simplex supplies the starting vertex (or an
infeasibility certificate); zero-curvature descent directions that never hit a
constraint are returned as unbounded rays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from .lp import find_feasible_point

MAX_ITER = 5000


@dataclass
class QpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    ray: Optional[np.ndarray] = None
    farkas: Optional[np.ndarray] = None
    multipliers: Optional[np.ndarray] = None
    iterations: int = 0


def _independent(rows: np.ndarray, candidates, base=None, tol=1e-9):
    """Greedy subset of ``candidates`` whose rows are independent of ``base`` and each other."""
    chosen = []
    stack = np.zeros((0, rows.shape[1])) if base is None else base
    rank = np.linalg.matrix_rank(stack, tol) if stack.shape[0] else 0
    for i in candidates:
        trial = np.vstack([stack, rows[i]])
        r = np.linalg.matrix_rank(trial, tol)
        if r > rank:
            chosen.append(i)
            stack, rank = trial, r
    return chosen


def paired_rows(E: np.ndarray, e: np.ndarray):
    """Split ``E z <= e`` into equality pairs ``(i, j)`` with row j == -row i, and the rest."""
    pairs, used = [], set()
    for i in range(E.shape[0]):
        if i in used:
            continue
        for j in range(i + 1, E.shape[0]):
            if j not in used and np.array_equal(E[j], -E[i]) and e[j] == -e[i]:
                pairs.append((i, j))
                used.update((i, j))
                break
    rest = [i for i in range(E.shape[0]) if i not in used]
    return pairs, rest


def solve_qp(Q, c, E, e, A_eq=None, b_eq=None, x0=None) -> QpResult:
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    d = c.shape[0]
    E = np.asarray(E, dtype=float).reshape(-1, d)
    e = np.asarray(e, dtype=float).reshape(-1)
    A_eq = np.zeros((0, d)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, d)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)

    if x0 is None:
        ph1 = find_feasible_point(E, e, A_eq if A_eq.shape[0] else None, b_eq if A_eq.shape[0] else None)
        if ph1.status == "infeasible":
            return QpResult("infeasible", farkas=ph1.farkas_ub)
        z = ph1.x.copy()
    else:
        z = np.asarray(x0, dtype=float).copy()

    qscale = max(1.0, float(np.max(np.abs(Q), initial=0.0)))
    eq_rows = _independent(A_eq, range(A_eq.shape[0]))
    Aeq = A_eq[eq_rows]
    slack = e - E @ z
    active0 = [i for i in range(E.shape[0]) if abs(slack[i]) <= 1e-9 * (1 + abs(e[i]))]
    working = _independent(E, active0, base=Aeq)

    for it in range(1, MAX_ITER + 1):
        g = Q @ z + c
        AW = np.vstack([Aeq, E[working]])
        basis = null_space(AW) if AW.shape[0] else np.eye(d)
        step = np.zeros(d)
        if basis.shape[1]:
            H = basis.T @ Q @ basis
            r = basis.T @ g
            h, V = np.linalg.eigh(H)
            flat = h <= 1e-10 * qscale
            r_flat = V[:, flat] @ (V[:, flat].T @ r)
            if np.linalg.norm(r_flat) > 1e-9 * max(1.0, np.linalg.norm(g)):
                direction = -basis @ r_flat
                direction /= np.linalg.norm(direction)
                alpha, block = _ratio_test(E, e, z, direction, working)
                if block is None:
                    return QpResult("unbounded", x=z, ray=direction, iterations=it)
                z = z + alpha * direction
                working.append(block)
                continue
            curved = ~flat
            Vc = V[:, curved]
            step = -basis @ (Vc @ ((Vc.T @ r) / h[curved]))

        if np.linalg.norm(step) <= 1e-10 * (1.0 + np.linalg.norm(z)):
            mu = np.linalg.lstsq(AW.T, -g, rcond=None)[0] if AW.shape[0] else np.zeros(0)
            mu_ineq = mu[Aeq.shape[0]:]
            if mu_ineq.size == 0 or mu_ineq.min() >= -1e-9 * max(1.0, np.linalg.norm(g)):
                full = np.zeros(E.shape[0])
                full[working] = np.maximum(mu_ineq, 0.0)
                value = float(0.5 * z @ Q @ z + c @ z)
                return QpResult("optimal", x=z, value=value, multipliers=full, iterations=it)
            working.pop(int(np.argmin(mu_ineq)))
            continue

        alpha, block = _ratio_test(E, e, z, step, working)
        if block is None or alpha >= 1.0:
            z = z + step
        else:
            z = z + alpha * step
            working.append(block)
    raise RuntimeError("active-set QP iteration limit reached")


def _ratio_test(E, e, z, p, working):
    Ep = E @ p
    best, block = np.inf, None
    wset = set(working)
    for i in range(E.shape[0]):
        if i in wset or Ep[i] <= 1e-12 * max(1.0, np.linalg.norm(E[i])) * np.linalg.norm(p):
            continue
        a = max(0.0, (e[i] - E[i] @ z) / Ep[i])
        if a < best:
            best, block = a, i
    return best, block
