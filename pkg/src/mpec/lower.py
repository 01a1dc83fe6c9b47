"""Lower-level equilibrium solvers.

* projections onto orthants, boxes and polyhedra
* projected fixed-point iteration for strongly monotone affine VIs
* semismooth Newton on Fischer-Burmeister equations
* exhaustive complementary-pattern enumeration for LCPs (the ground truth)
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.linalg import null_space

from .errors import InputError, InfeasibleError, MonotonicityError, SizeError, UnsupportedError
from .linalg import classify_matrix, contraction_step
from .lp import linprog
from .model import TAU_FEAS, AffineMpec, GeneralMpec, Polyhedron
from .qp import solve_qp

ENUM_CAP = 14
FIXED_POINT_TOL = 1e-10
FIXED_POINT_CAP = 10_000
NEWTON_TOL = 1e-8
NEWTON_POLISH_TOL = 1e-12
NEWTON_CAP = 200
ARMIJO = 1e-4
MAX_HALVINGS = 40
JAC_REG = 1e-10
DEDUP_TOL = 1e-8


@dataclass(frozen=True)
class Orthant:
    dim: int


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray


Cone = Union[Orthant, Box, Polyhedron]


@dataclass(frozen=True)
class AviInstance:
    """VI(M y + r, C) with the upper-level variable already frozen into ``r``."""

    M: np.ndarray
    r: np.ndarray
    C: Cone

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        r = np.asarray(self.r, dtype=float).reshape(-1)
        if M.shape != (r.shape[0], r.shape[0]):
            raise InputError(f"AviInstance: M shape {M.shape} does not match r length {r.shape[0]}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "r", r)


@dataclass
class LowerSolveResult:
    solutions: list
    status: str  # "unique" | "multiple" | "none" | "not-converged"
    iterations: int = 0
    residual: float = 0.0
    multipliers: Optional[list] = None
    history: list = field(default_factory=list)
    message: str = ""


# --- projections -------------------------------------------------------------

def project_orthant(z) -> np.ndarray:
    return np.maximum(np.asarray(z, dtype=float), 0.0)


def project_box(z, lo, hi) -> np.ndarray:
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise InputError("project_box: lo > hi in some coordinate")
    return np.clip(np.asarray(z, dtype=float), lo, hi)


def project_polyhedron(z, P: Polyhedron) -> np.ndarray:
    """Euclidean projection, as the convex QP ``min 0.5||w||^2 - z'w`` over P."""
    z = np.asarray(z, dtype=float)
    if P.contains(z, tol=0.0):
        return z.copy()
    res = solve_qp(np.eye(z.shape[0]), -z, P.E, P.e)
    if res.status == "infeasible":
        raise InfeasibleError("project_polyhedron: polyhedron is empty")
    return res.x


def project(z, C: Cone) -> np.ndarray:
    if isinstance(C, Orthant):
        return project_orthant(z)
    if isinstance(C, Box):
        return project_box(z, C.lo, C.hi)
    return project_polyhedron(z, C)


def natural_residual_norm(M, r, C: Cone, y) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.linalg.norm(y - project(y - (M @ y + r), C)))


# --- strongly monotone AVI ------------------------------------------------------

def solve_avi(inst: AviInstance, y0=None) -> LowerSolveResult:
    verdict = classify_matrix(inst.M)
    if not verdict.strongly_monotone:
        raise MonotonicityError(
            f"solve_avi needs a positive definite symmetric part (smallest eigenvalue {verdict.modulus:.3g})")
    m = inst.r.shape[0]
    y = project(np.zeros(m) if y0 is None else np.asarray(y0, dtype=float), inst.C)
    if m == 0:
        return LowerSolveResult([y], "unique")
    gamma, rho = contraction_step(inst.M, verdict)
    # distance to the fixed point is at most step * rho / (1 - rho); scale the
    # step threshold so that bound, not just the step, is under FIXED_POINT_TOL
    tol = FIXED_POINT_TOL * min(1.0, 1.0 - rho)
    for it in range(1, FIXED_POINT_CAP + 1):
        y_new = project(y - gamma * (inst.M @ y + inst.r), inst.C)
        step = float(np.linalg.norm(y_new - y))
        y = y_new
        if step <= tol:
            res = natural_residual_norm(inst.M, inst.r, inst.C, y)
            return LowerSolveResult([y], "unique", iterations=it, residual=res)
    res = natural_residual_norm(inst.M, inst.r, inst.C, y)
    return LowerSolveResult([y], "not-converged", iterations=FIXED_POINT_CAP, residual=res,
                            message="fixed-point iteration cap reached")


# --- LCP enumeration --------------------------------------------------------------

def _add_unique(found: list, y: np.ndarray):
    for other in found:
        if np.linalg.norm(other - y) <= DEDUP_TOL:
            return
    found.append(y)


def _singular_pattern(M, r, free, fixed, found):
    """Representatives of a consistent singular pattern's solution polyhedron."""
    Mff = M[np.ix_(free, free)]
    y0 = np.linalg.lstsq(Mff, -r[free], rcond=None)[0]
    if np.linalg.norm(Mff @ y0 + r[free]) > 1e-10 * max(1.0, np.linalg.norm(r)):
        return
    basis = null_space(Mff)
    k = basis.shape[1]
    # y_free = y0 + basis t >= 0 and F_fixed = M_zf y_free + r_fixed >= 0, |t| <= 1
    Mzf = M[np.ix_(fixed, free)]
    A_ub = np.vstack([-basis, -Mzf @ basis, np.eye(k), -np.eye(k)])
    b_ub = np.concatenate([y0, Mzf @ y0 + r[fixed], np.ones(k), np.ones(k)])
    for j, sgn in itertools.product(range(k), (1.0, -1.0)):
        obj = np.zeros(k)
        obj[j] = -sgn
        lp = linprog(obj, A_ub, b_ub)
        if lp.status != "optimal":
            return
        y = np.zeros(M.shape[0])
        y[free] = np.maximum(y0 + basis @ lp.x, 0.0)
        _add_unique(found, y)


def solve_lcp_enumerate(M, r, cap: int = ENUM_CAP) -> LowerSolveResult:
    """All solutions of ``y >= 0, My + r >= 0, y'(My + r) = 0`` by trying every pattern.

    Pattern bit i set means ``F_i = 0`` (y_i free), clear means ``y_i = 0``.
    """
    M = np.asarray(M, dtype=float)
    r = np.asarray(r, dtype=float).reshape(-1)
    m = r.shape[0]
    if M.shape != (m, m):
        raise InputError(f"solve_lcp_enumerate: M shape {M.shape} does not match r length {m}")
    if m > cap:
        raise SizeError(f"solve_lcp_enumerate: m={m} exceeds enumeration cap {cap}")
    found: list = []
    for mask in range(2 ** m):
        free = [i for i in range(m) if mask >> i & 1]
        fixed = [i for i in range(m) if not mask >> i & 1]
        y = np.zeros(m)
        if free:
            Mff = M[np.ix_(free, free)]
            if np.linalg.matrix_rank(Mff) < len(free):
                _singular_pattern(M, r, free, fixed, found)
                continue
            y[free] = np.linalg.solve(Mff, -r[free])
        F = M @ y + r
        if np.all(y >= -TAU_FEAS) and np.all(F >= -TAU_FEAS):
            _add_unique(found, y)
    residual = max((float(np.linalg.norm(np.minimum(y, M @ y + r))) for y in found), default=0.0)
    status = {0: "none", 1: "unique"}.get(len(found), "multiple")
    return LowerSolveResult(found, status, iterations=2 ** m, residual=residual)


# --- semismooth Newton on the FB system ----------------------------------------------

def solve_fb_newton(system, x, start) -> LowerSolveResult:
    """Damped Newton on ``system.residual(x, y, lam)`` over the unknowns (y, lam).

    ``system`` is an :class:`~mpec.reformulate.FbSystem`.
    """
    x = np.asarray(x, dtype=float)
    m, l = system.kkt.m, system.kkt.l
    y0, lam0 = start
    w = np.concatenate([np.asarray(y0, float).reshape(-1), np.asarray(lam0, float).reshape(-1)])
    if w.shape[0] != m + l:
        raise InputError(f"solve_fb_newton: start has {w.shape[0]} entries, expected {m + l}")

    def phi(w):
        return system.residual(x, w[:m], w[m:])

    r = phi(w)
    theta = 0.5 * float(r @ r)
    history = [float(np.sqrt(2 * theta))]

    def finish(it, message):
        res = history[-1]
        if res <= NEWTON_TOL:
            return LowerSolveResult([w[:m]], "unique", iterations=it, residual=res,
                                    multipliers=[w[m:]], history=history)
        return LowerSolveResult([], "not-converged", iterations=it, residual=res,
                                history=history, message=message)

    # Iterate past NEWTON_TOL while cheap: quadratic convergence makes a couple
    # of extra steps worth ~8 more digits.
    for it in range(NEWTON_CAP):
        if history[-1] <= NEWTON_POLISH_TOL:
            return finish(it, "")
        J = system.jacobian(x, w[:m], w[m:])
        try:
            if np.linalg.cond(J) > 1e14:
                raise np.linalg.LinAlgError
            d = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            try:
                d = np.linalg.solve(J + JAC_REG * np.eye(J.shape[0]), -r)
            except np.linalg.LinAlgError:
                return finish(it, "singular generalized Jacobian")
            if not np.all(np.isfinite(d)):
                return finish(it, "singular generalized Jacobian")
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            w_try = w + t * d
            r_try = phi(w_try)
            theta_try = 0.5 * float(r_try @ r_try)
            if theta_try <= (1 - 2 * ARMIJO * t) * theta:
                break
            t /= 2
        else:
            return finish(it, "line search failed")
        w, r, theta = w_try, r_try, theta_try
        history.append(float(np.sqrt(2 * theta)))
    return finish(NEWTON_CAP, "Newton iteration cap reached")


# --- reaction map -----------------------------------------------------------------------

def lower_cone(problem: AffineMpec, x) -> Cone:
    if problem.is_orthant:
        return Orthant(problem.m)
    x = np.asarray(x, dtype=float)
    return Polyhedron(problem.B, -problem.b - problem.A @ x)


def reaction_map(problem, x, mode: str = "enumerate") -> LowerSolveResult:
    """S(x): the set of lower-level equilibria for the frozen upper decision x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != problem.n:
        raise InputError(f"reaction_map: x has length {x.shape[0]}, expected {problem.n}")
    if mode not in ("enumerate", "monotone"):
        raise InputError(f"reaction_map: unknown mode {mode!r}")
    if isinstance(problem, GeneralMpec):
        if problem.reaction is None:
            raise UnsupportedError(f"builtin {problem.name!r} has no closed-form reaction map")
        sols = [np.asarray(y, float) for y in problem.reaction(x)]
        status = {0: "none", 1: "unique"}.get(len(sols), "multiple")
        return LowerSolveResult(sols, status)
    r = problem.q + problem.N @ x
    if mode == "enumerate":
        if not problem.is_orthant:
            raise UnsupportedError("enumerate mode needs the orthant lower level y >= 0")
        return solve_lcp_enumerate(problem.M, r)
    return solve_avi(AviInstance(problem.M, r, lower_cone(problem, x)))
