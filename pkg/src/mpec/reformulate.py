"""Equivalent formulations of the equilibrium constraint: KKT, Fischer-Burmeister,
normal map and implicit program, plus the natural-residual merit."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InputError, MonotonicityError, UnsupportedError
from .linalg import classify_matrix
from .lower import AviInstance, LowerSolveResult, lower_cone, solve_avi
from .model import TAU_COMP, TAU_EQ, TAU_FEAS, AffineMpec, GeneralMpec, Polyhedron, eval_F

FD_STEP = 1e-7
FB_ORIGIN_SLOPE = np.sqrt(2.0) / 2 - 1.0

Problem = Union[AffineMpec, GeneralMpec]


@dataclass(frozen=True)
class KktSystem:
    """Stationarity ``F(x,y) + grad_y g(x,y)' lam = 0`` with pairs ``0 <= lam_i _|_ u_i >= 0``.

    ``u = -g(x,y)`` is the slack. For affine problems the stationarity map is
    ``q + Nx + My + B'lam``.
    """

    problem: Problem
    trusted_convexity: bool

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def m(self) -> int:
        return self.problem.m

    @property
    def l(self) -> int:  # noqa: E743
        return self.problem.l

    @property
    def Z(self) -> Polyhedron:
        return self.problem.Z

    @property
    def affine(self) -> bool:
        return isinstance(self.problem, AffineMpec)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        """(multiplier index, slack index) for each complementarity pair."""
        return [(i, i) for i in range(self.l)]

    def stationarity(self, x, y, lam) -> np.ndarray:
        x, y, lam = (np.asarray(v, dtype=float).reshape(-1) for v in (x, y, lam))
        if lam.shape[0] != self.l:
            raise InputError(f"lambda has length {lam.shape[0]}, expected {self.l}")
        p = self.problem
        if self.affine:
            return eval_F(p, x, y) + p.B.T @ lam
        G = np.asarray(p.grad_y_g(x, y), dtype=float).reshape(self.l, self.m)
        return np.asarray(p.F(x, y), dtype=float) + G.T @ lam

    def slack(self, x, y) -> np.ndarray:
        return -np.asarray(self.problem.g(np.asarray(x, float), np.asarray(y, float)), dtype=float)

    def stationarity_jac_y(self, x, y, lam) -> np.ndarray:
        if self.affine:
            return np.array(self.problem.M)
        y = np.asarray(y, dtype=float)
        J = np.empty((self.m, self.m))
        for j in range(self.m):
            h = np.zeros(self.m)
            h[j] = FD_STEP
            J[:, j] = (self.stationarity(x, y + h, lam) - self.stationarity(x, y - h, lam)) / (2 * FD_STEP)
        return J

    def slack_jac_y(self, x, y) -> np.ndarray:
        return -np.asarray(self.problem.grad_y_g(np.asarray(x, float), np.asarray(y, float)),
                           dtype=float).reshape(self.l, self.m)

    def is_feasible(self, x, y, lam) -> bool:
        lam = np.asarray(lam, dtype=float).reshape(-1)
        stat = self.stationarity(x, y, lam)
        u = self.slack(x, y)
        return bool(np.all(np.abs(stat) <= TAU_EQ)
                    and np.all(lam >= -TAU_FEAS)
                    and np.all(u >= -TAU_FEAS)
                    and np.all(np.abs(lam * u) <= TAU_COMP))


def build_kkt(problem: Problem) -> KktSystem:
    trusted = isinstance(problem, GeneralMpec)
    if trusted:
        warnings.warn(f"KKT system for {problem.name or 'general problem'}: lower-level convexity "
                      "and multiplier CQ are assumed, not checked", stacklevel=2)
    return KktSystem(problem, trusted)


# --- Fischer-Burmeister ----------------------------------------------------------------

def fb_value(a, b):
    """``sqrt(a^2 + b^2) - (a + b)``; zero exactly on the complementarity set."""
    return np.hypot(a, b) - (a + b)


def fb_gradient(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of fb_value, with the (1,1)-direction limit at the origin."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    r = np.hypot(a, b)
    at_origin = r == 0.0
    safe = np.where(at_origin, 1.0, r)
    da = np.where(at_origin, FB_ORIGIN_SLOPE, a / safe - 1.0)
    db = np.where(at_origin, FB_ORIGIN_SLOPE, b / safe - 1.0)
    return da, db


@dataclass(frozen=True)
class FbSystem:
    kkt: KktSystem

    def residual(self, x, y, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float).reshape(-1)
        stat = self.kkt.stationarity(x, y, lam)
        return np.concatenate([stat, fb_value(lam, self.kkt.slack(x, y))])

    def jacobian(self, x, y, lam) -> np.ndarray:
        """Generalized Jacobian in (y, lam) for fixed x."""
        k = self.kkt
        lam = np.asarray(lam, dtype=float).reshape(-1)
        m, l = k.m, k.l
        u = k.slack(x, y)
        da, db = fb_gradient(lam, u)
        J = np.zeros((m + l, m + l))
        J[:m, :m] = k.stationarity_jac_y(x, y, lam)
        J[:m, m:] = -k.slack_jac_y(x, y).T
        J[m:, :m] = db[:, None] * k.slack_jac_y(x, y)
        J[m:, m:] = np.diag(da)
        return J


def build_fb(kkt: KktSystem) -> FbSystem:
    return FbSystem(kkt)


# --- normal map ---------------------------------------------------------------------------

def _require_orthant(problem, what: str):
    if not isinstance(problem, AffineMpec) or not problem.is_orthant:
        raise UnsupportedError(f"{what} needs an affine problem whose lower constraints are exactly -y <= 0")


@dataclass(frozen=True)
class NormalMapSystem:
    """``M z+ + N x + q - z-`` on the nonnegative orthant; ``y = z+`` recovers the response."""

    M: np.ndarray
    N: np.ndarray
    q: np.ndarray

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    def value(self, x, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        zp, zm = np.maximum(z, 0.0), np.maximum(-z, 0.0)
        return self.M @ zp + self.N @ np.asarray(x, dtype=float) + self.q - zm

    @staticmethod
    def recover(z) -> np.ndarray:
        return np.maximum(np.asarray(z, dtype=float), 0.0)

    def solve(self, x, z0=None, max_iter: int = 100) -> LowerSolveResult:
        """Semismooth Newton on the piecewise-affine map, with halving line search."""
        z = np.zeros(self.dim) if z0 is None else np.asarray(z0, dtype=float).copy()
        v = self.value(x, z)
        for it in range(max_iter + 1):
            res = float(np.linalg.norm(v))
            if res <= 1e-10:
                return LowerSolveResult([self.recover(z)], "unique", iterations=it, residual=res)
            if it == max_iter:
                break
            active = (z > 0).astype(float)
            J = self.M * active[None, :] + np.diag(1.0 - active)
            try:
                d = np.linalg.solve(J, -v)
            except np.linalg.LinAlgError:
                d = np.linalg.lstsq(J, -v, rcond=None)[0]
            t = 1.0
            for _ in range(40):
                v_try = self.value(x, z + t * d)
                if np.linalg.norm(v_try) <= (1 - 1e-4 * t) * res:
                    break
                t /= 2
            else:
                break
            z, v = z + t * d, v_try
        return LowerSolveResult([], "not-converged", iterations=it,
                                residual=float(np.linalg.norm(v)), message="no normal-map root found")


def build_normal_map(problem: AffineMpec) -> NormalMapSystem:
    _require_orthant(problem, "normal map")
    return NormalMapSystem(np.array(problem.M), np.array(problem.N), np.array(problem.q))


# --- merit functions ---------------------------------------------------------------------------

def natural_residual(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InputError(f"natural_residual: shapes {a.shape} and {b.shape} differ")
    return np.minimum(a, b)


def residual_theta(problem: AffineMpec, x, y) -> float:
    """``0.5 ||min(y, F(x, y))||^2``."""
    _require_orthant(problem, "residual_theta")
    r = natural_residual(np.asarray(y, dtype=float), eval_F(problem, x, y))
    return 0.5 * float(r @ r)


# --- implicit program -------------------------------------------------------------------------

@dataclass(frozen=True)
class ImplicitProgram:
    """min_x f(x, y(x)) over X, where y(x) is the unique lower-level response.

    ``X`` collects the rows of Z that only involve x; rows coupling x and y stay
    in ``joint`` and must be checked against y(x) afterwards.
    """

    problem: AffineMpec
    X: Polyhedron
    joint: Polyhedron

    def response(self, x) -> np.ndarray:
        res = self.oracle(x)
        if res.status != "unique":
            raise RuntimeError(f"lower-level solve failed: {res.message or res.status}")
        return res.solutions[0]

    def oracle(self, x) -> LowerSolveResult:
        p = self.problem
        x = np.asarray(x, dtype=float)
        return solve_avi(AviInstance(p.M, p.q + p.N @ x, lower_cone(p, x)))

    def objective(self, x) -> float:
        return self.problem.f(np.asarray(x, dtype=float), self.response(x))


def build_implicit(problem: AffineMpec) -> ImplicitProgram:
    if not isinstance(problem, AffineMpec):
        raise UnsupportedError("implicit form needs an affine problem")
    verdict = classify_matrix(problem.M)
    if not verdict.strongly_monotone:
        raise MonotonicityError(
            "implicit form needs F(x, .) strongly monotone, i.e. M positive definite "
            f"(verdict {verdict.kind}, smallest symmetric-part eigenvalue {verdict.modulus:.3g})")
    if np.any(problem.A):
        raise UnsupportedError("implicit form needs lower constraints independent of x (A = 0)")
    n = problem.n
    E, e = problem.Z.E, problem.Z.e
    x_only = ~np.any(E[:, n:], axis=1) if E.shape[0] else np.zeros(0, dtype=bool)
    X = Polyhedron(E[x_only][:, :n].reshape(-1, n), e[x_only])
    joint = Polyhedron(E[~x_only].reshape(-1, E.shape[1]), e[~x_only])
    return ImplicitProgram(problem, X, joint)
