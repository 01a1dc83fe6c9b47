"""Global solution of small MPAECs by enumerating complementarity regimes.

Each regime fixes, per pair, which side of ``0 <= lam_i _|_ u_i >= 0`` is pinned
to zero. The KKT feasible set restricted to a regime is a polyhedron in
(x, y, lam), so minimizing a convex quadratic over every piece and keeping the
best value gives the global optimum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError, ProblemFormatError, SizeError, UnsupportedError
from .lp import find_feasible_point
from .model import AffineMpec, Polyhedron, QuadraticForm, validate
from .qp import paired_rows, solve_qp
from .reformulate import KktSystem, build_kkt

REGIME_CAP = 16
CONVEXITY_TOL = 1e-10


@dataclass(frozen=True, order=True)
class Regime:
    """Bit i clear: ``lam_i = 0, u_i >= 0``. Bit i set: ``u_i = 0, lam_i >= 0``."""

    mask: int
    size: int

    def pinned_slack(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    @property
    def bits(self) -> str:
        return "".join("1" if self.pinned_slack(i) else "0" for i in range(self.size))


@dataclass
class QpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    point: Optional[np.ndarray] = None
    value: Optional[float] = None
    ray: Optional[np.ndarray] = None
    certificate: Optional[np.ndarray] = None


@dataclass
class RegimeResult:
    regime: Regime
    status: str
    value: Optional[float] = None
    point: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    certificate: Optional[np.ndarray] = None


@dataclass
class Best:
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    value: float
    regime: Regime


@dataclass
class GlobalSolveReport:
    status: str  # "solved" | "infeasible" | "unbounded"
    best: Optional[Best]
    regimes: list = field(default_factory=list)


def enumerate_regimes(l: int, cap: int = REGIME_CAP) -> list[Regime]:  # noqa: E741
    if l < 0:
        raise InputError("number of complementarity pairs must be nonnegative")
    if l > cap:
        raise SizeError(f"{l} complementarity pairs exceed the regime cap {cap} (2^{l} pieces)")
    return [Regime(mask, l) for mask in range(2 ** l)]


def regime_polyhedron(kkt: KktSystem, regime: Regime) -> Polyhedron:
    """The regime's piece of the KKT feasible set, as ``<=`` rows over (x, y, lam)."""
    if not kkt.affine:
        raise UnsupportedError("regime pieces are polyhedral only for affine problems")
    p = kkt.problem
    n, m, l = p.n, p.m, p.l
    d = n + m + l
    rows, rhs = [], []

    Z = p.Z
    if Z.rows:
        rows.append(np.hstack([Z.E, np.zeros((Z.rows, l))]))
        rhs.append(Z.e)
    S = np.hstack([p.N, p.M, p.B.T])  # stationarity: S w + q = 0
    rows += [S, -S]
    rhs += [-p.q, p.q]
    G = np.hstack([p.A, p.B, np.zeros((l, l))])  # g = G w + b
    for i in range(l):
        unit = np.zeros(d)
        unit[n + m + i] = 1.0
        if regime.pinned_slack(i):
            rows += [G[i:i + 1], -G[i:i + 1], -unit[None]]
            rhs += [[-p.b[i]], [p.b[i]], [0.0]]
        else:
            rows += [unit[None], -unit[None], G[i:i + 1]]
            rhs += [[0.0], [0.0], [-p.b[i]]]
    return Polyhedron(np.vstack(rows).reshape(-1, d), np.concatenate([np.ravel(r) for r in rhs]))


def check_convex(objective: QuadraticForm):
    Q = objective.Q
    if Q.size and np.linalg.eigvalsh(Q)[0] < -CONVEXITY_TOL * max(1.0, np.abs(Q).max()):
        raise UnsupportedError("objective Q is not positive semidefinite; nonconvex pieces are not solved")


def solve_qp_on_polyhedron(objective: QuadraticForm, P: Polyhedron) -> QpOutcome:
    """Convex QP over P. Row pairs ``a'z <= b, -a'z <= -b`` are treated as equalities."""
    check_convex(objective)
    ph1 = find_feasible_point(P.E, P.e)
    if ph1.status == "infeasible":
        return QpOutcome("infeasible", certificate=ph1.farkas_ub)
    pairs, rest = paired_rows(P.E, P.e)
    eq = [i for i, _ in pairs]
    res = solve_qp(objective.Q, objective.c, P.E[rest], P.e[rest],
                   P.E[eq] if eq else None, P.e[eq] if eq else None, x0=ph1.x)
    if res.status == "unbounded":
        return QpOutcome("unbounded", point=res.x, ray=res.ray)
    return QpOutcome("optimal", point=res.x, value=res.value + objective.c0)


def _lift(objective: QuadraticForm, l: int) -> QuadraticForm:  # noqa: E741
    d = objective.dim
    Q = np.zeros((d + l, d + l))
    Q[:d, :d] = objective.Q
    return QuadraticForm(Q, np.concatenate([objective.c, np.zeros(l)]), objective.c0)


def global_solve(problem: AffineMpec) -> GlobalSolveReport:
    violations = validate(problem)
    if violations:
        raise ProblemFormatError(violations)
    check_convex(problem.objective)
    regimes = enumerate_regimes(problem.l)
    kkt = build_kkt(problem)
    lifted = _lift(problem.objective, problem.l)
    n, m = problem.n, problem.m

    results: list[RegimeResult] = []
    best: Optional[Best] = None
    for regime in regimes:
        out = solve_qp_on_polyhedron(lifted, regime_polyhedron(kkt, regime))
        results.append(RegimeResult(regime, out.status, out.value, out.point, out.ray, out.certificate))
        if out.status != "optimal":
            continue
        w = out.point
        cand = Best(w[:n], w[n:n + m], w[n + m:], out.value, regime)
        if best is None or cand.value < best.value - 1e-12 * max(1.0, abs(best.value)):
            best = cand

    if any(r.status == "unbounded" for r in results):
        return GlobalSolveReport("unbounded", None, results)
    if best is None:
        return GlobalSolveReport("infeasible", None, results)
    return GlobalSolveReport("solved", best, results)
