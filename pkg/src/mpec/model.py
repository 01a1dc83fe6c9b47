"""Problem data: affine MPECs, evaluator-based MPECs and the built-in instances."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InputError, UnknownBuiltinError

TAU_FEAS = 1e-8
TAU_EQ = 1e-8
TAU_COMP = 1e-8
SYMMETRY_TOL = 1e-12


def _frozen(a, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if ndim == 2 and arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    arr.setflags(write=False)
    return arr


def _vector(v, size: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape[0] != size:
        raise InputError(f"{name}: expected length {size}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True)
class QuadraticForm:
    """Value ``0.5 z'Qz + c'z + c0``. Q is symmetrized on construction."""

    Q: np.ndarray
    c: np.ndarray
    c0: float = 0.0

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim == 2 and Q.shape[0] == Q.shape[1]:
            if Q.size and np.all(np.isfinite(Q)):
                asym = np.max(np.abs(Q - Q.T))
                if asym > SYMMETRY_TOL:
                    warnings.warn(f"objective Q asymmetric by {asym:.3g}; using (Q+Q')/2",
                                  stacklevel=3)
            Q = (Q + Q.T) / 2
        object.__setattr__(self, "Q", _frozen(Q, 2))
        object.__setattr__(self, "c", _frozen(np.asarray(self.c, dtype=float).reshape(-1), 1))
        object.__setattr__(self, "c0", float(self.c0))

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def value(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.Q @ z + self.c @ z + self.c0)

    def gradient(self, z) -> np.ndarray:
        return self.Q @ np.asarray(z, dtype=float) + self.c


@dataclass(frozen=True)
class Polyhedron:
    """The set ``{z : E z <= e}``."""

    E: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        E = np.array(self.E, dtype=float)
        if E.ndim == 1 and E.size == 0:
            E = E.reshape(0, 0)
        object.__setattr__(self, "E", _frozen(E, 2))
        object.__setattr__(self, "e", _frozen(np.asarray(self.e, dtype=float).reshape(-1), 1))

    @classmethod
    def whole_space(cls, dim: int) -> "Polyhedron":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @classmethod
    def box(cls, lo, hi) -> "Polyhedron":
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        d = lo.shape[0]
        return cls(np.vstack([-np.eye(d), np.eye(d)]), np.concatenate([-lo, hi]))

    @property
    def dim(self) -> int:
        return self.E.shape[1]

    @property
    def rows(self) -> int:
        return self.E.shape[0]

    def violation(self, z) -> np.ndarray:
        """Row-wise ``E z - e`` (positive entries are violations)."""
        return self.E @ np.asarray(z, dtype=float) - self.e

    def contains(self, z, tol: float = TAU_FEAS) -> bool:
        if self.rows == 0:
            return True
        return bool(np.all(self.violation(z) <= tol))


@dataclass(frozen=True)
class AffineMpec:
    """min f(x,y) s.t. (x,y) in Z, y solves VI(q + Nx + My, {y : b + Ax + By <= 0})."""

    n: int
    m: int
    objective: QuadraticForm
    Z: Polyhedron
    M: np.ndarray
    N: np.ndarray
    q: np.ndarray
    A: np.ndarray
    B: np.ndarray
    b: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        for key, ndim in (("M", 2), ("N", 2), ("A", 2), ("B", 2), ("q", 1), ("b", 1)):
            object.__setattr__(self, key, _frozen(getattr(self, key), ndim))

    @property
    def l(self) -> int:  # noqa: E743
        return self.A.shape[0] if self.A.ndim == 2 else len(self.b)

    def f(self, x, y) -> float:
        return self.objective.value(np.concatenate([x, y]))

    def F(self, x, y) -> np.ndarray:
        return eval_F(self, x, y)

    def g(self, x, y) -> np.ndarray:
        return eval_g(self, x, y)

    def grad_y_g(self, x, y) -> np.ndarray:
        return np.array(self.B)

    @property
    def is_orthant(self) -> bool:
        """True when the lower constraints are exactly ``-y <= 0`` row by row."""
        return (self.l == self.m
                and np.array_equal(self.B, -np.eye(self.m))
                and not np.any(self.A) and not np.any(self.b))


@dataclass(frozen=True)
class GeneralMpec:
    """Evaluator-backed MPEC. ``reaction`` is an optional closed-form S(x)."""

    n: int
    m: int
    l: int  # noqa: E741
    f: Callable
    F: Callable
    g: Callable
    grad_y_g: Callable
    Z: Polyhedron
    name: str = ""
    reaction: Optional[Callable] = field(default=None, compare=False)


def validate(problem: AffineMpec) -> list[str]:
    """Every dimension, finiteness and symmetry violation, as readable strings."""
    out: list[str] = []
    n, m = problem.n, problem.m
    d = n + m
    if n < 0 or m < 0:
        out.append(f"n/m: must be nonnegative (n={n}, m={m})")
        return out

    def shape(path, arr, expected):
        if arr.shape != expected:
            out.append(f"{path}: expected shape {expected}, got {arr.shape}")
            return False
        return True

    def finite(path, arr):
        if arr.size and not np.all(np.isfinite(arr)):
            out.append(f"{path}: contains non-finite entries")

    obj = problem.objective
    if shape("objective.Q", obj.Q, (d, d)):
        finite("objective.Q", obj.Q)
        if np.all(np.isfinite(obj.Q)) and obj.Q.size and np.max(np.abs(obj.Q - obj.Q.T)) > SYMMETRY_TOL:
            out.append("objective.Q: not symmetric")
    if shape("objective.c", obj.c, (d,)):
        finite("objective.c", obj.c)
    if not np.isfinite(obj.c0):
        out.append("objective.c0: non-finite")

    Z = problem.Z
    if Z.E.ndim != 2 or Z.E.shape[1] != d:
        out.append(f"Z.E: expected {d} columns, got shape {Z.E.shape}")
    elif Z.E.shape[0] != Z.e.shape[0]:
        out.append(f"Z.E/Z.e row mismatch: E has {Z.E.shape[0]} rows, e has {Z.e.shape[0]} entries")
    finite("Z.E", Z.E)
    finite("Z.e", Z.e)

    if shape("F.M", problem.M, (m, m)):
        finite("F.M", problem.M)
    if shape("F.N", problem.N, (m, n)):
        finite("F.N", problem.N)
    if shape("F.q", problem.q, (m,)):
        finite("F.q", problem.q)

    A, B, b = problem.A, problem.B, problem.b
    if A.ndim != 2 or A.shape[1] != n:
        out.append(f"lower.A: expected {n} columns, got shape {A.shape}")
    if B.ndim != 2 or B.shape[1] != m:
        out.append(f"lower.B: expected {m} columns, got shape {B.shape}")
    rows = A.shape[0] if A.ndim == 2 else None
    if rows is not None:
        if B.ndim == 2 and B.shape[0] != rows:
            out.append(f"lower.A/lower.B row mismatch: A has {rows} rows, B has {B.shape[0]}")
        if b.shape[0] != rows:
            out.append(f"lower.A/lower.b row mismatch: A has {rows} rows, b has {b.shape[0]} entries")
    finite("lower.A", A)
    finite("lower.B", B)
    finite("lower.b", b)
    return out


def eval_F(problem: AffineMpec, x, y) -> np.ndarray:
    x = _vector(x, problem.n, "x")
    y = _vector(y, problem.m, "y")
    return problem.q + problem.N @ x + problem.M @ y


def eval_g(problem: AffineMpec, x, y) -> np.ndarray:
    x = _vector(x, problem.n, "x")
    y = _vector(y, problem.m, "y")
    return problem.b + problem.A @ x + problem.B @ y


def eval_slack(problem: AffineMpec, x, y) -> np.ndarray:
    return -eval_g(problem, x, y)


def lower_functions(problem):
    """(F, g, grad_y_g) callables for either problem kind."""
    return problem.F, problem.g, problem.grad_y_g


# --- built-in instances -------------------------------------------------

def _q1() -> GeneralMpec:
    # Follower: min v s.t. x*v <= 0, v - 1 <= 0, -v - 1 <= 0. Row order puts x*v
    # first so its multiplier is lambda_1.
    def g(x, y):
        x0, v = float(np.asarray(x)[0]), float(np.asarray(y)[0])
        return np.array([x0 * v, v - 1.0, -v - 1.0])

    def grad_y_g(x, y):
        return np.array([[float(np.asarray(x)[0])], [1.0], [-1.0]])

    def reaction(x):
        return [np.array([-1.0])] if float(np.asarray(x)[0]) >= 0 else [np.array([0.0])]

    return GeneralMpec(
        n=1, m=1, l=3,
        f=lambda x, y: float(np.asarray(y)[0]),
        F=lambda x, y: np.array([1.0]),
        g=g,
        grad_y_g=grad_y_g,
        Z=Polyhedron(np.array([[-1.0, 0.0], [1.0, 0.0]]), np.array([1.0, 1.0])),
        name="q1",
        reaction=reaction,
    )


def _q3() -> GeneralMpec:
    def g(x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return np.array([y[0] + y[1] ** 2 - x[0], y[0] - x[1]])

    def grad_y_g(x, y):
        y = np.asarray(y, float)
        return np.array([[1.0, 2.0 * y[1]], [1.0, 0.0]])

    return GeneralMpec(
        n=2, m=2, l=2,
        f=lambda x, y: 0.5 * float(np.dot(x, x) + np.dot(y, y)),
        F=lambda x, y: np.asarray(y, float).copy(),
        g=g,
        grad_y_g=grad_y_g,
        Z=Polyhedron.whole_space(4),
        name="q3",
    )


BUILTINS = {"q1": _q1, "q3": _q3}


def builtin(name: str) -> GeneralMpec:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise UnknownBuiltinError(f"unknown builtin {name!r}; available: {', '.join(sorted(BUILTINS))}") from None
