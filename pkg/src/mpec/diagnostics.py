"""Constraint-qualification checks, multiplier probes and leader value comparisons."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InputError, PreconditionError, UnsupportedError
from .linalg import MonotonicityVerdict, classify_matrix, numerical_rank
from .lower import reaction_map
from .lp import linprog
from .model import TAU_EQ, TAU_FEAS, AffineMpec
from .qp import solve_qp

__all__ = [
    "MonotonicityVerdict", "classify_matrix", "CqReport", "check_cq", "min_norm_multipliers",
    "SbcqProbeResult", "probe_sbcq", "stackelberg_values",
]

MFCQ_MARGIN = 1e-9
SBCQ_MIN_LENGTH = 8
SBCQ_RATIO = 1e3
SBCQ_MIN_EXPONENT = 0.5


@dataclass
class CrcqWitness:
    point: np.ndarray  # stacked (x, y)
    subset: tuple
    rank: int
    center_rank: int


@dataclass
class CqReport:
    active: list
    licq: bool
    licq_rank: int
    mfcq: bool
    mfcq_direction: np.ndarray
    mfcq_margin: Optional[float]
    crcq: str  # "holds" | "fails" | "sampled-holds"
    crcq_witnesses: list = field(default_factory=list)


def _split(problem, x, y):
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape[0] != problem.n or y.shape[0] != problem.m:
        raise InputError(f"point has shape ({x.shape[0]}, {y.shape[0]}), expected ({problem.n}, {problem.m})")
    return x, y


def _active_set(problem, x, y) -> list[int]:
    g = np.asarray(problem.g(x, y), dtype=float).reshape(-1)
    if np.any(g > TAU_FEAS):
        bad = [int(i) for i in np.flatnonzero(g > TAU_FEAS)]
        raise PreconditionError(f"point is not lower-level feasible: g{bad} > {TAU_FEAS:g}")
    return [int(i) for i in np.flatnonzero(np.abs(g) <= TAU_FEAS)]


def _gradients(problem, x, y) -> np.ndarray:
    return np.asarray(problem.grad_y_g(x, y), dtype=float).reshape(problem.l, problem.m)


def _mfcq(G: np.ndarray):
    """max t s.t. G v + t <= 0, |v|_inf <= 1; the certificate is the sparsest-l1 optimal v, rescaled to |v|_inf = 1."""
    k, m = G.shape
    if k == 0:
        return True, np.zeros(m), None
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A = np.vstack([np.hstack([G, np.ones((k, 1))]),
                   np.hstack([np.eye(m), np.zeros((m, 1))]),
                   np.hstack([-np.eye(m), np.zeros((m, 1))])])
    b = np.concatenate([np.zeros(k), np.ones(2 * m)])
    lp = linprog(c, A, b)
    t = float(lp.x[-1])
    v = lp.x[:m]
    if t <= MFCQ_MARGIN:
        return False, v, t
    # variables (v, s): G v <= -t, -s <= v <= s, s <= 1
    c2 = np.concatenate([np.zeros(m), np.ones(m)])
    I, O = np.eye(m), np.zeros((m, m))
    A2 = np.vstack([np.hstack([G, np.zeros((k, m))]),
                    np.hstack([I, -I]), np.hstack([-I, -I]), np.hstack([O, I])])
    b2 = np.concatenate([-t * (1 - 1e-9) * np.ones(k), np.zeros(2 * m), np.ones(m)])
    lp2 = linprog(c2, A2, b2)
    if lp2.status == "optimal" and np.max(np.abs(lp2.x[:m])) > 0:
        v = lp2.x[:m] / np.max(np.abs(lp2.x[:m]))
    return True, v, t


def check_cq(problem, x, y, radius: float = 1e-3, samples: int = 64, seed: int = 42) -> CqReport:
    """LICQ, MFCQ and (sampled) CRCQ for the lower-level constraints at (x, y)."""
    x, y = _split(problem, x, y)
    active = _active_set(problem, x, y)
    G = _gradients(problem, x, y)
    GA = G[active]
    rank = numerical_rank(GA)
    licq = rank == len(active)
    mfcq, v, t = _mfcq(GA)

    witnesses: list = []
    if isinstance(problem, AffineMpec) or len(active) == 0:
        crcq = "holds"
    else:
        subsets = [s for k in range(1, len(active) + 1) for s in itertools.combinations(active, k)]
        center = {s: numerical_rank(G[list(s)]) for s in subsets}
        rng = np.random.default_rng(seed)
        dim = problem.n + problem.m
        for _ in range(samples):
            u = rng.normal(size=dim)
            u *= radius * rng.random() ** (1.0 / dim) / np.linalg.norm(u)
            xs, ys = x + u[:problem.n], y + u[problem.n:]
            Gs = _gradients(problem, xs, ys)
            for s in subsets:
                rk = numerical_rank(Gs[list(s)])
                if rk != center[s]:
                    witnesses.append(CrcqWitness(np.concatenate([xs, ys]), s, rk, center[s]))
        crcq = "fails" if witnesses else "sampled-holds"
    return CqReport(active, licq, rank, mfcq, v, t, crcq, witnesses)


def min_norm_multipliers(problem, x, y) -> Optional[np.ndarray]:
    """Smallest-norm lam >= 0 with ``F + grad_y g' lam = 0`` and lam_i = 0 off the active set.

    Returns None when no such multiplier exists.
    """
    x, y = _split(problem, x, y)
    active = _active_set(problem, x, y)
    F = np.asarray(problem.F(x, y), dtype=float).reshape(-1)
    lam = np.zeros(problem.l)
    if active:
        GA = _gradients(problem, x, y)[active]
        k = len(active)
        res = solve_qp(np.eye(k), np.zeros(k), -np.eye(k), np.zeros(k), GA.T, -F)
        if res.status != "optimal":
            return None
        lam[active] = np.maximum(res.x, 0.0)
        stat = F + GA.T @ lam[active]
    else:
        stat = F
    if np.any(np.abs(stat) > TAU_EQ):
        return None
    return lam


@dataclass
class SbcqProbeResult:
    norms: list  # None where no multiplier exists
    verdict: str  # "bounded" | "diverging" | "no-multiplier"
    growth_exponent: Optional[float]
    multipliers: list = field(default_factory=list)


def _verify_response(problem, k, x, y):
    try:
        res = reaction_map(problem, x)
    except UnsupportedError:
        if isinstance(problem, AffineMpec) and classify_matrix(problem.M).strongly_monotone:
            res = reaction_map(problem, x, mode="monotone")
        else:
            warnings.warn(f"sequence point {k}: no reaction-map oracle, membership y in S(x) trusted",
                          stacklevel=3)
            return
    if not any(np.linalg.norm(s - y) <= 1e-6 * max(1.0, np.linalg.norm(y)) for s in res.solutions):
        raise PreconditionError(f"sequence point {k}: y is not a lower-level solution at x")


def probe_sbcq(problem, sequence: Sequence) -> SbcqProbeResult:
    """Minimal multiplier norms along a feasible sequence ``[(x_k, y_k), ...]``.

    A falsifier: "diverging" means the norms keep growing on this sequence, which
    refutes bounded multiplier choices; "bounded" is evidence only.
    """
    if len(sequence) < SBCQ_MIN_LENGTH:
        raise InputError(f"SBCQ probe needs at least {SBCQ_MIN_LENGTH} points, got {len(sequence)}")
    norms, mults = [], []
    for k, (x, y) in enumerate(sequence):
        x, y = _split(problem, x, y)
        try:
            _active_set(problem, x, y)
        except PreconditionError as exc:
            raise PreconditionError(f"sequence point {k}: {exc}") from None
        _verify_response(problem, k, x, y)
        lam = min_norm_multipliers(problem, x, y)
        mults.append(lam)
        norms.append(None if lam is None else float(np.linalg.norm(lam)))

    if any(v is None for v in norms):
        return SbcqProbeResult(norms, "no-multiplier", None, mults)
    arr = np.array(norms)
    tail = np.arange(len(arr) // 2, len(arr))
    exponent = None
    positive = tail[arr[tail] > 0]
    if positive.size >= 2:
        exponent = float(np.polyfit(np.log(positive + 1.0), np.log(arr[positive]), 1)[0])
    increasing = bool(np.all(np.diff(arr[tail]) > 0))
    grew = (arr[-1] > SBCQ_RATIO * arr[0]
            or (exponent is not None and exponent >= SBCQ_MIN_EXPONENT))
    if increasing and grew:
        return SbcqProbeResult(norms, "diverging", exponent, mults)
    return SbcqProbeResult(norms, "bounded", None, mults)


def stackelberg_values(f: Callable, responses: Sequence, x) -> tuple[float, float]:
    """(optimistic, pessimistic) leader values over a finite response set."""
    if len(responses) == 0:
        raise InputError("stackelberg_values: response set is empty")
    values = [float(f(np.asarray(x, float), np.asarray(y, float))) for y in responses]
    return min(values), max(values)
