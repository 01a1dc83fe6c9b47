"""Small dense linear-algebra helpers: monotonicity classes, ranks, contraction steps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InputError

TAU_PD = 1e-10
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class MonotonicityVerdict:
    kind: str  # "strongly-monotone" | "monotone" | "not-monotone"
    modulus: float  # smallest eigenvalue of (M + M')/2
    spectral_norm: float

    @property
    def strongly_monotone(self) -> bool:
        return self.kind == "strongly-monotone"


def classify_matrix(M) -> MonotonicityVerdict:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"classify_matrix: expected a square matrix, got shape {M.shape}")
    if M.shape[0] == 0:
        return MonotonicityVerdict("strongly-monotone", float("inf"), 0.0)
    c = float(np.linalg.eigvalsh((M + M.T) / 2)[0])
    L = float(np.linalg.norm(M, 2))
    if c > TAU_PD:
        kind = "strongly-monotone"
    elif c >= -TAU_PD:
        kind = "monotone"
    else:
        kind = "not-monotone"
    return MonotonicityVerdict(kind, c, L)


def numerical_rank(G) -> int:
    """Rank counting singular values above ``RANK_RTOL`` times the largest."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    if G.size == 0:
        return 0
    s = np.linalg.svd(G, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def contraction_step(M, verdict: MonotonicityVerdict) -> tuple[float, float]:
    """Step gamma for ``y <- P(y - gamma (M y + r))`` and its contraction factor.

    Starts from the classical safe step ``c / L^2`` and keeps whichever of it and
    the minimizer of ``||I - gamma M||_2`` on ``(0, 2/L]`` contracts faster (the
    norm is convex in gamma, so the bounded search finds the global minimizer).
    """
    M = np.asarray(M, dtype=float)
    eye = np.eye(M.shape[0])
    c, L = verdict.modulus, verdict.spectral_norm
    safe = c / L**2

    def rho(gamma):
        return float(np.linalg.norm(eye - gamma * M, 2))

    res = minimize_scalar(rho, bounds=(1e-3 * safe, 2.0 / L), method="bounded",
                          options={"xatol": 1e-8 / L})
    if res.fun < rho(safe):
        return float(res.x), float(res.fun)
    return safe, rho(safe)
