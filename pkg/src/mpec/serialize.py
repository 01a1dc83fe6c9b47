"""JSON documents: the problem file format and every result the CLI emits.

Floats are written with Python's shortest round-trip repr, so parsing and
re-serializing a document reproduces it byte for byte.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError, ProblemFormatError
from .linalg import classify_matrix
from .model import AffineMpec, Polyhedron, QuadraticForm, builtin, validate
from .reformulate import FB_ORIGIN_SLOPE


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(doc) -> str:
    return json.dumps(_plain(doc), indent=2, allow_nan=False) + "\n"


# --- problems ----------------------------------------------------------------------

def problem_to_dict(p: AffineMpec) -> dict:
    return {
        "n": p.n,
        "m": p.m,
        "objective": {"Q": p.objective.Q, "c": p.objective.c, "c0": p.objective.c0},
        "Z": {"E": p.Z.E, "e": p.Z.e},
        "F": {"M": p.M, "N": p.N, "q": p.q},
        "lower": {"A": p.A, "B": p.B, "b": p.b},
    }


def _array(doc, path, violations, cols=None):
    keys = path.split(".")
    node = doc
    for k in keys:
        if not isinstance(node, dict) or k not in node:
            violations.append(f"{path}: missing")
            return None
        node = node[k]
    try:
        arr = np.array(node, dtype=float)
    except (TypeError, ValueError):
        violations.append(f"{path}: not a numeric array")
        return None
    if cols is not None:
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, cols)  # [] means "no rows"
        elif arr.ndim != 2:
            violations.append(f"{path}: expected an array of rows")
            return None
    return arr


def problem_from_dict(doc) -> AffineMpec:
    if not isinstance(doc, dict):
        raise ProblemFormatError(["document: expected a JSON object"])
    violations: list[str] = []
    try:
        n, m = int(doc["n"]), int(doc["m"])
    except (KeyError, TypeError, ValueError):
        raise ProblemFormatError(["n/m: missing or not integers"]) from None
    d = n + m
    Q = _array(doc, "objective.Q", violations, cols=d)
    c = _array(doc, "objective.c", violations)
    c0 = _array(doc, "objective.c0", violations)
    E = _array(doc, "Z.E", violations, cols=d)
    e = _array(doc, "Z.e", violations)
    M = _array(doc, "F.M", violations, cols=m)
    N = _array(doc, "F.N", violations, cols=n)
    q = _array(doc, "F.q", violations)
    A = _array(doc, "lower.A", violations, cols=n)
    B = _array(doc, "lower.B", violations, cols=m)
    b = _array(doc, "lower.b", violations)
    if c0 is not None and c0.ndim != 0:
        violations.append("objective.c0: expected a scalar")
    if violations:
        raise ProblemFormatError(violations)
    if Q.shape[0] != Q.shape[1]:
        raise ProblemFormatError([f"objective.Q: expected shape ({d}, {d}), got {Q.shape}"])
    p = AffineMpec(n, m, QuadraticForm(Q, c, float(c0)), Polyhedron(E, e), M, N, q, A, B, b)
    violations = validate(p)
    if violations:
        raise ProblemFormatError(violations)
    return p


def load_problem(path) -> AffineMpec:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ProblemFormatError([f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})"]) from None
    return problem_from_dict(doc)


def resolve_input(source: str):
    """``builtin:<name>`` or a path to a problem JSON file."""
    if source.startswith("builtin:"):
        return builtin(source.split(":", 1)[1])
    return load_problem(source)


# --- results -----------------------------------------------------------------------------

def global_report_to_dict(report) -> dict:
    best = None
    if report.best is not None:
        b = report.best
        best = {"x": b.x, "y": b.y, "lambda": b.lam, "value": b.value, "regime": b.regime.mask}
    regimes = []
    for r in report.regimes:
        entry = {"mask": r.regime.mask, "bits": r.regime.bits, "status": r.status, "value": r.value}
        if r.point is not None and r.status == "optimal":
            entry["point"] = r.point
        if r.ray is not None:
            entry["ray"] = r.ray
        if r.certificate is not None:
            entry["certificate"] = r.certificate
        regimes.append(entry)
    return {"status": report.status, "best": best, "regimes": regimes}


def _polyhedron(P: Polyhedron) -> dict:
    return {"E": P.E, "e": P.e}


def kkt_to_dict(kkt, kind: str = "kkt") -> dict:
    p = kkt.problem
    doc = {"kind": kind, "n": p.n, "m": p.m, "l": p.l}
    if kkt.affine:
        doc["stationarity"] = {"M": p.M, "N": p.N, "q": p.q, "B": p.B}
        doc["slack"] = {"A": p.A, "B": p.B, "b": p.b}
    else:
        doc["builtin"] = p.name
        doc["stationarity"] = "F(x,y) + grad_y g(x,y)' lambda"
        doc["slack"] = "-g(x,y)"
    doc["pairs"] = [[i, j] for i, j in kkt.pairs]
    doc["Z"] = _polyhedron(p.Z)
    doc["trusted_convexity"] = kkt.trusted_convexity
    return doc


def fb_to_dict(fb) -> dict:
    doc = kkt_to_dict(fb.kkt, kind="fb")
    doc["phi"] = "sqrt(a^2 + b^2) - (a + b)"
    doc["origin_derivative"] = [FB_ORIGIN_SLOPE, FB_ORIGIN_SLOPE]
    return doc


def normal_map_to_dict(nm) -> dict:
    return {"kind": "normal_map", "cone": "orthant", "dim": nm.dim,
            "M": nm.M, "N": nm.N, "q": nm.q, "recovery": "y = max(z, 0)"}


def implicit_to_dict(ip) -> dict:
    p = ip.problem
    v = classify_matrix(p.M)
    return {
        "kind": "implicit",
        "n": p.n,
        "m": p.m,
        "objective": {"Q": p.objective.Q, "c": p.objective.c, "c0": p.objective.c0},
        "X": _polyhedron(ip.X),
        "joint": _polyhedron(ip.joint),
        "F": {"M": p.M, "N": p.N, "q": p.q},
        "lower": {"A": p.A, "B": p.B, "b": p.b},
        "monotonicity": monotonicity_to_dict(v),
    }


def monotonicity_to_dict(v) -> dict:
    return {"class": v.kind, "modulus": v.modulus, "spectral_norm": v.spectral_norm}


def cq_to_dict(r) -> dict:
    return {
        "active": r.active,
        "licq": {"verdict": "holds" if r.licq else "fails", "rank": r.licq_rank},
        "mfcq": {"verdict": "holds" if r.mfcq else "fails", "direction": r.mfcq_direction,
                 "margin": r.mfcq_margin},
        "crcq": {"verdict": r.crcq,
                 "witnesses": [{"point": w.point, "subset": list(w.subset), "rank": w.rank,
                                "center_rank": w.center_rank} for w in r.crcq_witnesses]},
    }


def sbcq_to_dict(r) -> dict:
    return {"verdict": r.verdict, "norms": r.norms, "growth_exponent": r.growth_exponent}


def lower_result_to_dict(r) -> dict:
    doc = {"status": r.status, "solutions": r.solutions, "iterations": r.iterations,
           "residual": r.residual}
    if r.multipliers is not None:
        doc["multipliers"] = r.multipliers
    if r.message:
        doc["message"] = r.message
    return doc
