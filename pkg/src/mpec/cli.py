"""``mpec`` command-line front end.

Every verb writes one JSON document (to ``--out`` or stdout) once computation
has finished. Exit codes: 0 success, 2 infeasible, 3 unbounded, 4 parse or
validation error, 5 unsupported feature.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import serialize as ser
from .diagnostics import check_cq, classify_matrix, probe_sbcq, stackelberg_values
from .errors import InputError, MpecError, UnsupportedError
from .global_solve import global_solve
from .lower import reaction_map
from .model import AffineMpec, builtin
from .reformulate import (build_fb, build_implicit, build_kkt, build_normal_map,
                          natural_residual, residual_theta)

EXIT_OK, EXIT_INFEASIBLE, EXIT_UNBOUNDED = 0, 2, 3
SOLVE_EXIT = {"solved": EXIT_OK, "infeasible": EXIT_INFEASIBLE, "unbounded": EXIT_UNBOUNDED}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def parse_floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise InputError(f"expected comma-separated decimals, got {text!r}") from None


def _split_point(problem, text):
    v = parse_floats(text)
    if v.shape[0] != problem.n + problem.m:
        raise InputError(f"--point needs {problem.n + problem.m} numbers (x then y), got {v.shape[0]}")
    return v[:problem.n], v[problem.n:]


def _affine(problem, what) -> AffineMpec:
    if not isinstance(problem, AffineMpec):
        raise UnsupportedError(f"{what} needs an affine problem file, not builtin {problem.name!r}")
    return problem


def _grid(text: str) -> list[np.ndarray]:
    parts = text.split(",")
    if len(parts) != 3:
        raise InputError("--grid expects LO,HI,COUNT")
    lo, hi = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if count < 2:
        raise InputError("--grid COUNT must be at least 2")
    # endpoint-symmetric weights keep grid points like 0 exact
    return [np.array([(lo * (count - 1 - i) + hi * i) / (count - 1)]) for i in range(count)]


def cmd_solve(args):
    report = global_solve(_affine(ser.resolve_input(args.input), "solve"))
    return ser.global_report_to_dict(report), SOLVE_EXIT[report.status]


def cmd_reformulate(args):
    problem = ser.resolve_input(args.input)
    if args.to == "kkt":
        doc = ser.kkt_to_dict(build_kkt(problem))
    elif args.to == "fb":
        doc = ser.fb_to_dict(build_fb(build_kkt(problem)))
    elif args.to == "normal":
        doc = ser.normal_map_to_dict(build_normal_map(problem))
    else:
        doc = ser.implicit_to_dict(build_implicit(problem))
    return doc, EXIT_OK


def cmd_check_cq(args):
    problem = ser.resolve_input(args.input)
    x, y = _split_point(problem, args.point)
    report = check_cq(problem, x, y, radius=args.radius, samples=args.samples, seed=args.seed)
    return ser.cq_to_dict(report), EXIT_OK


def cmd_probe_sbcq(args):
    if args.builtin_q1 is not None:
        if args.builtin_q1 < 8:
            raise InputError("--builtin-q1 K needs K >= 8")
        problem = builtin("q1")
        seq = [(np.array([-1.0 / k]), np.array([0.0])) for k in range(1, args.builtin_q1 + 1)]
    else:
        if args.input is None or args.sequence is None:
            raise InputError("probe-sbcq needs INPUT with --sequence FILE, or --builtin-q1 K")
        problem = ser.resolve_input(args.input)
        try:
            raw = json.loads(Path(args.sequence).read_text())
            seq = [(np.asarray(p["x"], float).reshape(-1), np.asarray(p["y"], float).reshape(-1))
                   for p in raw]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read sequence file {args.sequence}: {exc}") from None
    return ser.sbcq_to_dict(probe_sbcq(problem, seq)), EXIT_OK


def cmd_residual(args):
    problem = _affine(ser.resolve_input(args.input), "residual")
    x, y = _split_point(problem, args.point)
    theta = residual_theta(problem, x, y)
    nat = natural_residual(y, problem.F(x, y))
    return {"theta": theta, "natural_residual": nat}, EXIT_OK


def cmd_classify(args):
    problem = _affine(ser.resolve_input(args.input), "classify")
    return ser.monotonicity_to_dict(classify_matrix(problem.M)), EXIT_OK


def cmd_reaction_map(args):
    problem = ser.resolve_input(args.input)
    if args.grid is not None:
        if problem.n != 1:
            raise InputError("--grid is only available for a scalar upper variable")
        xs = _grid(args.grid)
    elif args.x is not None:
        xs = [parse_floats(args.x)]
    else:
        raise InputError("reaction-map needs --x or --grid")
    points = []
    for x in xs:
        res = reaction_map(problem, x, mode=args.mode)
        entry = ser.lower_result_to_dict(res)
        entry["x"] = x
        points.append(entry)
    return {"points": points}, EXIT_OK


def cmd_values(args):
    problem = ser.resolve_input(args.input)
    x = parse_floats(args.x)
    if args.responses:
        responses = [parse_floats(t) for t in args.responses.split(";")]
    else:
        responses = reaction_map(problem, x, mode=args.mode).solutions
    opt, pess = stackelberg_values(problem.f, responses, x)
    return {"x": x, "responses": responses, "optimistic": opt, "pessimistic": pess}, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mpec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, func, input_required=True, help=None):
        p = sub.add_parser(name, help=help)
        if input_required:
            p.add_argument("input", help="problem JSON file or builtin:<name>")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=42)
        p.set_defaults(func=func)
        return p

    verb("solve", cmd_solve, help="global solve by regime enumeration")
    p = verb("reformulate", cmd_reformulate, help="emit an equivalent formulation")
    p.add_argument("--to", choices=["kkt", "fb", "normal", "implicit"], required=True)
    p = verb("check-cq", cmd_check_cq, help="LICQ / MFCQ / CRCQ at a point")
    p.add_argument("--point", required=True, help="x then y, comma-separated")
    p.add_argument("--radius", type=float, default=1e-3)
    p.add_argument("--samples", type=int, default=64)
    p = verb("probe-sbcq", cmd_probe_sbcq, input_required=False, help="multiplier norms along a sequence")
    p.add_argument("input", nargs="?")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sequence", help="JSON array of {x, y} points")
    group.add_argument("--builtin-q1", type=int, metavar="K", help="x_k = -1/k, y_k = 0 for k = 1..K")
    p = verb("residual", cmd_residual, help="natural-residual merit at a point")
    p.add_argument("--point", required=True)
    verb("classify", cmd_classify, help="monotonicity class of M")
    p = verb("reaction-map", cmd_reaction_map, help="lower-level solution set S(x)")
    p.add_argument("--x")
    p.add_argument("--grid", help="LO,HI,COUNT for a scalar x")
    p.add_argument("--mode", choices=["enumerate", "monotone"], default="enumerate")
    p = verb("values", cmd_values, help="optimistic and pessimistic leader values")
    p.add_argument("--x", required=True)
    p.add_argument("--responses", help="semicolon-separated responses, e.g. '-1;0'")
    p.add_argument("--mode", choices=["enumerate", "monotone"], default="enumerate")
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        doc, code = args.func(args)
        text = ser.dumps(doc)
    except MpecError as exc:
        print(f"mpec: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(run())
