"""canonkit command line driver.

Exit codes: 0 success, 2 input error, 3 numerical degeneracy,
4 constraint violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import reporting, serialize
from .classify import classify_sequence
from .errors import (
    ConstraintViolationError,
    DegeneracyError,
    InputError,
    InternalError,
)
from .evolution import CanonicalData, backward_solve, forward_solve
from .lattice import expanding_square_sequence
from .linalg import DEFAULT_TOL

EXIT_INPUT = 2
EXIT_DEGENERACY = 3
EXIT_CONSTRAINT = 4


def _default_tol() -> float:
    env = os.environ.get("CANONKIT_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        return float(env)
    except ValueError as exc:
        raise InputError(f"CANONKIT_TOL={env!r} is not a number") from exc


def _emit(report, fmt: str, out):
    text = reporting.report_to_json(report) if fmt == "json" else reporting.render_text(report)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _load(args):
    seq = serialize.load_sequence(args.input)
    overrides = serialize.load_bases(args.basis, seq.dim) if args.basis else None
    bases = classify_sequence(seq, args.tol, overrides)
    return seq, bases


def cmd_classify(args) -> int:
    seq, bases = _load(args)
    if args.step not in seq.steps:
        raise InputError(f"step {args.step} not in sequence")
    report = reporting.classification_report(seq, bases, args.step)
    _emit(report, args.format, args.out)
    return 0


def cmd_constraints(args) -> int:
    seq, bases = _load(args)
    if args.step not in seq.steps:
        raise InputError(f"step {args.step} not in sequence")
    report = reporting.constraints_report(seq, bases, args.step, args.tol)
    _emit({"constraints": {str(args.step): report}}, args.format, args.out)
    return 0


def cmd_evolve(args) -> int:
    seq, bases = _load(args)
    step, x, p, side = serialize.load_canonical_data(args.data, seq.dim)
    free = serialize.load_free_values(args.free) if args.free else None
    data = CanonicalData(step, x, p, side)
    if args.direction == "forward":
        move = seq.move_out_of(step)
        if move is None:
            raise InputError(f"no move leaves step {step}")
        res = forward_solve(move, bases[step], bases[step + 1], data, free, args.tol)
    else:
        move = seq.move_into(step)
        if move is None:
            raise InputError(f"no move arrives at step {step}")
        res = backward_solve(move, bases[step - 1], bases[step], data, free, args.tol)
    out = res.data
    report = {
        "step": out.step,
        "side": out.momentum_side,
        "x": [float(v) for v in out.x],
        "p": [float(v) for v in out.p],
        "free_rows": [[int(r), lab] for r, lab in res.free_rows],
        "injected": [float(v) for v in res.injected],
    }
    if args.format == "json":
        text = json.dumps(report, indent=1)
    else:
        text = (
            f"step {out.step} ({out.momentum_side} side)\n"
            f"x = {np.array2string(out.x, precision=6)}\n"
            f"p = {np.array2string(out.p, precision=6)}\n"
            f"free rows: {res.free_rows}"
        )
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_compose(args) -> int:
    seq, bases = _load(args)
    report = reporting.effective_section(seq, bases, args.from_step, args.to_step, args.tol)
    _emit({"effective": report}, args.format, args.out)
    return 0


def cmd_quantum(args) -> int:
    seq, bases = _load(args)
    if args.hbar is not None:
        seq = serialize.sequence_from_dict({**serialize.sequence_to_dict(seq), "hbar": args.hbar})
    if args.quantum_action == "compose":
        report = reporting.quantum_section(seq, bases, args.from_step, args.to_step, args.tol)
    else:
        report = reporting.quantum_section(seq, bases, args.from_step, args.to_step, args.tol)
        report = {"moves": report["moves"], "hilbert_dims": report["hilbert_dims"]}
    _emit({"quantum": report}, args.format, args.out)
    return 0


def cmd_example(args) -> int:
    if args.name != "square-lattice":
        raise InputError(f"unknown example {args.name!r}; available: square-lattice")
    fixture = expanding_square_sequence(args.steps, mass=args.mass, hbar=args.hbar or 1.0)
    out = args.out or "square-lattice.json"
    serialize.save_sequence(fixture.sequence, out)
    print(f"wrote {out} (Q = {fixture.sequence.dim}, {len(fixture.sequence.moves)} moves)")
    if args.basis_out:
        data = {
            "bases": [
                {"step": 1, "T": fixture.basis_t1.tolist()},
                {"step": 2, "T": fixture.basis_t2.tolist()},
            ]
        }
        Path(args.basis_out).write_text(json.dumps(data), encoding="utf-8")
        print(f"wrote {args.basis_out}")
    return 0


def cmd_report(args) -> int:
    seq = serialize.load_sequence(args.input)
    overrides = serialize.load_bases(args.basis, seq.dim) if args.basis else None
    report = reporting.full_report(seq, args.tol, overrides)
    _emit(report, args.format, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="canonkit",
        description="canonical analysis of quadratic discrete actions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="move file (JSON)")
        p.add_argument("--tol", type=float, default=None, help="rank tolerance")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--basis", default=None, help="basis override file")
        p.add_argument("--out", default=None, help="write output to a file")

    p = sub.add_parser("classify", help="classify one step's directions")
    common(p)
    p.add_argument("--step", type=int, required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("constraints", help="constraints and bracket table at a step")
    common(p)
    p.add_argument("--step", type=int, required=True)
    p.set_defaults(func=cmd_constraints)

    p = sub.add_parser("evolve", help="canonical solve across one move")
    common(p)
    p.add_argument("--data", required=True, help="canonical data file")
    p.add_argument("--free", default=None, help="free-value file")
    p.add_argument("--direction", choices=("forward", "backward"), default="forward")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("compose", help="effective move over a step range")
    common(p)
    p.add_argument("--from", dest="from_step", type=int, required=True)
    p.add_argument("--to", dest="to_step", type=int, required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("quantum", help="propagators and kernel composition")
    common(p)
    p.add_argument("quantum_action", choices=("propagator", "compose"))
    p.add_argument("--from", dest="from_step", type=int, required=True)
    p.add_argument("--to", dest="to_step", type=int, required=True)
    p.add_argument("--hbar", type=float, default=None)
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("example", help="write a generated move file")
    p.add_argument("name", help="example name (square-lattice)")
    p.add_argument("--steps", type=int, default=2)
    p.add_argument("--mass", type=float, default=0.0)
    p.add_argument("--hbar", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--basis-out", default=None, help="also write the reference bases")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("report", help="full analysis report")
    common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "tol", None) is None and hasattr(args, "tol"):
            args.tol = _default_tol()
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegeneracyError, InternalError) as exc:
        print(f"numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERACY
    except ConstraintViolationError as exc:
        print(f"constraint violation: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    raise SystemExit(main())
