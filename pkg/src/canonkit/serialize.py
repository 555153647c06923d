"""Move-file and report serialization.

Move files are JSON:

    {"Q": int, "hbar": number,
     "moves": [{"n": int, "a": [[...]], "b": [[...]], "c": [[...]]}, ...]}

with row-major matrices and ``n`` the arrival step of each move (the move
runs n-1 -> n).  repr-style float formatting keeps numbers round-trippable
as IEEE doubles.  Basis files map steps to explicit row bases:

    {"bases": [{"step": int, "T": [[...]]}, ...]}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .actions import MoveSequence, QuadraticMove
from .errors import InputError


def sequence_to_dict(seq: MoveSequence) -> dict:
    return {
        "Q": seq.dim,
        "hbar": seq.hbar,
        "moves": [
            {"n": m.step_to, "a": m.a.tolist(), "b": m.b.tolist(), "c": m.c.tolist()}
            for m in seq.moves
        ],
        "slot_maps": {str(k): v for k, v in seq.slot_maps.items()},
    }


def sequence_from_dict(data: dict) -> MoveSequence:
    try:
        q = int(data["Q"])
        hbar = float(data.get("hbar", 1.0))
        raw_moves = data["moves"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed move file: {exc}") from exc
    if not isinstance(raw_moves, list) or not raw_moves:
        raise InputError("move file must contain a non-empty 'moves' list")
    moves = []
    for entry in raw_moves:
        try:
            n = int(entry["n"])
            a = np.asarray(entry["a"], dtype=float)
            b = np.asarray(entry["b"], dtype=float)
            c = np.asarray(entry["c"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed move entry: {exc}") from exc
        if a.shape != (q, q) or b.shape != (q, q) or c.shape != (q, q):
            raise InputError(f"move {n}: matrices must be {q}x{q}")
        moves.append(QuadraticMove(n - 1, n, a, b, c))
    slot_maps = {int(k): list(v) for k, v in data.get("slot_maps", {}).items()}
    return MoveSequence(q, tuple(moves), hbar=hbar, slot_maps=slot_maps)


def save_sequence(seq: MoveSequence, path) -> None:
    Path(path).write_text(json.dumps(sequence_to_dict(seq), indent=1), encoding="utf-8")


def load_sequence(path) -> MoveSequence:
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return sequence_from_dict(data)


def load_bases(path, dim: int) -> dict:
    """Basis override file -> {step: T matrix}."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        entries = data["bases"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: malformed basis file: {exc}") from exc
    out = {}
    for entry in entries:
        try:
            step = int(entry["step"])
            t = np.asarray(entry["T"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed basis entry: {exc}") from exc
        if t.shape != (dim, dim):
            raise InputError(f"basis at step {step} must be {dim}x{dim}")
        out[step] = t
    return out


def load_canonical_data(path, dim: int):
    """Canonical-data file: {"step": int, "x": [...], "p": [...], "side": "pre"|"post"}."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        step = int(data["step"])
        x = np.asarray(data["x"], dtype=float)
        p = np.asarray(data["p"], dtype=float)
        side = data.get("side", "pre")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed data file: {exc}") from exc
    if x.shape != (dim,) or p.shape != (dim,):
        raise InputError(f"x and p must have length {dim}")
    return step, x, p, side


def load_free_values(path):
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("free", data.get("values"))
    return np.asarray(data, dtype=float)
