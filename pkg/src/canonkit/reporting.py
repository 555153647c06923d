"""Analysis reports: plain-dict structures that serialize losslessly to JSON
and render as text tables."""

from __future__ import annotations

import json

import numpy as np

from .actions import validate
from .classify import VECTOR_TYPES, classify_sequence
from .constraints import bracket_table, primary_constraints
from .effective import (
    chain_compose,
    count_monotonicity_check,
    degeneracy_dims,
    effective_constraints,
    effective_outer_bases,
)
from .errors import InputError
from .evolution import dof_report
from .linalg import DEFAULT_TOL
from .quantum import compose_kernels, hilbert_dims, normalized_measure, propagator_from_move


def _vec(v):
    return [float(x) for x in np.asarray(v).ravel()]


def classification_report(seq, bases, step):
    basis = bases[step]
    return {
        "step": step,
        "counts": {t: basis.counts[t] for t in VECTOR_TYPES},
        "labels": list(basis.labels),
        "abs_det_T": basis.abs_det,
    }


def constraint_entry(c):
    entry = {
        "step": list(c.steps) if len(c.steps) == 2 else c.steps[0],
        "kind": c.kind,
        "source_type": c.source_type,
        "class": c.constraint_class,
        "p_coeffs": _vec(c.p_coeffs),
        "x_coeffs": _vec(c.x_coeffs),
        "trivial": bool(c.trivial),
    }
    if c.x_coeffs_other is not None:
        entry["x_coeffs_other"] = _vec(c.x_coeffs_other)
    if c.multiplier_terms:
        entry["multiplier_terms"] = [[name, float(v)] for name, v in c.multiplier_terms]
    return entry


def constraints_report(seq, bases, step, tol=DEFAULT_TOL):
    m_in = seq.move_into(step)
    m_out = seq.move_out_of(step)
    cons = primary_constraints(m_in, m_out, bases[step])
    table = bracket_table(cons, seq.hessian(step), bases[step], tol)
    return {
        "step": step,
        "constraints": [constraint_entry(c) for c in table.tagged_constraints()],
        "brackets": [[float(v) for v in row] for row in table.brackets],
        "m_lambda_rho": table.m_lambda_rho,
        "all_first_class": bool(table.all_first_class),
    }


def dof_section(seq, bases, step, tol=DEFAULT_TOL):
    m_in = seq.move_into(step)
    m_out = seq.move_out_of(step)
    if m_in is None or m_out is None:
        raise InputError(f"step {step} needs moves on both sides for a dof report")
    rep = dof_report(m_in, m_out, bases[step - 1], bases[step], bases[step + 1], tol)
    return {
        "middle_step": step,
        "counts": {str(k): v for k, v in rep.counts.items()},
        "n_move": {f"{a}->{b}": v for (a, b), v in rep.n_move.items()},
        "n_through": rep.n_through,
        "m_lambda_rho": rep.m_lambda_rho,
        "first_class": rep.first_class,
        "second_class": rep.second_class,
        "roles": [
            {
                "row": r.row,
                "label": r.label,
                "pre_observable": r.pre_observable,
                "post_observable": r.post_observable,
                "a_priori_free": r.a_priori_free,
                "a_posteriori_free": r.a_posteriori_free,
                "gauge": r.gauge,
            }
            for r in rep.roles
        ],
    }


def effective_section(seq, bases, from_step, to_step, tol=DEFAULT_TOL):
    eff = chain_compose(seq, from_step, to_step, tol)
    m_first = seq.move_out_of(from_step)
    m_last = seq.move_into(to_step)
    dims = degeneracy_dims(m_first, m_last, eff, tol) if to_step == from_step + 2 else None
    b_from, b_to = effective_outer_bases(eff, tol)
    cons = effective_constraints(eff, b_from, b_to, tol)
    section = {
        "from": from_step,
        "to": to_step,
        "a_eff": [_vec(r) for r in eff.a],
        "b_eff": [_vec(r) for r in eff.b],
        "c_eff": [_vec(r) for r in eff.c],
        "multipliers": [
            {"type": rec.source_type, "step": rec.step, "row": _vec(rec.row)}
            for rec in eff.multipliers
        ],
        "constraints": [constraint_entry(c) for c in cons],
    }
    if dims is not None:
        section["degeneracy_dims"] = dims
        count_monotonicity_check(m_first, m_last, eff, tol)
        section["monotonicity_ok"] = True
    return section


def kernel_summary(kernel):
    return {
        "in_step": kernel.in_step,
        "out_step": kernel.out_step,
        "hbar": kernel.hbar,
        "log_modulus": float(kernel.log_modulus),
        "modulus": float(kernel.amplitude.modulus),
        "i_exponent": int(kernel.i_exponent),
        "continuous_phase": float(kernel.continuous_phase),
        "delta_count": int(kernel.deltas.shape[0]),
        "delta_labels": list(kernel.delta_labels),
        "A": [_vec(r) for r in kernel.A],
        "B": [_vec(r) for r in kernel.B],
        "C": [_vec(r) for r in kernel.C],
        "deltas": [_vec(r) for r in kernel.deltas],
    }


def quantum_section(seq, bases, from_step, to_step, tol=DEFAULT_TOL):
    kernels = {}
    move_dims = {}
    for m in seq.moves:
        if from_step <= m.step_from and m.step_to <= to_step:
            kernels[(m.step_from, m.step_to)] = propagator_from_move(
                m, bases[m.step_from], bases[m.step_to], hbar=seq.hbar, tol=tol
            )
            pre = [c for c in primary_constraints(None, m, bases[m.step_from])]
            post = [c for c in primary_constraints(m, None, bases[m.step_to])]
            move_dims[f"{m.step_from}->{m.step_to}"] = {
                "pre": hilbert_dims(pre, seq.dim, tol),
                "post": hilbert_dims(post, seq.dim, tol),
            }
    if not kernels:
        raise InputError(f"no moves between steps {from_step} and {to_step}")
    keys = sorted(kernels)
    composed = kernels[keys[0]]
    for key in keys[1:]:
        composed = compose_kernels(composed, kernels[key], bases[key[0]], tol)
    section = {
        "moves": {f"{a}->{b}": kernel_summary(k) for (a, b), k in kernels.items()},
        "composed": kernel_summary(composed),
        "hilbert_dims": move_dims,
    }
    if len(keys) > 1:
        eff = chain_compose(seq, from_step, to_step, tol)
        b_from, b_to = effective_outer_bases(eff, tol)
        cons = effective_constraints(eff, b_from, b_to, tol)
        pre = [c for c in cons if c.kind == "pre"]
        post = [c for c in cons if c.kind == "post"]
        section["hilbert_dims"][f"{from_step}->{to_step}"] = {
            "pre": hilbert_dims(pre, seq.dim, tol),
            "post": hilbert_dims(post, seq.dim, tol),
        }
        # the raw composed amplitude is reported on the kernel itself; the
        # re-derived fixed measure of the composed move sits next to it
        fixed = normalized_measure(composed, b_from, b_to)
        section["composed"]["fixed_measure"] = {
            "log_modulus": float(fixed.log_modulus),
            "modulus": float(fixed.modulus),
            "i_exponent": int(fixed.i_exponent),
        }
    return section


def full_report(seq, tol=DEFAULT_TOL, overrides=None):
    bases = classify_sequence(seq, tol, overrides)
    report = {
        "Q": seq.dim,
        "hbar": seq.hbar,
        "tol": tol,
        "diagnostics": validate(seq, tol),
        "steps": {str(n): classification_report(seq, bases, n) for n in seq.steps},
        "constraints": {str(n): constraints_report(seq, bases, n, tol) for n in seq.steps},
    }
    inner = [n for n in seq.steps if seq.move_into(n) and seq.move_out_of(n)]
    report["dof"] = {str(n): dof_section(seq, bases, n, tol) for n in inner}
    if len(seq.moves) >= 2:
        report["effective"] = effective_section(
            seq, bases, seq.first_step, seq.first_step + 2, tol
        )
        report["quantum"] = quantum_section(
            seq, bases, seq.first_step, seq.first_step + 2, tol
        )
    else:
        report["quantum"] = quantum_section(seq, bases, seq.first_step, seq.last_step, tol)
    return report


def report_to_json(report) -> str:
    return json.dumps(report, indent=1, sort_keys=True)


def report_from_json(text: str):
    return json.loads(text)


def _counts_line(counts) -> str:
    return "  ".join(f"N_{t}={counts[t]}" for t in VECTOR_TYPES if counts[t])


def _bracket_grid(sec, cut=1e-12) -> list:
    """Bracket structure grouped by (kind, source type): 0 where every
    bracket in the group vanishes, X otherwise."""
    cons = sec["constraints"]
    brackets = np.asarray(sec["brackets"])
    if not cons or brackets.size == 0:
        return []
    groups = []
    members = {}
    for k, c in enumerate(cons):
        key = f"{'+' if c['kind'] == 'post' else '-'}C_{c['source_type']}"
        if key not in members:
            members[key] = []
            groups.append(key)
        members[key].append(k)
    scale = max(np.abs(brackets).max(), 1.0)
    width = max(len(g) for g in groups)
    lines = ["  " + " " * (width + 1) + " ".join(g.rjust(width) for g in groups)]
    for gi in groups:
        cells = []
        for gj in groups:
            block = brackets[np.ix_(members[gi], members[gj])]
            cells.append(("X" if np.abs(block).max() > cut * scale else "0").rjust(width))
        lines.append("  " + gi.rjust(width) + " " + " ".join(cells))
    return lines


def render_text(report) -> str:
    """Compact human-readable rendering of a full or partial report."""
    lines = []
    if "counts" in report and "labels" in report:
        # bare single-step classification
        lines.append(
            f"step {report['step']}: {_counts_line(report['counts']) or 'empty'}"
            f"   |det T| = {report['abs_det_T']:.6g}"
        )
        lines.append("labels: " + " ".join(report["labels"]))
    if "steps" in report:
        lines.append(f"Q = {report['Q']}, hbar = {report['hbar']}, tol = {report['tol']}")
        for n, sec in sorted(report["steps"].items(), key=lambda kv: int(kv[0])):
            lines.append(f"step {n}: {_counts_line(sec['counts']) or 'empty'}"
                         f"   |det T| = {sec['abs_det_T']:.6g}")
    if "constraints" in report and isinstance(report["constraints"], dict):
        for n, sec in sorted(report["constraints"].items(), key=lambda kv: int(kv[0])):
            kinds = {}
            for c in sec["constraints"]:
                kinds[c["kind"]] = kinds.get(c["kind"], 0) + 1
            tag = "all first class" if sec["all_first_class"] else "second class present"
            lines.append(
                f"constraints at {n}: " +
                (", ".join(f"{v} {k}" for k, v in sorted(kinds.items())) or "none") +
                f"; {tag}; m_lambda_rho = {sec['m_lambda_rho']}"
            )
            lines.extend(_bracket_grid(sec))
    if "dof" in report:
        for n, sec in sorted(report["dof"].items(), key=lambda kv: int(kv[0])):
            moves = ", ".join(f"N_{k} = {v}" for k, v in sec["n_move"].items())
            lines.append(
                f"dof through {n}: {moves}, through = {sec['n_through']} "
                f"(first class {sec['first_class']}, second class {sec['second_class']})"
            )
    if "effective" in report:
        sec = report["effective"]
        a = np.abs(np.asarray(sec["a_eff"])).max() if sec["a_eff"] else 0.0
        c = np.abs(np.asarray(sec["c_eff"])).max() if sec["c_eff"] else 0.0
        lines.append(
            f"effective {sec['from']}->{sec['to']}: |a~|max = {a:.3g}, |c~|max = {c:.3g}, "
            f"{len(sec['multipliers'])} multipliers, {len(sec['constraints'])} constraints"
        )
        if "degeneracy_dims" in sec:
            d = sec["degeneracy_dims"]
            lines.append(
                f"  degenerate directions: c1 = {d['c1']}, c2 = {d['c2']}, "
                f"h = {d['h']}, c_eff = {d['c_eff']} (monotone)"
            )
    if "quantum" in report:
        sec = report["quantum"]
        for name, k in sorted(sec["moves"].items()):
            lines.append(
                f"kernel {name}: modulus = {k['modulus']:.6g}, "
                f"i_exponent = {k['i_exponent']}, deltas = {k['delta_count']}"
            )
        k = sec["composed"]
        lines.append(
            f"composed {k['in_step']}->{k['out_step']}: modulus = {k['modulus']:.6g}, "
            f"i_exponent = {k['i_exponent']}, deltas = {k['delta_count']}"
        )
        for step, d in sorted(sec["hilbert_dims"].items()):
            lines.append(f"  hilbert dims at {step}: pre = {d['pre']}, post = {d['post']}")
    return "\n".join(lines)
