"""Linear constraints, their Poisson algebra, and the first/second-class split.

Sign conventions, fixed once: {x, p} = +1, so the bracket of two linear
functionals C = p_c·p + x_c·x is x_c(1)·p_c(2) - p_c(1)·x_c(2).  With the
momentum maps of the actions module, a pre/post pair built from null rows
L, R then brackets to L·h·R.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .classify import ClassifiedBasis, LEFT_TYPES, RIGHT_TYPES, m_lambda_rho
from .errors import InputError
from .linalg import DEFAULT_TOL, numeric_rank

KINDS = ("pre", "post", "holonomic_left", "holonomic_right", "boundary_data")


@dataclass(frozen=True)
class LinearConstraint:
    """A linear phase-space functional C = p_coeffs·p + x_coeffs·x (+ far-step term).

    ``step`` is an int, or an (initial, final) pair for boundary-data
    constraints, whose far-step configuration coefficients live in
    ``x_coeffs_other``.  ``multiplier_terms`` records symbolic Lagrange-
    multiplier coefficients of effective constraints as (name, value) pairs.
    """

    step: object
    kind: str
    p_coeffs: np.ndarray
    x_coeffs: np.ndarray
    x_coeffs_other: np.ndarray = None
    source_type: str = ""
    constraint_class: str = "unresolved"
    trivial: bool = False
    multiplier_terms: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown constraint kind {self.kind!r}")
        p = np.asarray(self.p_coeffs, dtype=float)
        x = np.asarray(self.x_coeffs, dtype=float)
        if p.shape != x.shape:
            raise InputError("p_coeffs and x_coeffs must have equal length")
        object.__setattr__(self, "p_coeffs", p)
        object.__setattr__(self, "x_coeffs", x)
        if self.x_coeffs_other is not None:
            object.__setattr__(
                self, "x_coeffs_other", np.asarray(self.x_coeffs_other, dtype=float)
            )

    @property
    def steps(self) -> tuple:
        return tuple(self.step) if isinstance(self.step, (tuple, list)) else (self.step,)

    def x_part_at(self, step: int) -> np.ndarray:
        """Configuration coefficients of this functional at a given step."""
        if isinstance(self.step, (tuple, list)):
            if step == self.step[0]:
                return self.x_coeffs
            if step == self.step[1]:
                return self.x_coeffs_other
            raise InputError(f"constraint does not live at step {step}")
        if step != self.step:
            raise InputError(f"constraint does not live at step {step}")
        return self.x_coeffs

    def evaluate(self, x, p=None, x_other=None) -> float:
        val = float(self.x_coeffs @ np.asarray(x, float))
        if p is not None:
            val += float(self.p_coeffs @ np.asarray(p, float))
        if self.x_coeffs_other is not None:
            if x_other is None:
                raise InputError("boundary-data constraint needs both steps' data")
            val += float(self.x_coeffs_other @ np.asarray(x_other, float))
        return val

def _coeff_scale(c: LinearConstraint) -> float:
    parts = [np.abs(c.p_coeffs).max() if c.p_coeffs.size else 0.0,
             np.abs(c.x_coeffs).max() if c.x_coeffs.size else 0.0]
    if c.x_coeffs_other is not None and c.x_coeffs_other.size:
        parts.append(np.abs(c.x_coeffs_other).max())
    return max(parts)


def primary_constraints(move_prev, move_next, basis: ClassifiedBasis) -> list:
    """Primary pre- and post-constraints at the basis' step.

    Post-constraints come from the incoming move (one per I/H/r/rho row),
    pre-constraints from the outgoing move (one per I/H/l/lambda row).  A
    missing move on one side suppresses that side's constraints.
    """
    out = []
    if move_prev is not None:
        if move_prev.step_to != basis.step:
            raise InputError("move_prev does not arrive at the basis step")
        for k in basis.rows_of(*RIGHT_TYPES):
            row = basis.T[k]
            out.append(
                LinearConstraint(
                    step=basis.step,
                    kind="post",
                    p_coeffs=row,
                    x_coeffs=-(move_prev.b @ row),
                    source_type=basis.labels[k],
                )
            )
    if move_next is not None:
        if move_next.step_from != basis.step:
            raise InputError("move_next does not leave from the basis step")
        for k in basis.rows_of(*LEFT_TYPES):
            row = basis.T[k]
            out.append(
                LinearConstraint(
                    step=basis.step,
                    kind="pre",
                    p_coeffs=row,
                    x_coeffs=move_next.a @ row,
                    source_type=basis.labels[k],
                )
            )
    return out


def poisson_bracket(c1: LinearConstraint, c2: LinearConstraint) -> float:
    """{C1, C2} with the convention {x, p} = +1.

    Both constraints must share a step; the bracket contracts their
    coefficients at that step.
    """
    shared = set(c1.steps) & set(c2.steps)
    if not shared:
        raise InputError("constraints live at disjoint steps")
    step = min(shared)
    x1 = c1.x_part_at(step)
    x2 = c2.x_part_at(step)
    p1 = c1.p_coeffs if step in c1.steps and not isinstance(c1.step, (tuple, list)) else np.zeros_like(x1)
    p2 = c2.p_coeffs if step in c2.steps and not isinstance(c2.step, (tuple, list)) else np.zeros_like(x2)
    return float(x1 @ p2 - p1 @ x2)


@dataclass(frozen=True)
class BracketTable:
    """Antisymmetric table of pairwise Poisson brackets with class tags."""

    constraints: tuple
    brackets: np.ndarray
    class_split: tuple      # "first" | "second" per constraint
    m_lambda_rho: int

    @property
    def all_first_class(self) -> bool:
        return all(tag == "first" for tag in self.class_split)

    def tagged_constraints(self) -> tuple:
        return tuple(
            replace(c, constraint_class=tag)
            for c, tag in zip(self.constraints, self.class_split)
        )


def bracket_table(constraints, h, basis: ClassifiedBasis, tol: float = DEFAULT_TOL) -> BracketTable:
    """Full bracket table at one step; a constraint is first class iff its
    bracket row vanishes within tolerance."""
    constraints = tuple(constraints)
    n = len(constraints)
    table = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            val = poisson_bracket(constraints[i], constraints[j])
            table[i, j] = val
            table[j, i] = -val
    scale = max(np.abs(table).max() if table.size else 0.0, 1.0)
    tags = tuple(
        "first" if (n == 0 or np.abs(table[i]).max() <= tol * n * scale) else "second"
        for i in range(n)
    )
    m = m_lambda_rho(basis, h, tol) if h is not None else 0
    return BracketTable(constraints=constraints, brackets=table, class_split=tags, m_lambda_rho=m)


def secondary_constraints(move_prev, move_next, basis: ClassifiedBasis,
                          tol: float = DEFAULT_TOL) -> list:
    """Holonomic and boundary-data constraints produced by the middle-step
    equations of motion of a two-move chain.

    l rows give configuration constraints at the initial step, r rows at
    the final step, z rows relate both.  Rows whose contractions vanish
    identically are kept but flagged trivial so counts stay auditable.
    """
    if move_prev is None or move_next is None:
        raise InputError("secondary constraints need both moves")
    if move_prev.step_to != basis.step or move_next.step_from != basis.step:
        raise InputError("basis step must sit between the two moves")
    q = basis.dim
    zeros = np.zeros(q)

    def is_trivial(*vecs):
        mats = max(np.abs(move_prev.c).max(), np.abs(move_next.c).max(), 1.0)
        return all(np.abs(v).max() <= tol * q * mats for v in vecs)

    out = []
    for k in basis.rows_of("l"):
        coeffs = move_prev.c @ basis.T[k]
        out.append(
            LinearConstraint(
                step=move_prev.step_from,
                kind="holonomic_left",
                p_coeffs=zeros,
                x_coeffs=coeffs,
                source_type="l",
                trivial=is_trivial(coeffs),
            )
        )
    for k in basis.rows_of("r"):
        coeffs = move_next.c.T @ basis.T[k]
        out.append(
            LinearConstraint(
                step=move_next.step_to,
                kind="holonomic_right",
                p_coeffs=zeros,
                x_coeffs=coeffs,
                source_type="r",
                trivial=is_trivial(coeffs),
            )
        )
    for k in basis.rows_of("z"):
        first = move_prev.c @ basis.T[k]
        second = move_next.c.T @ basis.T[k]
        out.append(
            LinearConstraint(
                step=(move_prev.step_from, move_next.step_to),
                kind="boundary_data",
                p_coeffs=zeros,
                x_coeffs=first,
                x_coeffs_other=second,
                source_type="z",
                trivial=is_trivial(first, second),
            )
        )
    return out


def independent_count(constraints, tol: float = DEFAULT_TOL) -> int:
    """Number of linearly independent constraint functionals."""
    constraints = list(constraints)
    if not constraints:
        return 0
    rows = []
    for c in constraints:
        other = c.x_coeffs_other if c.x_coeffs_other is not None else np.zeros_like(c.x_coeffs)
        rows.append(np.concatenate([c.p_coeffs, c.x_coeffs, other]))
    return numeric_rank(np.vstack(rows), tol)
