"""Canonical solves: initial-value, final-value and boundary-value problems,
plus the observable/degree-of-freedom accounting for two-move chains.

All solves work in the split coordinates of a ClassifiedBasis, where the
evolution equations reduce to one invertible square block c_AB between the
pre-observable rows A of the initial step and the post-observable rows B of
the final step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .actions import QuadraticMove
from .classify import (
    ClassifiedBasis,
    LEFT_TYPES,
    RIGHT_TYPES,
    hessian_block,
    m_lambda_rho,
    split_variables,
)
from .errors import (
    ConstraintViolationError,
    DegeneracyError,
    InconsistentBoundaryError,
    InputError,
    InternalError,
)
from .linalg import DEFAULT_TOL, numeric_rank


@dataclass(frozen=True)
class CanonicalData:
    """Configuration and momentum at one step, with the momentum side tagged."""

    step: int
    x: np.ndarray
    p: np.ndarray
    momentum_side: str = "pre"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if x.shape != p.shape or x.ndim != 1:
            raise InputError("x and p must be equal-length vectors")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise InputError("canonical data must be finite")
        if self.momentum_side not in ("pre", "post"):
            raise InputError("momentum_side must be 'pre' or 'post'")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class SolveResult:
    """Output data plus a record of which split rows were free injections."""

    data: CanonicalData
    free_rows: tuple          # (row index, label) pairs in the output basis
    injected: np.ndarray      # values placed on those rows
    residuals: np.ndarray     # constraint residuals checked on the input


def _free_vector(basis, rows, free_values):
    vals = np.zeros(len(rows))
    if free_values is None:
        return vals
    arr = np.asarray(free_values, dtype=float)
    if arr.shape == (len(rows),):
        return arr
    if arr.shape == (basis.dim,):
        return arr[rows]
    raise InputError(
        f"free values must have length {len(rows)} (free rows) or {basis.dim} (full)"
    )


def _square_block(c_matrix, basis_from, basis_to):
    a_rows = basis_from.pre_observable_rows
    b_rows = basis_to.post_observable_rows
    block = basis_from.T[a_rows] @ c_matrix @ basis_to.T[b_rows].T
    if block.shape[0] != block.shape[1]:
        raise DegeneracyError(
            f"observable block is {block.shape[0]}x{block.shape[1]}; the two "
            "bases are classified against different data"
        )
    return a_rows, b_rows, block


def _check_invertible(block, tol, what):
    if block.size == 0:
        return
    sv = np.linalg.svd(block, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= tol * sv[0] * block.shape[0]:
        raise DegeneracyError(f"{what} is singular; classification inconsistent")


def forward_solve(move: QuadraticMove, basis_from: ClassifiedBasis,
                  basis_to: ClassifiedBasis, data: CanonicalData,
                  free_values=None, tol: float = DEFAULT_TOL,
                  strict: bool = True) -> SolveResult:
    """Evolve pre-side canonical data across one move.

    The input must satisfy every pre-constraint at the initial step (strict
    mode raises, otherwise the violation is only recorded).  A-priori-free
    output rows are filled from ``free_values`` (default zero).
    """
    if data.step != move.step_from or data.dim != move.dim:
        raise InputError("data does not match the move's initial step")
    split_from = split_variables(basis_from, a_next=move.a)
    pre_pi = split_from.pre_pi(data.x, data.p)
    left = basis_from.left_rows
    scale = max(np.abs(data.x).max(), np.abs(data.p).max(), 1.0)
    residuals = pre_pi[left] if left.size else np.zeros(0)
    if strict and residuals.size and np.abs(residuals).max() > tol * move.dim * scale:
        k = int(np.argmax(np.abs(residuals)))
        raise ConstraintViolationError(
            f"pre-constraint on row {left[k]} ({basis_from.labels[left[k]]}) "
            f"violated by {residuals[k]:.3e} at step {data.step}"
        )

    a_rows, b_rows, c_ab = _square_block(move.c, basis_from, basis_to)
    _check_invertible(c_ab, tol, "c_AB")
    x_split_from = basis_from.to_split_config(data.x)

    x_split_to = np.zeros(move.dim)
    post_pi = np.zeros(move.dim)
    if b_rows.size:
        # -pi_A = -c_AB x^B  and  +pi_B = x^A c_AB
        x_split_to[b_rows] = np.linalg.solve(c_ab, -pre_pi[a_rows])
        post_pi[b_rows] = c_ab.T @ x_split_from[a_rows]
    free_rows = basis_to.right_rows
    injected = _free_vector(basis_to, free_rows, free_values)
    x_split_to[free_rows] = injected

    x_to = basis_to.from_split_config(x_split_to)
    split_to = split_variables(basis_to, b_prev=move.b)
    p_to = split_to.momentum_from_post_pi(x_to, post_pi)
    out = CanonicalData(step=move.step_to, x=x_to, p=p_to, momentum_side="post")
    return SolveResult(
        data=out,
        free_rows=tuple((int(r), basis_to.labels[r]) for r in free_rows),
        injected=injected,
        residuals=residuals,
    )


def backward_solve(move: QuadraticMove, basis_from: ClassifiedBasis,
                   basis_to: ClassifiedBasis, data: CanonicalData,
                   free_values=None, tol: float = DEFAULT_TOL,
                   strict: bool = True) -> SolveResult:
    """Postdict pre-side data at the initial step from post-side data."""
    if data.step != move.step_to or data.dim != move.dim:
        raise InputError("data does not match the move's final step")
    split_to = split_variables(basis_to, b_prev=move.b)
    post_pi = split_to.post_pi(data.x, data.p)
    right = basis_to.right_rows
    scale = max(np.abs(data.x).max(), np.abs(data.p).max(), 1.0)
    residuals = post_pi[right] if right.size else np.zeros(0)
    if strict and residuals.size and np.abs(residuals).max() > tol * move.dim * scale:
        k = int(np.argmax(np.abs(residuals)))
        raise ConstraintViolationError(
            f"post-constraint on row {right[k]} ({basis_to.labels[right[k]]}) "
            f"violated by {residuals[k]:.3e} at step {data.step}"
        )

    a_rows, b_rows, c_ab = _square_block(move.c, basis_from, basis_to)
    _check_invertible(c_ab, tol, "c_AB")
    x_split_to = basis_to.to_split_config(data.x)

    x_split_from = np.zeros(move.dim)
    pre_pi = np.zeros(move.dim)
    if a_rows.size:
        x_split_from[a_rows] = np.linalg.solve(c_ab.T, post_pi[b_rows])
        pre_pi[a_rows] = -c_ab @ x_split_to[b_rows]
    free_rows = basis_from.left_rows
    injected = _free_vector(basis_from, free_rows, free_values)
    x_split_from[free_rows] = injected

    x_from = basis_from.from_split_config(x_split_from)
    split_from = split_variables(basis_from, a_next=move.a)
    p_from = split_from.momentum_from_pre_pi(x_from, pre_pi)
    out = CanonicalData(step=move.step_from, x=x_from, p=p_from, momentum_side="pre")
    return SolveResult(
        data=out,
        free_rows=tuple((int(r), basis_from.labels[r]) for r in free_rows),
        injected=injected,
        residuals=residuals,
    )


def boundary_solve(move1: QuadraticMove, move2: QuadraticMove,
                   basis_mid: ClassifiedBasis, x_initial, x_final,
                   multipliers=None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Middle configuration of a two-move chain from outer configurations.

    Solves h x = -(c1ᵀ x_initial + c2 x_final) on the alpha block; the
    h-null rows (I, l, r, z) stay free and are filled from ``multipliers``.
    The source must be orthogonal to the null rows, otherwise the boundary
    data violates a holonomic or boundary-data constraint.
    """
    x0 = np.asarray(x_initial, dtype=float)
    x2 = np.asarray(x_final, dtype=float)
    q = basis_mid.dim
    if x0.shape != (q,) or x2.shape != (q,):
        raise InputError("boundary configurations must match the dimension")
    h = move1.b + move2.a
    source = move1.c.T @ x0 + move2.c @ x2
    scale = max(np.abs(source).max(), np.abs(x0).max(), np.abs(x2).max(), 1.0)
    for label in ("z", "l", "r"):
        for k in basis_mid.rows_of(label):
            val = basis_mid.T[k] @ source
            if abs(val) > tol * q * scale:
                kind = {"z": "boundary-data", "l": "holonomic", "r": "holonomic"}[label]
                raise InconsistentBoundaryError(
                    f"{kind} constraint from row {k} ({label}) violated by {val:.3e}"
                )

    alpha = basis_mid.alpha_rows
    x_split = np.zeros(q)
    if alpha.size:
        block = basis_mid.T[alpha] @ h @ basis_mid.T[alpha].T
        _check_invertible(block, tol, "alpha block of the Hessian")
        x_split[alpha] = -np.linalg.solve(block, basis_mid.T[alpha] @ source)
    free_rows = basis_mid.rows_of("I", "l", "r", "z")
    x_split[free_rows] = _free_vector(basis_mid, free_rows, multipliers)
    return basis_mid.from_split_config(x_split)


@dataclass(frozen=True)
class VariableRole:
    row: int
    label: str
    pre_observable: bool
    post_observable: bool
    a_priori_free: bool
    a_posteriori_free: bool
    gauge: bool


@dataclass(frozen=True)
class DofReport:
    """Propagation accounting for a two-move chain around a middle step."""

    counts: dict              # step -> type-count dict
    n_move: dict              # (from, to) -> propagating phase-space count
    n_through: int            # observables propagating through the middle step
    m_lambda_rho: int
    first_class: int
    second_class: int
    roles: tuple              # VariableRole per middle-step row


def variable_roles(basis: ClassifiedBasis) -> tuple:
    """Role assignment of every row at a step per its type label."""
    roles = []
    for k, lab in enumerate(basis.labels):
        roles.append(
            VariableRole(
                row=k,
                label=lab,
                pre_observable=lab in ("r", "rho", "z", "gamma"),
                post_observable=lab in ("l", "lambda", "z", "gamma"),
                a_priori_free=lab in RIGHT_TYPES,
                a_posteriori_free=lab in LEFT_TYPES,
                gauge=lab == "I",
            )
        )
    return tuple(roles)


def dof_report(move1: QuadraticMove, move2: QuadraticMove,
               basis_initial: ClassifiedBasis, basis_mid: ClassifiedBasis,
               basis_final: ClassifiedBasis, tol: float = DEFAULT_TOL) -> DofReport:
    """Count propagating observables per move and through the middle step.

    Both counting routes are evaluated: 2(N_gamma + N_z + m_lambda_rho) and
    2Q - 2 #first - #second with the class counts implied by the type
    counts.  They must agree; disagreement means inconsistent counts.
    """
    if move1.step_to != basis_mid.step or move2.step_from != basis_mid.step:
        raise InputError("bases and moves are not aligned")
    h = move1.b + move2.a
    q = basis_mid.dim
    cnt = basis_mid.counts
    m = m_lambda_rho(basis_mid, h, tol)
    if m > min(cnt["lambda"], cnt["rho"]):
        raise InternalError("rank of the lambda-rho block exceeds the type counts")

    n_through = 2 * (cnt["gamma"] + cnt["z"] + m)
    second = 2 * cnt["H"] + 2 * m
    first = cnt["I"] + cnt["l"] + cnt["r"] + cnt["lambda"] + cnt["rho"] - 2 * m
    alt = 2 * q - 2 * first - second
    if alt != n_through:
        raise InternalError(
            f"reduced-phase-space formulas disagree: {n_through} vs {alt}"
        )

    n_move = {
        (move1.step_from, move1.step_to): 2 * len(basis_initial.pre_observable_rows),
        (move2.step_from, move2.step_to): 2 * len(basis_mid.pre_observable_rows),
    }
    # cross-check against the other end of each move
    if 2 * len(basis_mid.post_observable_rows) != n_move[(move1.step_from, move1.step_to)]:
        raise InternalError("pre/post observable counts differ across the first move")
    if 2 * len(basis_final.post_observable_rows) != n_move[(move2.step_from, move2.step_to)]:
        raise InternalError("pre/post observable counts differ across the second move")

    counts = {
        basis_initial.step: basis_initial.counts,
        basis_mid.step: cnt,
        basis_final.step: basis_final.counts,
    }
    return DofReport(
        counts=counts,
        n_move=n_move,
        n_through=n_through,
        m_lambda_rho=m,
        first_class=first,
        second_class=second,
        roles=variable_roles(basis_mid),
    )


@dataclass(frozen=True)
class FixedVariableResult:
    """Middle-step variables fixed by second-class pairs and lambda equations."""

    x_H: np.ndarray               # values on the H rows
    fixed_rho_rows: tuple         # basis row indices of the determinable x^rho
    x_rho_fixed: np.ndarray       # their values
    schur_lambda_rho: np.ndarray  # effective lambda-rho coupling on H-solutions
    rho_shift: np.ndarray         # transfer matrix: -pi~_rho = -pi_rho - shift @ x_split
    gamma_shift: np.ndarray


def fixed_variable_solve(basis: ClassifiedBasis, h, x, post_pi,
                         tol: float = DEFAULT_TOL) -> FixedVariableResult:
    """Solve the H-row holonomic equations and the lambda equations.

    ``x`` supplies the already-known middle configuration (its lambda, rho
    and gamma components are read), ``post_pi`` the post-side split momenta
    (its lambda components feed the lambda equations).  Fixed x^rho rows are
    picked by the column pivoting of a rank-revealing QR of the effective
    lambda-rho block.
    """
    h = np.asarray(h, dtype=float)
    x = np.asarray(x, dtype=float)
    x_split = basis.to_split_config(x)
    rows_h = basis.rows_of("H")
    rows_l = basis.rows_of("lambda")
    rows_r = basis.rows_of("rho")
    rows_g = basis.rows_of("gamma")
    tilde = np.concatenate([rows_l, rows_r, rows_g])

    h_hh = hessian_block(basis, h, "H", "H")
    if rows_h.size:
        sv = np.linalg.svd(h_hh, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= tol * sv[0] * rows_h.size:
            raise DegeneracyError(
                "H block of the Hessian is singular: a pair of second-class "
                "constraints commutes; reclassify the step"
            )
        h_ht = basis.T[rows_h] @ h @ basis.T[tilde].T if tilde.size else np.zeros((rows_h.size, 0))
        x_h = -np.linalg.solve(h_hh, h_ht @ x_split[tilde]) if tilde.size else np.zeros(rows_h.size)
    else:
        x_h = np.zeros(0)

    def schur(rows_a, rows_b):
        """h_ab on solutions of the H equations."""
        if rows_a.size == 0 or rows_b.size == 0:
            return np.zeros((rows_a.size, rows_b.size))
        blk = basis.T[rows_a] @ h @ basis.T[rows_b].T
        if rows_h.size:
            a_h = basis.T[rows_a] @ h @ basis.T[rows_h].T
            h_b = basis.T[rows_h] @ h @ basis.T[rows_b].T
            blk = blk - a_h @ np.linalg.solve(h_hh, h_b)
        return blk

    s_lr = schur(rows_l, rows_r)
    s_lg = schur(rows_l, rows_g)
    s_ll = schur(rows_l, rows_l)
    m = numeric_rank(s_lr, tol) if s_lr.size else 0

    fixed_rows = ()
    x_rho = np.zeros(0)
    if m:
        _, _, piv = scipy.linalg.qr(s_lr, pivoting=True)
        cols = np.sort(piv[:m])
        fixed_rows = tuple(int(rows_r[c]) for c in cols)
        rhs = -(np.asarray(post_pi, dtype=float)[rows_l]
                + s_ll @ x_split[rows_l] + s_lg @ x_split[rows_g])
        # remaining rho columns enter with their current values
        rest = np.setdiff1d(np.arange(rows_r.size), cols)
        if rest.size:
            rhs = rhs - s_lr[:, rest] @ x_split[rows_r[rest]]
        sol, *_ = np.linalg.lstsq(s_lr[:, cols], rhs, rcond=None)
        x_rho = sol

    s_rr = schur(rows_r, rows_r)
    s_rg = schur(rows_r, rows_g)
    s_gr = schur(rows_g, rows_r)
    s_gg = schur(rows_g, rows_g)
    q = basis.dim
    rho_shift = np.zeros((rows_r.size, q))
    if rows_r.size:
        rho_shift[:, rows_r] = s_rr
        if rows_g.size:
            rho_shift[:, rows_g] = s_rg
    gamma_shift = np.zeros((rows_g.size, q))
    if rows_g.size:
        if rows_r.size:
            gamma_shift[:, rows_r] = s_gr
        gamma_shift[:, rows_g] = s_gg
    return FixedVariableResult(
        x_H=x_h,
        fixed_rho_rows=fixed_rows,
        x_rho_fixed=x_rho,
        schur_lambda_rho=s_lr,
        rho_shift=rho_shift,
        gamma_shift=gamma_shift,
    )
