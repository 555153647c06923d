"""Eight-type null-vector classification and the labelled step basis.

At a step sandwiched between cross matrices c_prev (incoming) and c_next
(outgoing) with middle Hessian h, every direction falls into one of eight
types by membership in rightNull(c_prev), leftNull(c_next) and null(h):

    I      in all three                 gauge
    H      both c-nulls, not h-null     second-class pair
    l      leftNull + h-null only       coarse-graining, holonomic source
    lambda leftNull only                coarse-graining
    r      rightNull + h-null only      refining, holonomic source
    rho    rightNull only               refining
    z      h-null only                  boundary-data
    gamma  none                         fully propagating
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, InputError
from .linalg import (
    DEFAULT_TOL,
    as_matrix,
    full_space,
    intersect,
    left_null_basis,
    numeric_rank,
    right_null_basis,
    subtract,
)

VECTOR_TYPES = ("I", "H", "l", "lambda", "r", "rho", "z", "gamma")

# index groups used throughout the canonical analysis
LEFT_TYPES = ("I", "H", "l", "lambda")      # pre-constraint rows
RIGHT_TYPES = ("I", "H", "r", "rho")        # post-constraint rows
ALPHA_TYPES = ("H", "lambda", "rho", "gamma")   # h-regular block
NULL_TYPES = ("I", "l", "r", "z")           # h-null block
PRE_OBS_TYPES = ("r", "rho", "z", "gamma")  # A rows: propagate out of the step
POST_OBS_TYPES = ("l", "lambda", "z", "gamma")  # B rows: propagate into the step


@dataclass(frozen=True)
class ClassifiedBasis:
    """Invertible step basis with one of the eight type labels per row."""

    step: int
    T: np.ndarray          # (Q, Q); row Gamma is basis vector (T)_Gamma
    labels: tuple          # one VECTOR_TYPES entry per row
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        t = as_matrix(self.T)
        if t.shape[0] != t.shape[1]:
            raise InputError("T must be square")
        if len(self.labels) != t.shape[0]:
            raise InputError("one label per row required")
        for lab in self.labels:
            if lab not in VECTOR_TYPES:
                raise InputError(f"unknown vector type {lab!r}")
        object.__setattr__(self, "T", t)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    @property
    def counts(self) -> dict:
        return {t: self.labels.count(t) for t in VECTOR_TYPES}

    def rows_of(self, *types) -> np.ndarray:
        """Row indices carrying any of the given labels, in basis order."""
        types = set(types)
        return np.array([k for k, lab in enumerate(self.labels) if lab in types], dtype=int)

    def block(self, *types) -> np.ndarray:
        """The sub-matrix of T rows with the given labels."""
        idx = self.rows_of(*types)
        return self.T[idx] if idx.size else np.zeros((0, self.dim))

    @property
    def left_rows(self) -> np.ndarray:
        return self.rows_of(*LEFT_TYPES)

    @property
    def right_rows(self) -> np.ndarray:
        return self.rows_of(*RIGHT_TYPES)

    @property
    def alpha_rows(self) -> np.ndarray:
        return self.rows_of(*ALPHA_TYPES)

    @property
    def pre_observable_rows(self) -> np.ndarray:
        return self.rows_of(*PRE_OBS_TYPES)

    @property
    def post_observable_rows(self) -> np.ndarray:
        return self.rows_of(*POST_OBS_TYPES)

    @property
    def abs_det(self) -> float:
        return float(abs(np.linalg.det(self.T)))

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.T)

    def to_split_config(self, x) -> np.ndarray:
        """x^Gamma = (T^-T x)^Gamma."""
        return np.linalg.solve(self.T.T, np.asarray(x, dtype=float))

    def from_split_config(self, x_split) -> np.ndarray:
        return self.T.T @ np.asarray(x_split, dtype=float)

    def to_split_momentum(self, p) -> np.ndarray:
        return self.T @ np.asarray(p, dtype=float)

    def from_split_momentum(self, p_split) -> np.ndarray:
        return np.linalg.solve(self.T, np.asarray(p_split, dtype=float))

    def alpha_block_of(self, h) -> np.ndarray:
        rows = self.block(*ALPHA_TYPES)
        return rows @ as_matrix(h) @ rows.T

    def restricted_hessian_inverse(self, h, tol: float = None) -> np.ndarray:
        """h^+ = T_alphaᵀ (T_alpha h T_alphaᵀ)⁻¹ T_alpha on the alpha block."""
        tol = self.tol if tol is None else tol
        rows = self.block(*ALPHA_TYPES)
        if rows.shape[0] == 0:
            return np.zeros((self.dim, self.dim))
        block = rows @ as_matrix(h) @ rows.T
        sv = np.linalg.svd(block, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= tol * sv[0] * rows.shape[0]:
            raise DegeneracyError(
                f"alpha block of the Hessian at step {self.step} is singular; "
                "the classification is inconsistent with the data"
            )
        return rows.T @ np.linalg.solve(block, rows)


def _null_data(c_prev, c_next, h, q: int, tol: float):
    h = as_matrix(h)
    if h.shape != (q, q):
        raise InputError("Hessian dimension mismatch")
    scale = np.abs(h).max() if h.size else 0.0
    if scale and np.abs(h - h.T).max() > tol * q * scale:
        raise InputError("Hessian must be symmetric")
    right = full_space(q) if c_prev is None else right_null_basis(as_matrix(c_prev), tol)
    left = full_space(q) if c_next is None else left_null_basis(as_matrix(c_next), tol)
    hnull = right_null_basis(h, tol)
    if right.ambient_dim != q or left.ambient_dim != q:
        raise InputError("cross-matrix dimensions do not match the Hessian")
    return right, left, hnull


def classify_step(c_prev, c_next, h, tol: float = DEFAULT_TOL, step: int = 0) -> ClassifiedBasis:
    """Build the labelled transformation basis at one step.

    ``c_prev``/``c_next`` may be None at the ends of a sequence; an absent
    matrix acts like the zero matrix (every vector is a null vector on that
    side).  The basis follows the staged maximal-independence procedure:
    I first, then H/l/r, then lambda/rho, then z, then gamma; each group is
    internally orthonormal.
    """
    q = as_matrix(h).shape[0]
    right, left, hnull = _null_data(c_prev, c_next, h, q, tol)

    two_sided = intersect(right, left, tol)
    grp = {}
    grp["I"] = intersect(two_sided, hnull, tol)
    grp["H"] = subtract(two_sided, grp["I"], tol=tol)
    grp["l"] = subtract(intersect(left, hnull, tol), grp["I"], tol=tol)
    grp["r"] = subtract(intersect(right, hnull, tol), grp["I"], tol=tol)
    grp["lambda"] = subtract(left, grp["I"], grp["H"], grp["l"], tol=tol)
    grp["rho"] = subtract(right, grp["I"], grp["H"], grp["r"], tol=tol)
    grp["z"] = subtract(hnull, grp["I"], grp["l"], grp["r"], tol=tol)
    chosen = [grp[t] for t in ("I", "H", "l", "lambda", "r", "rho", "z")]
    grp["gamma"] = subtract(full_space(q), *chosen, tol=tol)

    rows, labels = [], []
    for t in VECTOR_TYPES:
        sub = grp[t]
        for k in range(sub.dim):
            rows.append(sub.basis[:, k])
            labels.append(t)
    if len(rows) != q:
        raise DegeneracyError(
            f"step {step}: classification produced {len(rows)} of {q} basis vectors"
        )
    t_matrix = np.vstack(rows)
    if numeric_rank(t_matrix, tol) < q:
        raise DegeneracyError(f"step {step}: classified basis is numerically singular")
    basis = ClassifiedBasis(step=step, T=t_matrix, labels=tuple(labels), tol=tol)
    _check_counts(basis, right, left, hnull, tol)
    return basis


def _check_counts(basis, right, left, hnull, tol):
    c = basis.counts
    q = basis.dim
    if sum(c.values()) != q:
        raise DegeneracyError("type counts do not sum to the dimension")
    n_left = c["I"] + c["H"] + c["l"] + c["lambda"]
    n_right = c["I"] + c["H"] + c["r"] + c["rho"]
    n_null = c["I"] + c["l"] + c["r"] + c["z"]
    if n_left != left.dim or n_right != right.dim or n_null != hnull.dim:
        raise DegeneracyError("group dimensions inconsistent with null spaces")


def label_for(v, c_prev, c_next, h, tol: float = DEFAULT_TOL) -> str:
    """Type label of a single vector by direct membership tests."""
    v = np.asarray(v, dtype=float)
    q = v.size

    def is_null(mat, left_side):
        if mat is None:
            return True
        m = as_matrix(mat)
        prod = v @ m if left_side else m @ v
        s = np.linalg.svd(m, compute_uv=False)
        scale = (s[0] if s.size else 0.0) * max(m.shape)
        return np.linalg.norm(prod) <= tol * max(scale, 1e-300) * np.linalg.norm(v)

    in_right = is_null(c_prev, left_side=False)
    in_left = is_null(c_next, left_side=True)
    in_hnull = is_null(h, left_side=True)
    if in_right and in_left:
        return "I" if in_hnull else "H"
    if in_left:
        return "l" if in_hnull else "lambda"
    if in_right:
        return "r" if in_hnull else "rho"
    return "z" if in_hnull else "gamma"


def classify_rows(T, c_prev, c_next, h, tol: float = DEFAULT_TOL, step: int = 0) -> ClassifiedBasis:
    """Label the rows of an explicitly supplied basis (e.g. a reference fixture)."""
    t = as_matrix(T)
    q = t.shape[0]
    if numeric_rank(t, tol) < q:
        raise DegeneracyError(f"step {step}: supplied basis is singular")
    labels = tuple(label_for(t[k], c_prev, c_next, h, tol) for k in range(q))
    return ClassifiedBasis(step=step, T=t, labels=labels, tol=tol)


def classify_sequence(seq, tol: float = DEFAULT_TOL, overrides: dict = None) -> dict:
    """Classified bases for every step of a move sequence.

    ``overrides`` maps step -> explicit T matrix; overridden steps are
    labelled with classify_rows instead of the default construction.
    """
    overrides = overrides or {}
    bases = {}
    for n in seq.steps:
        m_in = seq.move_into(n)
        m_out = seq.move_out_of(n)
        c_prev = None if m_in is None else m_in.c
        c_next = None if m_out is None else m_out.c
        h = seq.hessian(n)
        if n in overrides:
            bases[n] = classify_rows(overrides[n], c_prev, c_next, h, tol, step=n)
        else:
            bases[n] = classify_step(c_prev, c_next, h, tol, step=n)
    return bases


@dataclass(frozen=True)
class VariableSplit:
    """Data of the canonical transformation to split coordinates.

        x^Gamma = (T^-T x)^Gamma
        -pi_Gamma = (T p)_Gamma + (T a_next x)_Gamma
        +pi_Gamma = (T p)_Gamma - (T b_prev x)_Gamma
    """

    basis: ClassifiedBasis
    x_map: np.ndarray       # (T^{-1})ᵀ
    pre_shift: np.ndarray   # T a_next
    post_shift: np.ndarray  # T b_prev

    def pre_pi(self, x, p) -> np.ndarray:
        return self.basis.to_split_momentum(p) + self.pre_shift @ np.asarray(x, float)

    def post_pi(self, x, p) -> np.ndarray:
        return self.basis.to_split_momentum(p) - self.post_shift @ np.asarray(x, float)

    def momentum_from_pre_pi(self, x, pre_pi) -> np.ndarray:
        p_split = np.asarray(pre_pi, float) - self.pre_shift @ np.asarray(x, float)
        return self.basis.from_split_momentum(p_split)

    def momentum_from_post_pi(self, x, post_pi) -> np.ndarray:
        p_split = np.asarray(post_pi, float) + self.post_shift @ np.asarray(x, float)
        return self.basis.from_split_momentum(p_split)


def split_variables(basis: ClassifiedBasis, a_next=None, b_prev=None) -> VariableSplit:
    """Assemble the split-coordinate transformation at a step.

    Absent neighbour matrices are treated as zero, matching the end-of-
    sequence convention of classify_step.
    """
    q = basis.dim
    a_next = np.zeros((q, q)) if a_next is None else as_matrix(a_next)
    b_prev = np.zeros((q, q)) if b_prev is None else as_matrix(b_prev)
    x_map = np.linalg.inv(basis.T).T
    return VariableSplit(
        basis=basis,
        x_map=x_map,
        pre_shift=basis.T @ a_next,
        post_shift=basis.T @ b_prev,
    )


def hessian_block(basis: ClassifiedBasis, h, row_types, col_types) -> np.ndarray:
    """The (row_types, col_types) sub-block of T h Tᵀ."""
    if isinstance(row_types, str):
        row_types = (row_types,)
    if isinstance(col_types, str):
        col_types = (col_types,)
    return basis.block(*row_types) @ as_matrix(h) @ basis.block(*col_types).T


def m_lambda_rho(basis: ClassifiedBasis, h, tol: float = None) -> int:
    """Rank of the (lambda, rho) block of the Hessian in this basis."""
    tol = basis.tol if tol is None else tol
    block = hessian_block(basis, h, "lambda", "rho")
    if block.size == 0:
        return 0
    return numeric_rank(block, tol)
