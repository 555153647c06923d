"""Deterministic dense linear algebra: ranks, null bases, intersections.

Every other module sits on top of these kernels.  All routines share one
relative rank threshold (``tol * sigma_max * max(shape)``) and fixed
ordering/sign conventions, so identical inputs always produce
bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, InputError

DEFAULT_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-d float array."""
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.ndim != 2:
        raise InputError(f"expected a matrix, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def _check_tol(tol: float) -> float:
    if not tol > 0:
        raise InputError("tolerance must be positive")
    return float(tol)


def numeric_rank(m, tol: float = DEFAULT_TOL) -> int:
    """Rank as the number of singular values above ``tol*sigma_max*max(shape)``.

    The zero matrix has sigma_max = 0 and therefore rank 0.
    """
    a = as_matrix(m)
    _check_tol(tol)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0] * max(a.shape)))


@dataclass(frozen=True)
class Subspace:
    """A subspace of R^n held as a matrix whose columns are orthonormal."""

    ambient_dim: int
    basis: np.ndarray  # shape (ambient_dim, dim)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise InputError(
                f"basis shape {b.shape} does not match ambient_dim {self.ambient_dim}"
            )
        if b.shape[1] > self.ambient_dim:
            raise InputError("more basis columns than ambient dimensions")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace."""
        return self.basis @ self.basis.T

    def complement_projector(self) -> np.ndarray:
        return np.eye(self.ambient_dim) - self.projector()

    def contains(self, v, tol: float = DEFAULT_TOL) -> bool:
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return True
        return np.linalg.norm(v - self.projector() @ v) <= tol * self.ambient_dim * nv

    def same_span(self, other: "Subspace", tol: float = DEFAULT_TOL) -> bool:
        """Span equality, checked by mutual projection residuals."""
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        if self.dim == 0:
            return True
        r1 = np.linalg.norm(self.complement_projector() @ other.basis)
        r2 = np.linalg.norm(other.complement_projector() @ self.basis)
        return max(r1, r2) <= tol * self.ambient_dim * max(self.dim, 1)


def full_space(n: int) -> Subspace:
    return Subspace(n, np.eye(n))


def empty_subspace(n: int) -> Subspace:
    return Subspace(n, np.zeros((n, 0)))


def _fix_signs(rows: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude component (first on near-ties)
    is positive."""
    out = rows.copy()
    for k in range(out.shape[0]):
        row = out[k]
        mags = np.abs(row)
        top = mags.max()
        if top == 0.0:
            continue
        j = int(np.argmax(mags >= top * (1.0 - 1e-12)))
        if row[j] < 0:
            out[k] = -row
    return out


def right_null_basis(m, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of {v : M v = 0}, deterministically ordered.

    Basis vectors are the right singular vectors below the rank threshold,
    sorted by ascending singular value then index, with the sign fixed so
    the largest-magnitude component of each vector is positive.
    """
    a = as_matrix(m)
    _check_tol(tol)
    n = a.shape[1]
    if n == 0:
        return empty_subspace(0)
    if a.shape[0] == 0 or not np.any(a):
        return full_space(n)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    sigma = np.zeros(n)
    sigma[: s.size] = s
    cut = tol * (s[0] if s.size else 0.0) * max(a.shape)
    rank = int(np.sum(sigma > cut))
    idx = sorted(range(rank, n), key=lambda k: (sigma[k], k))
    rows = _fix_signs(vh[idx]) if idx else np.zeros((0, n))
    return Subspace(n, rows.T)


def left_null_basis(m, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of {v : vᵀ M = 0}; the right null space of Mᵀ."""
    return right_null_basis(as_matrix(m).T, tol)


def intersect(s1: Subspace, s2: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Intersection of two subspaces.

    Computed as the null space of the stacked orthogonal-complement
    projectors, which is deterministic and basis independent.
    """
    if s1.ambient_dim != s2.ambient_dim:
        raise InputError("ambient dimensions differ")
    stacked = np.vstack([s1.complement_projector(), s2.complement_projector()])
    return right_null_basis(stacked, tol)


def subtract(s: Subspace, *excluded: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of ``s`` intersected with the orthogonal complement
    of the span of all ``excluded`` subspaces."""
    blocks = [s.complement_projector()]
    for e in excluded:
        if e.ambient_dim != s.ambient_dim:
            raise InputError("ambient dimensions differ")
        if e.dim:
            blocks.append(e.basis.T)
    return right_null_basis(np.vstack(blocks), tol)


def span_of_rows(rows, ambient_dim: int, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormalized span of a stack of row vectors."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size == 0:
        return empty_subspace(ambient_dim)
    # span(rows) = complement of the right null space of the row stack
    return subtract(full_space(ambient_dim), right_null_basis(rows, tol), tol=tol)


def restricted_inverse(h, s: Subspace, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Invert a symmetric matrix on a subspace, annihilating its complement.

    Returns ``Bᵀ (B h Bᵀ)⁻¹ B`` for the subspace's basis rows ``B``.  When
    ``s`` is the orthogonal complement of null(h) this is the Moore-Penrose
    pseudoinverse and satisfies ``h h⁺ h = h``.
    """
    a = as_matrix(h)
    _check_tol(tol)
    q = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise InputError("matrix must be square")
    scale = np.abs(a).max() if a.size else 0.0
    if scale and np.abs(a - a.T).max() > tol * q * scale:
        raise InputError("matrix must be symmetric")
    if s.ambient_dim != q:
        raise InputError("subspace ambient dimension mismatch")
    if s.dim == 0:
        return np.zeros((q, q))
    rows = s.basis.T
    block = rows @ a @ rows.T
    sv = np.linalg.svd(block, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= tol * sv[0] * s.dim:
        raise DegeneracyError(
            "matrix restricted to the subspace is singular beyond tolerance"
        )
    return rows.T @ np.linalg.solve(block, rows)
