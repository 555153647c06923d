"""Exact calculus of Gaussian kernels with linear delta factors.

Amplitudes are tracked exactly: a log modulus, an integer count of
eighth-turn phase factors (one unit = exp(i pi/4), so the factor i counts
as two units and a square root of i as one), and a continuous residual
phase.  Square roots of (+-2 pi i hbar)^n and Fresnel signature phases
land on the eighth-turn lattice, which keeps composed measures exactly
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import ClassifiedBasis
from .errors import (
    DegeneracyError,
    DivergenceError,
    InputError,
)
from .linalg import DEFAULT_TOL, as_matrix, numeric_rank

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Amplitude:
    """Exact amplitude exp(log_modulus) * exp(i*(pi/4 * i_exponent + phase))."""

    log_modulus: float = 0.0
    i_exponent: int = 0
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "i_exponent", int(self.i_exponent) % 8)

    @property
    def value(self) -> complex:
        return np.exp(self.log_modulus + 1j * (np.pi / 4.0 * self.i_exponent + self.phase))

    @property
    def modulus(self) -> float:
        return float(np.exp(self.log_modulus))

    def times(self, other: "Amplitude") -> "Amplitude":
        return Amplitude(
            self.log_modulus + other.log_modulus,
            self.i_exponent + other.i_exponent,
            self.phase + other.phase,
        )

    def times_log(self, log_modulus: float, phase: float = 0.0,
                  i_exponent: int = 0) -> "Amplitude":
        return Amplitude(
            self.log_modulus + log_modulus,
            self.i_exponent + i_exponent,
            self.phase + phase,
        )


def _principal_logdet_neg_i(g: np.ndarray) -> complex:
    """log det(-iG) for complex symmetric G with positive definite Im G.

    All eigenvalues of -iG then lie in the open right half plane, so the
    principal branch is taken eigenvalue by eigenvalue.  Raises when an
    eigenvalue leaves the right half plane (the Gaussian diverges).
    """
    if g.shape[0] == 0:
        return 0.0 + 0.0j
    vals = np.linalg.eigvals(-1j * g)
    scale = max(np.abs(vals).max(), 1e-300)
    if np.any(vals.real <= 1e-13 * scale):
        raise DivergenceError("Gaussian quadratic form is not damped in some direction")
    return complex(np.sum(np.log(vals)))


def _check_im_positive(g: np.ndarray, tol: float, what: str):
    if g.shape[0] == 0:
        return
    im = 0.5 * (g - g.conj().T) / 1j
    im = 0.5 * (im + im.T).real
    vals = np.linalg.eigvalsh(im)
    scale = max(np.abs(g).max(), 1.0)
    if vals[0] <= tol * g.shape[0] * scale:
        raise DivergenceError(
            f"{what}: integral over a flat or growing direction diverges "
            "(double projection or non-normalizable state)"
        )


@dataclass(frozen=True)
class GaussianDeltaKernel:
    """amplitude * exp(i(x_inᵀ A x_in/2 + x_inᵀ C x_out + x_outᵀ B x_out/2)/hbar)
    times a product of one-dimensional deltas of linear functionals on
    (x_in, x_out)."""

    in_step: int
    out_step: int
    hbar: float
    amplitude: Amplitude
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    deltas: np.ndarray = None          # (k, dim_in + dim_out)
    delta_labels: tuple = ()
    basis_in: ClassifiedBasis = None
    basis_out: ClassifiedBasis = None

    def __post_init__(self):
        if self.hbar <= 0:
            raise InputError("hbar must be positive")
        a, b, c = as_matrix(self.A), as_matrix(self.B), as_matrix(self.C)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "C", c)
        d = self.deltas
        d = np.zeros((0, self.dim_in + self.dim_out)) if d is None else np.atleast_2d(np.asarray(d, float))
        if d.shape[0] and d.shape[1] != self.dim_in + self.dim_out:
            raise InputError("delta rows must span the concatenated space")
        if d.shape[0] and numeric_rank(d) < d.shape[0]:
            raise InputError("delta rows must be linearly independent")
        object.__setattr__(self, "deltas", d)

    @property
    def dim_in(self) -> int:
        return self.A.shape[0]

    @property
    def dim_out(self) -> int:
        return self.B.shape[0]

    @property
    def log_modulus(self) -> float:
        return self.amplitude.log_modulus

    @property
    def i_exponent(self) -> int:
        return self.amplitude.i_exponent

    @property
    def continuous_phase(self) -> float:
        return self.amplitude.phase

    def phase_quadratic(self, x_in, x_out) -> float:
        x0 = np.asarray(x_in, float)
        x1 = np.asarray(x_out, float)
        return float(0.5 * x0 @ self.A @ x0 + x0 @ self.C @ x1 + 0.5 * x1 @ self.B @ x1)

    def smooth_value(self, x_in, x_out) -> complex:
        """Kernel value with the delta factors stripped."""
        return self.amplitude.value * np.exp(1j * self.phase_quadratic(x_in, x_out) / self.hbar)

    def delta_arguments(self, x_in, x_out) -> np.ndarray:
        y = np.concatenate([np.asarray(x_in, float), np.asarray(x_out, float)])
        return self.deltas @ y

    def regulated_value(self, x_in, x_out, eps: float) -> complex:
        """Value with every delta replaced by a width-controlled Gaussian,
        delta(t) -> exp(-t^2/(4 eps hbar^2)) / (2 hbar sqrt(pi eps))."""
        val = self.smooth_value(x_in, x_out)
        for t in self.delta_arguments(x_in, x_out):
            val *= np.exp(-t**2 / (4.0 * eps * self.hbar**2)) / (2.0 * self.hbar * np.sqrt(np.pi * eps))
        return val


def propagator_from_move(move, basis_from: ClassifiedBasis, basis_to: ClassifiedBasis,
                         hbar: float = 1.0, tol: float = DEFAULT_TOL) -> GaussianDeltaKernel:
    """Physical propagator of one move: measure times exp(i S / hbar).

    The constant measure is sqrt((-2 pi i hbar)^(-N_A) |det T_from^-1
    det c_AB det T_to^-1|), the unique choice making the move's evolution
    map unitary between its physical Hilbert spaces.
    """
    a_rows = basis_from.pre_observable_rows
    b_rows = basis_to.post_observable_rows
    if a_rows.size != b_rows.size:
        raise DegeneracyError(
            "pre- and post-observable counts differ; bases are inconsistent"
        )
    n_a = int(a_rows.size)
    c_ab = basis_from.T[a_rows] @ move.c @ basis_to.T[b_rows].T
    sign, logdet_cab = np.linalg.slogdet(c_ab) if n_a else (1.0, 0.0)
    if n_a and (sign == 0 or not np.isfinite(logdet_cab)):
        raise DegeneracyError("c_AB singular: classification inconsistent with move")
    log_mod = 0.5 * (
        -n_a * np.log(TWO_PI * hbar)
        + logdet_cab
        - np.log(basis_from.abs_det)
        - np.log(basis_to.abs_det)
    )
    # sqrt((-i)^(-N_A)) = exp(i pi N_A / 4): N_A eighth turns
    amp = Amplitude(log_modulus=log_mod, i_exponent=n_a, phase=0.0)
    return GaussianDeltaKernel(
        in_step=move.step_from,
        out_step=move.step_to,
        hbar=hbar,
        amplitude=amp,
        A=move.a,
        B=move.b,
        C=move.c,
        basis_in=basis_from,
        basis_out=basis_to,
    )


def compose_kernels(k1: GaussianDeltaKernel, k2: GaussianDeltaKernel,
                    basis_mid: ClassifiedBasis, tol: float = DEFAULT_TOL) -> GaussianDeltaKernel:
    """Glue two kernels by integrating over the shared step.

    A Faddeev-Popov fixing delta (unit determinant here) absorbs each
    gauge (type I) direction; the alpha block integrates in closed form
    (stationary phase is exact); every surviving l/r/z row emits one
    delta factor carrying its holonomic or boundary-data constraint and a
    factor 2 pi hbar.
    """
    if k1.out_step != k2.in_step:
        raise InputError("kernels are not adjacent")
    if k1.hbar != k2.hbar:
        raise InputError("kernels carry different hbar")
    q = k1.dim_out
    if k2.dim_in != q or basis_mid.dim != q:
        raise InputError("glued-step dimensions disagree")
    for d in k1.deltas:
        if np.abs(d[k1.dim_in:]).max() > tol:
            raise InputError(
                "a delta factor of the first kernel involves the glued step; "
                "solve it before composing"
            )
    for d in k2.deltas:
        if np.abs(d[:q]).max() > tol:
            raise InputError(
                "a delta factor of the second kernel involves the glued step; "
                "solve it before composing"
            )
    hbar = k1.hbar
    h = k1.B + k2.A

    alpha = basis_mid.alpha_rows
    amp = k1.amplitude.times(k2.amplitude)
    amp = amp.times_log(np.log(basis_mid.abs_det))
    if alpha.size:
        block = basis_mid.T[alpha] @ h @ basis_mid.T[alpha].T
        lam = np.linalg.eigvalsh(block)
        scale = max(np.abs(lam).max(), 1e-300)
        if np.abs(lam).min() <= tol * alpha.size * scale:
            raise DegeneracyError(
                "alpha block of the glued-step Hessian is singular; "
                "classification inconsistent"
            )
        signature = int(np.sum(lam > 0) - np.sum(lam < 0))
        amp = amp.times_log(
            0.5 * alpha.size * np.log(TWO_PI * hbar) - 0.5 * np.sum(np.log(np.abs(lam))),
            i_exponent=signature,
        )
        h_plus = basis_mid.T[alpha].T @ np.linalg.solve(block, basis_mid.T[alpha])
    else:
        h_plus = np.zeros((q, q))

    a_eff = k1.A - k1.C @ h_plus @ k1.C.T
    b_eff = k2.B - k2.C.T @ h_plus @ k2.C
    c_eff = -k1.C @ h_plus @ k2.C

    new_deltas, new_labels = [], []
    for label in ("l", "r", "z"):
        for k in basis_mid.rows_of(label):
            row = basis_mid.T[k]
            d = np.concatenate([k1.C @ row, k2.C.T @ row])
            new_deltas.append(d)
            new_labels.append(f"{label}@{basis_mid.step}")
            amp = amp.times_log(np.log(TWO_PI * hbar))

    carried = []
    labels = []
    dim_in, dim_out = k1.dim_in, k2.dim_out
    for d, lab in zip(k1.deltas, k1.delta_labels or [""] * len(k1.deltas)):
        carried.append(np.concatenate([d[:dim_in], np.zeros(dim_out)]))
        labels.append(lab)
    for d, lab in zip(k2.deltas, k2.delta_labels or [""] * len(k2.deltas)):
        carried.append(np.concatenate([np.zeros(dim_in), d[q:]]))
        labels.append(lab)
    all_deltas = carried + new_deltas
    all_labels = tuple(labels) + tuple(new_labels)
    return GaussianDeltaKernel(
        in_step=k1.in_step,
        out_step=k2.out_step,
        hbar=hbar,
        amplitude=amp,
        A=a_eff,
        B=b_eff,
        C=c_eff,
        deltas=np.vstack(all_deltas) if all_deltas else None,
        delta_labels=all_labels,
        basis_in=k1.basis_in,
        basis_out=k2.basis_out,
    )


@dataclass(frozen=True)
class GaussianState:
    """amplitude * exp(i(xᵀ M x/2 + jᵀ x)/hbar) with complex M, j.

    Im M must be positive semidefinite, strictly positive on the rows that
    carry the square-integrable part (``support_labels`` when known).
    """

    step: int
    hbar: float
    amplitude: Amplitude
    M: np.ndarray
    j: np.ndarray
    support_labels: tuple = None

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.M, dtype=complex))
        j = np.asarray(self.j, dtype=complex)
        if m.shape[0] != m.shape[1] or j.shape != (m.shape[0],):
            raise InputError("M must be square and j a matching vector")
        if np.abs(m - m.T).max() > 1e-12 * max(np.abs(m).max(), 1.0):
            raise InputError("M must be (complex) symmetric")
        if self.hbar <= 0:
            raise InputError("hbar must be positive")
        object.__setattr__(self, "M", m)
        object.__setattr__(self, "j", j)

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def value(self, x) -> complex:
        x = np.asarray(x, dtype=float)
        return self.amplitude.value * np.exp(
            1j * (0.5 * x @ self.M @ x + self.j @ x) / self.hbar
        )


def _abelian_or_raise(constraints, tol):
    cons = list(constraints)
    for i, ci in enumerate(cons):
        for cj in cons[i + 1:]:
            br = ci.x_coeffs @ cj.p_coeffs - ci.p_coeffs @ cj.x_coeffs
            scale = max(
                np.abs(ci.p_coeffs).max(), np.abs(ci.x_coeffs).max(),
                np.abs(cj.p_coeffs).max(), np.abs(cj.x_coeffs).max(), 1.0,
            )
            if abs(br) > tol * ci.p_coeffs.size * scale**2:
                raise InputError("projector requires an abelian constraint set")
    return cons


def project_physical(state: GaussianState, constraints, side: str,
                     tol: float = DEFAULT_TOL) -> GaussianState:
    """Group-averaging projection of a Gaussian state onto a constraint set.

    Averages the unitary flows exp(i s C / hbar) of the (abelian) linear
    constraints over their non-compact orbits.  A state already annihilated
    by one of the constraints makes the orbit integral diverge; that double
    projection is detected and raised, never silently evaluated.
    """
    if side not in ("pre", "post"):
        raise InputError("side must be 'pre' or 'post'")
    cons = _abelian_or_raise(constraints, tol)
    if not cons:
        return state
    q = state.dim
    for c in cons:
        if c.steps != (state.step,):
            raise InputError("constraints must live at the state's step")
        if c.p_coeffs.size != q:
            raise InputError("constraint dimension mismatch")
    u = np.stack([c.p_coeffs for c in cons], axis=1)     # (Q, N)
    v = np.stack([c.x_coeffs for c in cons], axis=1)
    n = u.shape[1]
    hbar = state.hbar

    g = u.T @ state.M @ u + 0.5 * (u.T @ v + v.T @ u)
    _check_im_positive(g, tol, "group averaging")
    w_mat = u.T @ state.M + v.T                          # theta(x) = w_mat x + w0
    w0 = u.T @ state.j

    logdet = _principal_logdet_neg_i(g)
    g_inv = np.linalg.inv(g)
    m_new = state.M - w_mat.T @ g_inv @ w_mat
    j_new = state.j - w_mat.T @ g_inv @ w0
    const = -0.5 * w0 @ g_inv @ w0                       # enters as exp(i const / hbar)
    amp = state.amplitude.times_log(
        -0.5 * n * np.log(TWO_PI * hbar) - 0.5 * logdet.real - const.imag / hbar,
        phase=-0.5 * logdet.imag + const.real / hbar,
    )
    return GaussianState(
        step=state.step, hbar=hbar, amplitude=amp,
        M=0.5 * (m_new + m_new.T), j=j_new, support_labels=state.support_labels,
    )


def evolve_state(kernel: GaussianDeltaKernel, state: GaussianState,
                 tol: float = DEFAULT_TOL) -> GaussianState:
    """Map a pre-physical Gaussian state through a propagator.

    Integrates over the pre-observable split coordinates of the kernel's
    in-step only; the state must be supported there, i.e. its phase must
    cancel the kernel's in-block on every non-observable row.
    """
    if kernel.basis_in is None:
        raise InputError("kernel carries no in-step basis; cannot identify observables")
    if state.step != kernel.in_step or state.dim != kernel.dim_in:
        raise InputError("state does not live at the kernel's in-step")
    if state.hbar != kernel.hbar:
        raise InputError("state and kernel carry different hbar")
    if kernel.deltas.shape[0]:
        # delta factors would take the output outside the Gaussian class
        raise InputError("kernel carries delta factors; solve them before evolving states")
    basis = kernel.basis_in
    t = basis.T
    phi = t @ (state.M + kernel.A) @ t.T
    j_split = t @ state.j
    c_split = t @ kernel.C
    a_rows = basis.pre_observable_rows
    rest = np.setdiff1d(np.arange(basis.dim), a_rows)
    scale = max(np.abs(phi).max(), np.abs(j_split).max() if j_split.size else 0.0, 1.0)
    if rest.size:
        leak = max(
            np.abs(phi[rest, :]).max() if rest.size else 0.0,
            np.abs(j_split[rest]).max() if rest.size else 0.0,
            np.abs(c_split[rest, :]).max() if rest.size else 0.0,
        )
        if leak > tol * basis.dim * scale:
            raise InputError(
                "state support does not match the pre-observable rows "
                f"(leakage {leak:.3e} on non-observable rows)"
            )
    hbar = kernel.hbar
    amp = state.amplitude.times(kernel.amplitude)
    if a_rows.size:
        phi_aa = phi[np.ix_(a_rows, a_rows)]
        _check_im_positive(phi_aa, tol, "state evolution")
        logdet = _principal_logdet_neg_i(phi_aa)
        inv = np.linalg.inv(phi_aa)
        c_a = c_split[a_rows]
        j_a = j_split[a_rows]
        m_new = kernel.B - c_a.T @ inv @ c_a
        j_new = -c_a.T @ inv @ j_a
        const = -0.5 * j_a @ inv @ j_a
        amp = amp.times_log(
            0.5 * a_rows.size * np.log(TWO_PI * hbar) - 0.5 * logdet.real - const.imag / hbar,
            phase=-0.5 * logdet.imag + const.real / hbar,
        )
    else:
        m_new = kernel.B.astype(complex)
        j_new = np.zeros(kernel.dim_out, dtype=complex)
    support = None
    if kernel.basis_out is not None:
        support = tuple(int(r) for r in kernel.basis_out.post_observable_rows)
    return GaussianState(
        step=kernel.out_step, hbar=hbar, amplitude=amp,
        M=0.5 * (m_new + m_new.T), j=j_new, support_labels=support,
    )


def check_annihilation(kernel: GaussianDeltaKernel, constraint, side: str,
                       tol: float = DEFAULT_TOL) -> bool:
    """Whether a linear constraint annihilates the kernel.

    Momenta act as derivatives of the phase; the resulting linear
    functional must vanish on the support of the delta factors, i.e. lie
    in their row space, and the momentum coefficients must not hit any
    delta argument (which would leave a delta-derivative behind).
    """
    if side not in ("pre", "post"):
        raise InputError("side must be 'pre' or 'post'")
    step = kernel.in_step if side == "pre" else kernel.out_step
    if step not in constraint.steps:
        raise InputError(f"constraint does not live at the kernel's {side} step")
    p = constraint.p_coeffs
    x_own = constraint.x_part_at(step)
    far = None
    if len(constraint.steps) == 2:
        other = [s for s in constraint.steps if s != step][0]
        if other not in (kernel.in_step, kernel.out_step):
            raise InputError(
                f"constraint references step {other} which the kernel does not carry"
            )
        far = constraint.x_part_at(other)

    din, dout = kernel.dim_in, kernel.dim_out
    ell = np.zeros(din + dout)
    if side == "post":
        # p-hat K = (grad_out phase) K: C^T x_in + B x_out
        ell[:din] += kernel.C @ p
        ell[din:] += kernel.B @ p + x_own
        if far is not None:
            ell[:din] += far
        p_hits = kernel.deltas[:, din:] @ p if kernel.deltas.shape[0] else np.zeros(0)
    else:
        # pre-constraints annihilate the reversed kernel; on K itself the
        # pre-momentum acts as minus the in-gradient of the phase
        ell[:din] += -(kernel.A @ p) + x_own
        ell[din:] += -(kernel.C.T @ p)
        if far is not None:
            ell[din:] += far
        p_hits = kernel.deltas[:, :din] @ p if kernel.deltas.shape[0] else np.zeros(0)

    scale = max(
        np.abs(p).max() if p.size else 0.0,
        np.abs(x_own).max() if x_own.size else 0.0,
        np.abs(kernel.A).max(), np.abs(kernel.B).max(), np.abs(kernel.C).max(), 1.0,
    )
    cut = tol * (din + dout) * scale
    if p_hits.size and np.abs(p_hits).max() > cut:
        return False
    if np.abs(ell).max() <= cut:
        return True
    if kernel.deltas.shape[0] == 0:
        return False
    # residual of ell against the span of the delta rows
    sol, *_ = np.linalg.lstsq(kernel.deltas.T, ell, rcond=None)
    resid = ell - kernel.deltas.T @ sol
    return bool(np.abs(resid).max() <= cut)


def unitarity_check(kernel: GaussianDeltaKernel, basis_from: ClassifiedBasis,
                    basis_to: ClassifiedBasis, tol: float = DEFAULT_TOL) -> bool:
    """Resolution-of-identity check for a delta-free move propagator.

    With Faddeev-Popov fixings on the free rows, composing the kernel with
    its reverse collapses to deltas on all configuration variables iff the
    cross block is the invertible c_AB on observable rows, vanishes on the
    free rows, and the squared measure matches
    (2 pi hbar)^(-N_A) |det T_from^-1 det c_AB det T_to^-1|.
    """
    if kernel.deltas.shape[0]:
        raise InputError("unitarity check applies to delta-free propagators")
    a_rows = basis_from.pre_observable_rows
    b_rows = basis_to.post_observable_rows
    if a_rows.size != b_rows.size:
        return False
    n_a = int(a_rows.size)
    c_ab = basis_from.T[a_rows] @ kernel.C @ basis_to.T[b_rows].T
    if n_a:
        sv = np.linalg.svd(c_ab, compute_uv=False)
        if sv[0] == 0.0 or sv[-1] <= tol * sv[0] * n_a:
            return False
    scale = max(np.abs(kernel.C).max(), 1.0)
    left = basis_from.T[basis_from.left_rows] @ kernel.C
    right = kernel.C @ basis_to.T[basis_to.right_rows].T
    if left.size and np.abs(left).max() > tol * kernel.dim_in * scale:
        return False
    if right.size and np.abs(right).max() > tol * kernel.dim_in * scale:
        return False
    sign, logdet_cab = np.linalg.slogdet(c_ab) if n_a else (1.0, 0.0)
    target = 0.5 * (
        -n_a * np.log(TWO_PI * kernel.hbar)
        + logdet_cab
        - np.log(basis_from.abs_det)
        - np.log(basis_to.abs_det)
    )
    return bool(abs(kernel.log_modulus - target) <= 1e3 * tol * max(abs(target), 1.0))


def hilbert_dims(constraints, dim: int, tol: float = DEFAULT_TOL) -> int:
    """Observable dimensions at a step: dim minus independent constraints."""
    cons = list(constraints)
    if not cons:
        return dim
    rows = []
    for c in cons:
        other = c.x_coeffs_other if c.x_coeffs_other is not None else np.zeros(0)
        rows.append(np.concatenate([c.p_coeffs, c.x_coeffs, other])
                    if other.size else np.concatenate([c.p_coeffs, c.x_coeffs]))
    width = max(r.size for r in rows)
    stack = np.zeros((len(rows), width))
    for k, r in enumerate(rows):
        stack[k, : r.size] = r
    n_independent = numeric_rank(stack, tol)
    if n_independent > dim:
        raise InputError("more independent constraints than dimensions")
    return dim - n_independent


def normalized_measure(kernel: GaussianDeltaKernel, basis_from: ClassifiedBasis,
                       basis_to: ClassifiedBasis) -> Amplitude:
    """The fixed-measure amplitude the composed kernel would carry if its
    measure were re-derived from its own classification (reported next to
    the raw composed amplitude; neither is canonical)."""
    a_rows = basis_from.pre_observable_rows
    b_rows = basis_to.post_observable_rows
    n_a = int(a_rows.size)
    c_ab = basis_from.T[a_rows] @ kernel.C @ basis_to.T[b_rows].T
    sign, logdet = np.linalg.slogdet(c_ab) if n_a else (1.0, 0.0)
    if n_a and sign == 0:
        raise DegeneracyError("observable block of the composed kernel is singular")
    log_mod = 0.5 * (
        -n_a * np.log(TWO_PI * kernel.hbar)
        + logdet
        - np.log(basis_from.abs_det)
        - np.log(basis_to.abs_det)
    )
    return Amplitude(log_modulus=log_mod, i_exponent=n_a, phase=0.0)
