"""Shared test utilities: controlled random instances and independent oracles.

The quadrature oracle evaluates damped oscillatory Gaussian integrals by
rotating to the eigenbasis of the quadratic form (an exact change of
variables that leaves the isotropic regulator invariant), doing plain
Riemann sums factor by factor, and extrapolating the regulator away on a
geometric ladder.  It never uses the stationary-phase closed form that the
library implements.
"""

from __future__ import annotations

import numpy as np

from canonkit.actions import QuadraticMove


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def random_symmetric(rng, n, scale=1.0):
    m = rng.normal(size=(n, n))
    return scale * 0.5 * (m + m.T)


def designed_instance(rng, sizes, scale=1.0, rotate=True):
    """Two adjacent moves whose middle step has prescribed type counts.

    ``sizes`` maps type labels (I, H, l, lambda, r, rho, z, gamma) to slot
    counts summing to Q.  Slots are assigned in that order; c1's right null
    space is exactly the I+H+r+rho slots, c2's left null space the
    I+H+l+lambda slots, and h vanishes exactly on I+l+r+z.  A random
    rotation then hides the slot structure.
    """
    order = ("I", "H", "l", "lambda", "r", "rho", "z", "gamma")
    counts = {t: sizes.get(t, 0) for t in order}
    q = sum(counts.values())
    slots = {}
    k = 0
    for t in order:
        slots[t] = list(range(k, k + counts[t]))
        k += counts[t]

    def selector(types):
        cols = [i for t in types for i in slots[t]]
        e = np.zeros((q, len(cols)))
        for j, i in enumerate(cols):
            e[i, j] = 1.0
        return e

    # c1: right null = I,H,r,rho,  i.e. columns outside W vanish
    w1 = selector(("l", "lambda", "z", "gamma"))
    c1 = rng.normal(size=(q, w1.shape[1])) @ w1.T * scale
    # c2: left null = I,H,l,lambda, i.e. rows outside W2 vanish
    w2 = selector(("r", "rho", "z", "gamma"))
    c2 = w2 @ rng.normal(size=(w2.shape[1], q)) * scale
    # h: null space = I,l,r,z
    wk = selector(("H", "lambda", "rho", "gamma"))
    core = random_symmetric(rng, wk.shape[1], scale) + scale * np.eye(wk.shape[1]) * 2.0
    h = wk @ core @ wk.T

    if rotate:
        o_prev, o_mid, o_next = (random_orthogonal(rng, q) for _ in range(3))
        c1 = o_prev @ c1 @ o_mid.T
        c2 = o_mid @ c2 @ o_next.T
        h = o_mid @ h @ o_mid.T

    b1 = random_symmetric(rng, q, scale)
    a2 = h - b1
    a1 = random_symmetric(rng, q, scale)
    b2 = random_symmetric(rng, q, scale)
    move1 = QuadraticMove(0, 1, a1, b1, c1)
    move2 = QuadraticMove(1, 2, a2, b2, c2)
    return move1, move2


def regular_move(rng, step_from, q, scale=1.0, c_min=0.5):
    """A move with an invertible cross block."""
    while True:
        c = rng.normal(size=(q, q)) * scale
        if np.abs(np.linalg.svd(c, compute_uv=False)).min() > c_min * scale / 2:
            break
    return QuadraticMove(
        step_from, step_from + 1,
        random_symmetric(rng, q, scale), random_symmetric(rng, q, scale), c,
    )


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------

EPS_LADDER = tuple(0.16 * 0.5**k for k in range(9))  # 0.16 .. 0.000625


def _damped_1d(lam, j_lin, hbar, eps, tail=1e-16):
    """Riemann sum of exp(i (lam y^2/2 + j y)/hbar - eps y^2) over the line."""
    width = np.sqrt(-np.log(tail) / eps)
    freq = (abs(lam) * width + abs(j_lin)) / hbar
    dx = min(np.pi / (2.0 * freq + 1.0), 0.05)
    n = int(np.ceil(2.0 * width / dx)) | 1
    y = np.linspace(-width, width, n)
    f = np.exp(1j * (0.5 * lam * y**2 + j_lin * y) / hbar - eps * y**2)
    return np.trapezoid(f, y)


def damped_gaussian_integral(h, j, hbar, eps):
    """integral over R^n of exp(i(yᵀh y/2 + jᵀy)/hbar) exp(-eps |y|^2).

    Diagonalizes h (the isotropic regulator is rotation invariant) and
    multiplies one-dimensional Riemann sums.
    """
    h = np.atleast_2d(np.asarray(h, dtype=float))
    j = np.asarray(j, dtype=float)
    n = h.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    lam, vecs = np.linalg.eigh(h)
    j_rot = vecs.T @ j
    val = 1.0 + 0.0j
    for k in range(n):
        val *= _damped_1d(lam[k], j_rot[k], hbar, eps)
    return val


def richardson_limit(values, eps_ladder):
    """Neville polynomial extrapolation of values(eps) to eps = 0."""
    vals = list(values)
    eps = list(eps_ladder)
    n = len(vals)
    table = [vals[:]]
    for order in range(1, n):
        prev = table[-1]
        row = []
        for i in range(n - order):
            e0, e1 = eps[i], eps[i + order]
            row.append((e0 * prev[i + 1] - e1 * prev[i]) / (e0 - e1))
        table.append(row)
    return table[-1][0]


def oracle_gaussian_integral(h, j, hbar=1.0, eps_ladder=None):
    """Regulator-free oscillatory Gaussian integral by extrapolation.

    The regulator enters the quadratic form as 2 i eps hbar, so the ladder
    is scaled by 1/hbar to keep the relative perturbation fixed.
    """
    if eps_ladder is None:
        eps_ladder = tuple(e / hbar for e in EPS_LADDER)
    return richardson_limit(
        [damped_gaussian_integral(h, j, hbar, e) for e in eps_ladder], eps_ladder
    )


def oracle_compose_value(k1, k2, x_in, x_out, eps_ladder=EPS_LADDER):
    """Quadrature value of integral over the glued step of k1*k2 at a point."""
    h = k1.B + k2.A
    j = k1.C.T @ np.asarray(x_in, float) + k2.C @ np.asarray(x_out, float)
    outer = k1.smooth_value(x_in, np.zeros(k1.dim_out)) * k2.smooth_value(
        np.zeros(k2.dim_in), x_out
    )
    return outer * oracle_gaussian_integral(h, j, k1.hbar, eps_ladder)


def oracle_compose_value_damped(k1, k2, x_in, x_out, eps):
    """Same with the regulator kept finite (for delta-carrying results)."""
    h = k1.B + k2.A
    j = k1.C.T @ np.asarray(x_in, float) + k2.C @ np.asarray(x_out, float)
    outer = k1.smooth_value(x_in, np.zeros(k1.dim_out)) * k2.smooth_value(
        np.zeros(k2.dim_in), x_out
    )
    return outer * damped_gaussian_integral(h, j, k1.hbar, eps)


def oracle_compose_value_mixed(k1, k2, x_in, x_out, eps, null_cut=1e-8):
    """Oracle for glued-step Hessians with exact zero directions.

    Regular eigendirections are extrapolated to zero regulator; directions
    with |lambda| below the cut keep the finite regulator, producing the
    same Gaussian delta sequence the kernel's regulated value uses.
    """
    h = np.atleast_2d(np.asarray(k1.B + k2.A, dtype=float))
    j = k1.C.T @ np.asarray(x_in, float) + k2.C @ np.asarray(x_out, float)
    hbar = k1.hbar
    outer = k1.smooth_value(x_in, np.zeros(k1.dim_out)) * k2.smooth_value(
        np.zeros(k2.dim_in), x_out
    )
    lam, vecs = np.linalg.eigh(h)
    j_rot = vecs.T @ j
    scale = max(np.abs(lam).max(), 1.0)
    val = outer
    for k in range(lam.size):
        if abs(lam[k]) <= null_cut * scale:
            val *= _damped_1d(0.0, j_rot[k], hbar, eps)
        else:
            ladder = tuple(e / hbar for e in EPS_LADDER)
            val *= richardson_limit(
                [_damped_1d(lam[k], j_rot[k], hbar, e) for e in ladder], ladder
            )
    return val


def consistent_chain_data(m1, m2, rng):
    """(x0, x1, x2) satisfying the middle-step equations of motion.

    The left-null solvability conditions couple x0 and x1 linearly; the
    pair is sampled from that kernel, then x2 solves the remaining system.
    """
    from canonkit.linalg import left_null_basis, right_null_basis

    q = m1.dim
    h = m1.b + m2.a
    lnull = left_null_basis(m2.c)
    rows = [np.concatenate([m1.c @ lnull.basis[:, k], h @ lnull.basis[:, k]])
            for k in range(lnull.dim)]
    if rows:
        kernel = right_null_basis(np.vstack(rows))
        both = kernel.basis @ rng.normal(size=kernel.dim)
    else:
        both = rng.normal(size=2 * q)
    x0, x1 = both[:q], both[q:]
    rhs = -(m1.c.T @ x0) - h @ x1
    x2, *_ = np.linalg.lstsq(m2.c, rhs, rcond=None)
    resid = np.abs(m2.c @ x2 - rhs).max()
    assert resid < 1e-8 * max(1.0, np.abs(rhs).max()), "inconsistent chain sample"
    return x0, x1, x2
