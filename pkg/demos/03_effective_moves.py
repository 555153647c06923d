"""Composing moves: integrating out a step and watching constraints grow.

Composition of the two lattice moves eliminates step 1 and produces an
effective move 0->2 that is a pure boundary term: the lattice that grew
out of nothing carries no initial data at all.  The constraint count at
the outer steps can only grow under composition; a small scalar chain
with a Hessian null direction shows the boundary-data constraint and its
Lagrange multiplier appearing.
"""

import numpy as np

from canonkit import (
    QuadraticMove,
    chain_compose,
    classify_sequence,
    classify_step,
    compose,
    degeneracy_dims,
    effective_constraints,
    expanding_square_sequence,
)
from canonkit.effective import effective_outer_bases

np.set_printoptions(linewidth=120, precision=3, suppress=True)

fixture = expanding_square_sequence(n_steps=2, mass=0.0)
seq = fixture.sequence
m1, m2 = seq.moves
bases = classify_sequence(seq, overrides={1: fixture.basis_t1, 2: fixture.basis_t2})

eff = compose(m1, m2, bases[1])
print("effective move 0->2:")
print(f"  |a~|max = {np.abs(eff.a).max():.1e}, |c~|max = {np.abs(eff.c).max():.1e}")
print("  b~ is a boundary term on step 2 only; upper 4x4 block:")
print(eff.b[:4, :4])

b0, b2 = effective_outer_bases(eff)
cons = effective_constraints(eff, b0, b2)
n_pre = sum(c.kind == "pre" for c in cons)
n_post = sum(c.kind == "post" for c in cons)
print(f"\neffective constraints: {n_pre} pre at 0, {n_post} post at 2")
print("versus 8 pre/post for the move 1->2 alone: composition can only")
print("add constraints.  Null-direction counts:", degeneracy_dims(m1, m2, eff))

# a one-dimensional chain with h = 0 at the middle step: the middle
# variable becomes the Lagrange multiplier of a boundary-data constraint
print("\nscalar chain with a boundary-data direction:")
s1 = QuadraticMove(0, 1, [[0.3]], [[0.0]], [[1.0]])
s2 = QuadraticMove(1, 2, [[0.0]], [[-0.2]], [[1.0]])
mid = classify_step(s1.c, s2.c, s1.b + s2.a, step=1)
eff_z = compose(s1, s2, mid)
rec = eff_z.multipliers[0]
print(f"  middle direction type: {rec.source_type}")
print(f"  induced constraint: {rec.constraint.kind} with coefficients "
      f"{rec.constraint.x_coeffs} on x0 and {rec.constraint.x_coeffs_other} on x2")
print("  i.e. x0 + x2 = 0 must hold for any solution; x1 stays undetermined.")

# chained composition over longer ranges works the same way
fixture3 = expanding_square_sequence(n_steps=3, mass=0.0)
eff_03 = chain_compose(fixture3.sequence, 0, 3)
print(f"\nchain 0->3 of the three-move lattice: |c~| = {np.abs(eff_03.c).max():.1e} "
      f"(still totally constrained), provenance {eff_03.provenance}")
