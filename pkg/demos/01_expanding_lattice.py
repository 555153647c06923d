"""Walk through the expanding square-lattice example, move by move.

A massless scalar field lives on a square lattice that grows from nothing
(step 0) to a unit square (step 1, four vertices) to a 3x3 square
(step 2, twelve boundary vertices).  Each global move carries a quadratic
action; padding everything to a common 12-slot configuration space makes
the whole analysis linear algebra.
"""

import numpy as np

from canonkit import classify_sequence, expanding_square_sequence

np.set_printoptions(linewidth=120, precision=3, suppress=True)

fixture = expanding_square_sequence(n_steps=2, mass=0.0)
seq = fixture.sequence
print(f"extended dimension Q = {seq.dim}, moves: "
      + ", ".join(f"{m.step_from}->{m.step_to}" for m in seq.moves))

m1, m2 = seq.moves
print("\nmove 0->1 is a pure boundary term (a = c = 0); its b block:")
print(m1.b[:4, :4])

print("\nmove 1->2 couples the old square to the new ring through c:")
print(m2.c[:4])
print("rows 1-4 are the old vertices; each couples with weight -2 to the")
print("two new vertices flanking 'its' corner, and not at all to the new")
print("corner fields (columns 1-4): those are unpredictable.")

# classification of every step, using the reference bases of the example
bases = classify_sequence(seq, overrides={1: fixture.basis_t1, 2: fixture.basis_t2})
for n in seq.steps:
    counts = {t: v for t, v in bases[n].counts.items() if v}
    print(f"\nstep {n} direction types: {counts}")

print("""
Reading the step-1 answer: the eight padding directions are two-sided
null vectors of everything (type I, pure gauge), while the four real
field directions are right null vectors of the incoming move only and
carry Hessian action (type rho): they are injected fresh by the move
0->1 and then propagate to step 2.
""")
