"""Grid step kernels and their contraction calculus.

A kernel of order p is a step function on [0,1]^p, constant on an m x ... x m
grid.  This walk-through builds the small fixtures used throughout the
package and shows the two contraction operations on them.
"""

from fractions import Fraction

from chaoskit import (
    adjoint,
    constant_kernel,
    contract_classical,
    contract_classical_sym,
    contract_free,
    is_mirror_symmetric,
    is_off_diagonal,
    is_symmetric,
    l2_inner,
    l2_norm_sq,
    new_kernel,
    normalize_variance,
    refine,
    symmetrize,
)

# The "pair kernel": order 2 at resolution 2, mass on the two off-diagonal
# cells.  Its classical integral is the product of two independent standard
# normals.
pair = new_kernel(2, 2, [0, 1, 1, 0])
print("pair kernel:", pair)
print("  ||f||^2        =", l2_norm_sq(pair))
print("  symmetric      =", is_symmetric(pair))
print("  mirror         =", is_mirror_symmetric(pair))
print("  off-diagonal   =", is_off_diagonal(pair))

# Symmetrization averages over argument permutations; an asymmetric unit
# cell spreads its mass over the orbit.
bump = new_kernel(2, 2, [0, 1, 0, 0])
print("\nsymmetrize([0,1,0,0]) ->", list(symmetrize(bump).coeffs))
print("adjoint([0,1,0,0])     ->", list(adjoint(bump).coeffs))

# Classical contraction: pair the last slots of both kernels and integrate.
h = contract_classical(pair, pair, 1)
print("\npair ox_1 pair =", list(h.coeffs), "(order", h.order, ")")
print("same after symmetrization:", contract_classical_sym(pair, pair, 1) == h)

# Rank 0 is the tensor product, and there the norm bound is an equality.
t = contract_classical(pair, pair, 0)
print("||f ox f||^2 =", l2_norm_sq(t), "= ||f||^4 =", l2_norm_sq(pair) ** 2)

# The free contraction pairs against the *first* slots of the right factor,
# reversed.  On symmetric kernels both contractions coincide.
print("\nfree == classical on the symmetric pair kernel:",
      all(contract_free(pair, pair, r) == contract_classical(pair, pair, r)
          for r in (0, 1, 2)))

# Normalization for the free model scales so <f, f*> = 1.  In exact mode the
# (irrational) scale sqrt(2) is carried as its square.
pv = normalize_variance(pair, "free")
print("\nfree-normalized pair kernel: scale_sq =", pv.scale_sq)
print("  <f, f*> =", l2_inner(pv, adjoint(pv)))
g = contract_free(pv, pv, 1)
print("  f fr_1 f has scale_sq", g.scale_sq, "and raw coeffs", list(g.coeffs))
print("  i.e. the represented kernel is the identity matrix [1,0,0,1]")

# Refinement subdivides the grid without changing the function.
ones2 = constant_kernel(2, 1)
fine = refine(ones2, 8)
print("\nrefine(ones, 8): m =", fine.resolution,
      " norm preserved:", l2_norm_sq(fine) == l2_norm_sq(ones2))
from chaoskit import off_diagonal_part

off = off_diagonal_part(fine)
print("off-diagonal mass at m=8:", l2_norm_sq(off), "= 1 - 1/8 =",
      1 - Fraction(1, 8))
