"""Chaos expansions, the two product formulas, and exact moments.

The square of a first-order integral decomposes as I_2 + constant in both
calculi; iterating the product formula and taking expectations yields every
moment exactly.  Three independent code paths must (and do) agree.
"""

from chaoskit import (
    classical_moment,
    constant_kernel,
    expectation,
    free_moment,
    from_kernel,
    moment_via_expansion,
    multiply,
    new_kernel,
    normalize_variance,
    wick_oracle_moment,
)

ones1 = constant_kernel(1, 1)

print("B(1)^2 and S(1)^2 via the product formulas:")
for model in ("classical", "free"):
    F = from_kernel(ones1, model)
    sq = multiply(F, F)
    print(f"  {model:9s}: orders {sq.orders()}, expectation {expectation(sq)}")

print("\nGaussian vs semicircle moments of the unit first-order integral:")
for k in range(2, 9):
    print(f"  k={k}:  E B(1)^{k} = {str(classical_moment(ones1, k)):>3}   "
          f"E S(1)^{k} = {free_moment(ones1, k)}")

# The constant order-2 kernel: classically (xi^2 - 1), freely (s^2 - 1).
ones2 = constant_kernel(2, 1)
print("\nE[(xi^2-1)^4]:")
print("  closed-form B_k sum :", classical_moment(ones2, 4))
print("  product-formula fold:", moment_via_expansion(ones2, 4, "classical"))
print("  Wick oracle         :", wick_oracle_moment(ones2, 4))

print("free fourth moment of the same kernel:", free_moment(ones2, 4))

# The pair kernel: F = xi_1 * xi_2 with E F^4 = 9.
pair = new_kernel(2, 2, [0, 1, 1, 0])
print("\npair kernel, all three classical paths at k=4:",
      classical_moment(pair, 4),
      moment_via_expansion(pair, 4, "classical"),
      wick_oracle_moment(pair, 4))

pv = normalize_variance(pair, "free")
print("free moments of the normalized pair kernel:",
      [free_moment(pv, k) for k in range(2, 7)])
print("(the fourth is 5/2: strictly above the semicircle value 2,")
print(" by exactly the squared norm of the rank-1 self-contraction)")
