"""Rank tuples, Catalan counts, Dyck paths, and limit weights.

Moments expand over closed rank sequences B_k; the all-or-nothing part C_k
carries the limit law.  Counting C_k gives the semicircle moments (Catalan
numbers) for every order p, and weighting each tuple by a product of small
binomials gives the Gaussian moments (double factorials).
"""

from chaoskit import (
    catalan,
    classical_coeff,
    count_C,
    dyck_check,
    dyck_path_count,
    enumerate_tuples,
    gaussian_moment,
    limit_value,
    limit_weight,
    semicircle_moment,
)

print("C_k counts are p-independent and Catalan:")
for k in (4, 6, 8, 10):
    counts = [count_C(p, k) for p in range(1, 6)]
    print(f"  k={k:2d}: counts over p=1..5 -> {counts},  Cat_{k//2} = {catalan(k//2)}")

print("\nfull table for p=2, k=4 (class B):")
for t in enumerate_tuples(2, 4, "B"):
    in_c = all(r in (0, 2) for r in t.r)
    extra = ""
    if in_c:
        tc = enumerate_tuples(2, 4, "C")
        extra = f"  limit_weight={limit_weight([x for x in tc if x.r == t.r][0])}"
    print(f"  r={t.r}  coeff={classical_coeff(t):3d}  in C_4: {in_c}{extra}")

print("\nweighted C_k sums give the Gaussian moments:")
for k in (4, 6, 8):
    ts = enumerate_tuples(3, k, "C")
    total = sum(limit_weight(t) for t in ts)
    print(f"  k={k}: sum of limit weights (p=3) = {total} = {gaussian_moment(k)} = ({k-1})!!")

print("\nevery class-C tuple is a Dyck path after r -> 1 - 2r/p:")
ts = enumerate_tuples(2, 6, "C")
print("  p=2, k=6 tuples:", [t.r for t in ts])
print("  all pass the lattice-path check:", all(dyck_check(t) for t in ts))
print("  path count:", dyck_path_count(6), "= Cat_3 =", semicircle_moment(6))

print("\nlimit values (what each classical C_k summand converges to):")
for t in enumerate_tuples(2, 4, "C"):
    print(f"  r={t.r}: limit_value = {limit_value(t)}")
