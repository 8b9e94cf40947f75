"""Shared helpers: independent brute-force oracles and random kernels.

The brute-force contractions below are deliberately naive (triple loops over
index tuples straight from the defining integrals) so they share no code
with the reshape/matmul implementations they check.
"""

import math
from fractions import Fraction
from itertools import permutations, product

import numpy as np
import pytest

from chaoskit.kernels import GridKernel, adjoint, new_kernel, symmetrize


def brute_contract_classical(f: GridKernel, g: GridKernel, r: int) -> GridKernel:
    p, q, m = f.order, g.order, f.resolution
    fa, ga = f.array, g.array
    out = np.empty(m ** (p + q - 2 * r), dtype=object)
    pos = 0
    for t1 in product(range(m), repeat=p - r):
        for t2 in product(range(m), repeat=q - r):
            acc = Fraction(0)
            for s in product(range(m), repeat=r):
                acc += fa[t1 + s] * ga[t2 + s]
            out[pos] = acc / m**r
            pos += 1
    return GridKernel(p + q - 2 * r, m, "exact", out, f.scale_sq * g.scale_sq)


def brute_contract_free(f: GridKernel, g: GridKernel, r: int) -> GridKernel:
    p, q, m = f.order, g.order, f.resolution
    fa, ga = f.array, g.array
    out = np.empty(m ** (p + q - 2 * r), dtype=object)
    pos = 0
    for t1 in product(range(m), repeat=p - r):
        for t2 in product(range(m), repeat=q - r):
            acc = Fraction(0)
            for s in product(range(m), repeat=r):
                acc += fa[t1 + s] * ga[tuple(reversed(s)) + t2]
            out[pos] = acc / m**r
            pos += 1
    return GridKernel(p + q - 2 * r, m, "exact", out, f.scale_sq * g.scale_sq)


def brute_symmetrize(f: GridKernel) -> GridKernel:
    p, m = f.order, f.resolution
    fa = f.array
    out = np.empty(m**p, dtype=object)
    pos = 0
    for idx in product(range(m), repeat=p):
        acc = Fraction(0)
        for perm in permutations(range(p)):
            acc += fa[tuple(idx[j] for j in perm)]
        out[pos] = acc / math.factorial(p)
        pos += 1
    return GridKernel(p, m, "exact", out, f.scale_sq)


def brute_chain(f: GridKernel, ranks, model: str) -> GridKernel:
    """Literal dense left-to-right iterated contraction."""
    from chaoskit.contractions import contract_classical_sym, contract_free

    acc = symmetrize(f) if model == "classical" else f
    step = contract_classical_sym if model == "classical" else contract_free
    for r in ranks:
        acc = step(acc, f if model == "free" else symmetrize(f), r)
    return acc


def rand_fraction(rng, lo: int = -4, hi: int = 4, den: int = 4) -> Fraction:
    return Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, den + 1)))


def random_kernel(rng, p: int, m: int, mode: str = "exact") -> GridKernel:
    coeffs = [rand_fraction(rng) for _ in range(m**p)]
    if mode == "float":
        coeffs = [float(c) for c in coeffs]
    return new_kernel(p, m, coeffs, mode=mode)


def random_symmetric_kernel(rng, p: int, m: int, mode: str = "exact") -> GridKernel:
    return symmetrize(random_kernel(rng, p, m, mode))


def random_mirror_kernel(rng, p: int, m: int, mode: str = "exact") -> GridKernel:
    f = random_kernel(rng, p, m, mode)
    return GridKernel(p, m, f.mode, f.coeffs + adjoint(f).coeffs, f.scale_sq)


def nonzero(rng, maker, *args, **kwargs) -> GridKernel:
    while True:
        f = maker(rng, *args, **kwargs)
        if not f.is_zero():
            return f


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


@pytest.fixture
def pair_kernel():
    return new_kernel(2, 2, [0, 1, 1, 0])
