"""Monte Carlo verification of the exact moment formulas.

Classical side: integrals of symmetric step kernels are sampled exactly in
law.  Writing xi_i = sqrt(m) * (B(i/m) - B((i-1)/m)), every ordered nonzero
cell with index multiplicities (k_1, ...) contributes
a_I * m^(-p/2) * prod_i He_{k_i}(xi_i) with probabilists' Hermite
polynomials; off-diagonal kernels degenerate to plain products of
increments since He_1(x) = x.

Free side: there is no exact sampler, so increments of free Brownian motion
are approximated by independent N x N GUE matrices whose normalized trace
variance is exactly 1/m at finite N, and moments are read off normalized
traces of powers.  The bias vanishes as N grows.

Reproducibility contract: all randomness flows through Philox generators
keyed by SeedSequence(entropy=seed, spawn_key=(index,)).  GUE draws derive
one generator per draw; the classical sampler derives one per 65536-sample
block (per-sample derivation would dominate the runtime).  Identical
SampleConfig values therefore give bit-identical estimates, independent of
the worker count; per-block partials are reduced in index order and every
in-block reduction uses numpy's pairwise summation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import hermite_e

from .config import thread_count
from .errors import InvalidInputError, PreconditionError
from .kernels import (
    GridKernel,
    Scalar,
    as_float,
    is_mirror_symmetric,
    is_off_diagonal,
    is_symmetric,
)
from .moments import MomentReport, classical_moment, free_moment

RNG_ALGORITHM = "philox4x64 keyed by SeedSequence(entropy=seed, spawn_key=(index,))"

CLASSICAL_BLOCK = 1 << 16


@dataclass(frozen=True)
class SampleConfig:
    """Deterministic sampling protocol: same config, same estimates."""

    seed: int
    n_samples: int
    matrix_dim: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise InvalidInputError("seed must be an integer")
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidInputError("seed must fit in an unsigned 64-bit integer")
        if self.n_samples < 1:
            raise InvalidInputError("n_samples must be >= 1")
        if self.matrix_dim is not None and self.matrix_dim < 2:
            raise InvalidInputError("matrix_dim must be >= 2")


def derive_rng(seed: int, index: int) -> np.random.Generator:
    """The documented per-index stream derivation."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(seq))


# --- classical sampling -----------------------------------------------------


def _cell_plan(f: GridKernel) -> list[tuple[np.ndarray, np.ndarray, float]]:
    """Group ordered nonzero cells by variable multiset; each entry is
    (variables, multiplicities, summed coefficient * m^(-p/2))."""
    f = as_float(f)
    p, m = f.order, f.resolution
    plan: dict[tuple, float] = {}
    flat = f.coeffs
    for i in range(flat.size):
        a = flat[i]
        if a == 0.0:
            continue
        counts: dict[int, int] = {}
        rem = i
        for j in range(p):
            d = (rem // m ** (p - 1 - j)) % m
            counts[d] = counts.get(d, 0) + 1
        key = tuple(sorted(counts.items()))
        plan[key] = plan.get(key, 0.0) + a
    norm = m ** (-p / 2.0)
    out = []
    for key, coeff in plan.items():
        variables = np.array([v for v, _ in key], dtype=np.int64)
        mults = np.array([c for _, c in key], dtype=np.int64)
        out.append((variables, mults, coeff * norm))
    return out


def _evaluate_plan(plan, xi: np.ndarray) -> np.ndarray:
    """Evaluate the Hermite cell plan on a (batch, m) matrix of normals."""
    total = np.zeros(xi.shape[0])
    for variables, mults, coeff in plan:
        term = np.full(xi.shape[0], coeff)
        for var, cnt in zip(variables, mults):
            basis = np.zeros(cnt + 1)
            basis[cnt] = 1.0
            term = term * hermite_e.hermeval(xi[:, var], basis)
        total += term
    return total


def sample_classical(f: GridKernel, rng: np.random.Generator) -> float:
    """One exact-in-law draw of the integral of a symmetric step kernel."""
    if not is_symmetric(f):
        raise PreconditionError("classical sampling requires a symmetric kernel")
    plan = _cell_plan(f)
    xi = rng.standard_normal((1, f.resolution))
    return float(_evaluate_plan(plan, xi)[0])


def mc_classical_moment(f: GridKernel, k: int, cfg: SampleConfig,
                        target: Optional[Scalar] = None) -> MomentReport:
    """Empirical k-th moment with stderr = std(F^k samples) / sqrt(n)."""
    if k < 1:
        raise InvalidInputError("moment order k must be >= 1")
    if not is_symmetric(f):
        raise PreconditionError("classical sampling requires a symmetric kernel")
    plan = _cell_plan(f)
    m = f.resolution
    n = cfg.n_samples
    blocks = [
        (b, min(CLASSICAL_BLOCK, n - b * CLASSICAL_BLOCK))
        for b in range((n + CLASSICAL_BLOCK - 1) // CLASSICAL_BLOCK)
    ]

    def run_block(args):
        b, rows = args
        rng = derive_rng(cfg.seed, b)
        xi = rng.standard_normal((rows, m))
        powers = _evaluate_plan(plan, xi) ** k
        return np.sum(powers), np.sum(powers * powers)

    workers = thread_count()
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run_block, blocks))
    else:
        partials = [run_block(b) for b in blocks]
    s1 = float(np.sum([p[0] for p in partials]))
    s2 = float(np.sum([p[1] for p in partials]))
    est = s1 / n
    var = max(0.0, (s2 - n * est * est) / (n - 1)) if n > 1 else 0.0
    stderr = math.sqrt(var / n)
    if target is None and k >= 2:
        target = classical_moment(as_float(f), k)
    return MomentReport(k=k, value=est, path="simulation", stderr=stderr, target=target)


# --- free sampling via GUE approximation ------------------------------------


def gue_increments(m: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """m independent dim x dim GUE matrices scaled so that the expected
    normalized trace of G^2 is exactly 1/m at finite dim."""
    scale = 1.0 / math.sqrt(dim * m)
    a = rng.standard_normal((m, dim, dim)) + 1j * rng.standard_normal((m, dim, dim))
    a *= scale
    return (a + a.conj().transpose(0, 2, 1)) / 2.0


def _matrix_model(f: GridKernel, incr: np.ndarray) -> np.ndarray:
    """F_N = sum over nonzero cells of a_I G_{i_1} ... G_{i_p}."""
    p, m = f.order, f.resolution
    dim = incr.shape[1]
    flat = f.coeffs
    if p == 0:
        return float(flat[0]) * np.eye(dim, dtype=complex)
    if p == 1:
        return np.tensordot(flat.astype(complex), incr, axes=([0], [0]))
    if p == 2:
        mat = flat.reshape(m, m).astype(complex)
        partial = np.tensordot(mat, incr, axes=([1], [0]))
        return np.einsum("iab,ibc->ac", incr, partial)
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(flat.size):
        a = flat[i]
        if a == 0.0:
            continue
        rem = i
        prod = None
        for j in range(p):
            d = (rem // m ** (p - 1 - j)) % m
            prod = incr[d] if prod is None else prod @ incr[d]
        out += a * prod
    return out


def sample_free_gue(f: GridKernel, k: int, dim: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Normalized trace moments (1/N) tr(F_N^j), j = 1..k, of one draw of the
    matrix model.  Requires a mirror-symmetric, off-diagonal kernel so that
    F_N is Hermitian and no diagonal cell mass is silently approximated;
    refine diagonal-supported kernels first."""
    if k < 1:
        raise InvalidInputError("moment order k must be >= 1")
    if dim < 2:
        raise InvalidInputError("matrix dimension must be >= 2")
    if not is_mirror_symmetric(f):
        raise PreconditionError("GUE sampling requires a mirror-symmetric kernel")
    if not is_off_diagonal(f):
        raise PreconditionError(
            "GUE sampling requires an off-diagonal kernel; refine first"
        )
    ff = as_float(f)
    incr = gue_increments(ff.resolution, dim, rng)
    fn = _matrix_model(ff, incr)
    herm_residue = np.max(np.abs(fn - fn.conj().T))
    fn_scale = max(1.0, float(np.max(np.abs(fn))))
    if herm_residue > 1e-10 * fn_scale:
        raise AssertionError(
            f"matrix model lost Hermitianity: residue {herm_residue}"
        )
    out = np.empty(k)
    power = np.eye(dim, dtype=complex)
    for j in range(1, k + 1):
        power = power @ fn
        tr = complex(np.trace(power)) / dim
        if abs(tr.imag) > 1e-10 * max(1.0, abs(tr.real)):
            raise AssertionError(f"trace moment {j} has imaginary residue {tr.imag}")
        out[j - 1] = tr.real
    return out


def mc_free_moment(f: GridKernel, k: int, cfg: SampleConfig,
                   target: Optional[Scalar] = None) -> MomentReport:
    """Average of sample_free_gue over n_samples independent draws."""
    if cfg.matrix_dim is None:
        raise InvalidInputError("free simulation requires matrix_dim in the config")
    dim = cfg.matrix_dim

    def run_draw(i: int) -> float:
        return float(sample_free_gue(f, k, dim, derive_rng(cfg.seed, i))[k - 1])

    indices = range(cfg.n_samples)
    workers = thread_count()
    if workers > 1 and cfg.n_samples > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            draws = np.fromiter(pool.map(run_draw, indices), dtype=float,
                                count=cfg.n_samples)
    else:
        draws = np.fromiter((run_draw(i) for i in indices), dtype=float,
                            count=cfg.n_samples)
    est = float(np.mean(draws))
    stderr = (
        float(np.std(draws, ddof=1) / math.sqrt(cfg.n_samples))
        if cfg.n_samples > 1
        else 0.0
    )
    if target is None and k >= 2:
        target = free_moment(as_float(f), k)
    return MomentReport(k=k, value=est, path="simulation", stderr=stderr, target=target)
