"""Closed-form k-th moments, fourth-moment identities, and oracles.

The k-th moment of an order-p integral is a sum over the closed rank
sequences B_k of iterated contractions of k copies of the kernel, evaluated
left to right (classical sequences also carry integer weights).  Materializing
those chains naively is hopeless: a prefix of zero ranks yields a dense
order-jp intermediate, which for a resolution-64 kernel at k = 8 would need
64^8 entries.  Instead the evaluators below keep every intermediate in
factored form:

* free chains are literal tensor products of small blocks, and a rank-r step
  only ever touches the trailing blocks, so one dense contraction per
  prefix-tree edge suffices;
* classical chains are symmetrized, which spreads a rank-r step over all
  blocks; a symmetrized intermediate is kept as a weighted bag of
  tensor-product terms with symmetric blocks, and one step splits each term
  over the ways of drawing r slots from its blocks:

      sym(W) o~_r f = sum over (r_1..r_s), sum r_i = r of
          [prod_i C(o_i, r_i) / C(o, r)] * sym(untouched ox fuse(f; {(g_i, r_i)}))

  where fuse contracts r_i slots of each chosen block against distinct slots
  of the incoming kernel.  Blocks stay small (order <= 2p-2 in practice) and
  are deduplicated, so shared prefixes cost one fuse per distinct split.

Both evaluators are cross-checked against literal dense chains and against
the product-formula expansion path in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from . import combinatorics as comb
from .contractions import (
    contract_arrays_free,
    contract_classical,
    contract_classical_sym,
    contract_free,
    multi_contract,
    tensor_product_arrays,
)
from .errors import BudgetExceededError, InvalidInputError, PreconditionError
from .kernels import (
    GridKernel,
    Scalar,
    _sym_array,
    adjoint,
    family_kernel,
    is_mirror_symmetric,
    is_symmetric,
    l2_inner,
    l2_norm_sq,
    scaled_scalar,
    symmetrize,
)

PATHS = ("formula", "expansion", "oracle", "simulation")

WICK_VARIABLE_CAP = 12
WICK_DEGREE_CAP = 24

_NORMALIZATION_RTOL = 1e-9


@dataclass(frozen=True)
class MomentReport:
    """A computed moment with its provenance."""

    k: int
    value: Scalar
    path: str
    stderr: Optional[float] = None
    target: Optional[Scalar] = None

    def __post_init__(self):
        if self.path not in PATHS:
            raise InvalidInputError(f"unknown moment path {self.path!r}")
        if (self.stderr is not None) != (self.path == "simulation"):
            raise InvalidInputError("stderr is present iff path='simulation'")


@dataclass(frozen=True)
class ContractionProfile:
    """Squared L2 norms of the self-contractions at ranks 1..p-1."""

    raw_sq: tuple
    sym_sq: Optional[tuple] = None


# --- factored chain evaluators ---------------------------------------------


class _FactorStore:
    """Content-addressed store of small dense blocks."""

    def __init__(self, mode: str):
        self.mode = mode
        self.orders: list[int] = []
        self.arrays: list[np.ndarray] = []
        self._index: dict = {}

    def _key(self, order: int, arr: np.ndarray):
        if self.mode == "float":
            return (order, arr.tobytes())
        return (order, tuple(arr))

    def add(self, order: int, arr: np.ndarray) -> int:
        key = self._key(order, arr)
        hit = self._index.get(key)
        if hit is not None:
            return hit
        self.orders.append(order)
        self.arrays.append(arr)
        self._index[key] = len(self.orders) - 1
        return len(self.orders) - 1


class _FreeChain:
    """State: (tuple of block ids in tensor-product order, scalar prefactor)."""

    def __init__(self, f_arr: np.ndarray, p: int, m: int, mode: str):
        self.p = p
        self.m = m
        self.mode = mode
        self.store = _FactorStore(mode)
        self.base = self.store.add(p, f_arr)
        self.f_arr = f_arr
        self.one = 1.0 if mode == "float" else Fraction(1)
        self.memo: dict = {}

    def initial(self):
        return ((self.base,), self.one)

    def step(self, state, r: int):
        ids, sc = state
        if r == 0:
            return (ids + (self.base,), sc)
        rest = list(ids)
        popped: list[int] = []
        total = 0
        while total < r:
            i = rest.pop()
            popped.append(i)
            total += self.store.orders[i]
        popped.reverse()
        key = (tuple(popped), r)
        hit = self.memo.get(key)
        if hit is None:
            arrs = [self.store.arrays[i] for i in popped]
            orders = [self.store.orders[i] for i in popped]
            block = tensor_product_arrays(arrs, orders, self.m, self.mode)
            out = contract_arrays_free(
                block, total, self.f_arr, self.p, r, self.m, self.mode
            )
            out_order = total + self.p - 2 * r
            if out_order == 0:
                hit = ("s", out[0])
            else:
                hit = ("f", self.store.add(out_order, out))
            self.memo[key] = hit
        if hit[0] == "s":
            return (tuple(rest), sc * hit[1])
        return (tuple(rest) + (hit[1],), sc)

    def finalize(self, state) -> Scalar:
        ids, sc = state
        if ids:
            raise AssertionError("free chain finalized with open blocks")
        return sc


def _compositions(total: int, caps: list[int]):
    """All tuples c with 0 <= c_i <= caps[i] and sum(c) == total."""
    n = len(caps)

    def rec(i: int, left: int, prefix: tuple):
        if i == n:
            if left == 0:
                yield prefix
            return
        tail_cap = sum(caps[i + 1 :])
        lo = max(0, left - tail_cap)
        hi = min(caps[i], left)
        for c in range(lo, hi + 1):
            yield from rec(i + 1, left - c, prefix + (c,))

    yield from rec(0, total, ())


class _ClassicalChain:
    """State: dict mapping sorted block-id tuples to scalar weights; the
    represented value is sum_terms w * sym(tensor product of blocks)."""

    def __init__(self, f_sym_arr: np.ndarray, p: int, m: int, mode: str):
        self.p = p
        self.m = m
        self.mode = mode
        self.store = _FactorStore(mode)
        self.base = self.store.add(p, f_sym_arr)
        self.f_arr = f_sym_arr
        self.one = 1.0 if mode == "float" else Fraction(1)
        self.zero = 0.0 if mode == "float" else Fraction(0)
        self.fuse_memo: dict = {}

    def initial(self):
        return {(self.base,): self.one}

    def _fuse(self, parts_key: tuple):
        hit = self.fuse_memo.get(parts_key)
        if hit is not None:
            return hit
        parts = [
            (self.store.arrays[i], self.store.orders[i], ri) for i, ri in parts_key
        ]
        arr, order = multi_contract(self.f_arr, self.p, parts, self.m, self.mode)
        if order == 0:
            hit = ("s", arr[0])
        else:
            hit = ("f", self.store.add(order, _sym_array(arr, order, self.m, self.mode)))
        self.fuse_memo[parts_key] = hit
        return hit

    def step(self, terms: dict, r: int) -> dict:
        out: dict = {}
        for ids, w in terms.items():
            if r == 0:
                key = tuple(sorted(ids + (self.base,)))
                out[key] = out.get(key, self.zero) + w
                continue
            orders = [self.store.orders[i] for i in ids]
            o = sum(orders)
            denom = math.comb(o, r)
            for split in _compositions(r, orders):
                count = 1
                for oi, ci in zip(orders, split):
                    count *= math.comb(oi, ci)
                if self.mode == "float":
                    weight = w * (count / denom)
                else:
                    weight = w * Fraction(count, denom)
                parts_key = tuple(
                    sorted((ids[i], ci) for i, ci in enumerate(split) if ci > 0)
                )
                untouched = tuple(ids[i] for i, ci in enumerate(split) if ci == 0)
                kind, payload = self._fuse(parts_key)
                if kind == "s":
                    key = tuple(sorted(untouched))
                    out[key] = out.get(key, self.zero) + weight * payload
                else:
                    key = tuple(sorted(untouched + (payload,)))
                    out[key] = out.get(key, self.zero) + weight
        return out

    def finalize(self, terms: dict) -> Scalar:
        if set(terms) - {()}:
            raise AssertionError("classical chain finalized with open blocks")
        return terms.get((), self.zero)


def _chain_dfs(evaluator, p: int, k: int, classes: str) -> dict[tuple, Scalar]:
    """Depth-first walk of the rank tree, sharing intermediates along
    prefixes; returns {rank tuple: raw chain value} for the requested class."""
    results: dict[tuple, Scalar] = {}
    steps = k - 1

    def rec(state, prefix: tuple, order: int):
        depth = len(prefix)
        if depth == steps:
            if classes == "E" and all(rj in (0, p) for rj in prefix):
                return
            results[prefix] = evaluator.finalize(state)
            return
        left = steps - depth
        choices = (0, p) if classes == "C" else range(0, min(p, order) + 1)
        for r in choices:
            if r > min(p, order):
                continue
            new_order = order + p - 2 * r
            if new_order > (left - 1) * p:
                continue
            if (new_order + (left - 1) * p) % 2:
                continue
            rec(evaluator.step(state, r), prefix + (r,), new_order)

    rec(evaluator.initial(), (), p)
    return results


def chain_values(f: GridKernel, k: int, model: str,
                 classes: str = "B") -> dict[tuple, Scalar]:
    """Per-tuple iterated contraction values over B_k (or its C/E parts).

    Classical chains run on the symmetrization of f and are the iterated
    symmetrized contractions WITHOUT the integer expansion weights; free
    chains require a mirror-symmetric kernel.  Values include the kernel's
    exact scale (degree k).
    """
    if classes not in ("B", "C", "E"):
        raise InvalidInputError("chain classes must be 'B', 'C' or 'E'")
    if k < 2:
        raise InvalidInputError("chain values need k >= 2")
    p, m, mode = f.order, f.resolution, f.mode
    if p < 1:
        raise InvalidInputError("chain values need an order >= 1 kernel")
    if model == "classical":
        g = _sym_array(f.coeffs, p, m, mode)
        evaluator = _ClassicalChain(g, p, m, mode)
    elif model == "free":
        if not is_mirror_symmetric(f):
            raise PreconditionError(
                "free moments are defined for mirror-symmetric kernels"
            )
        evaluator = _FreeChain(f.coeffs, p, m, mode)
    else:
        raise InvalidInputError(f"unknown model {model!r}")
    raw = _chain_dfs(evaluator, p, k, classes)
    return {
        t: scaled_scalar(v, f.scale_sq, k, mode) for t, v in raw.items()
    }


def _zero(mode: str) -> Scalar:
    return 0.0 if mode == "float" else Fraction(0)


def free_moment(f: GridKernel, k: int) -> Scalar:
    """E[F^k] for the order-p Wigner integral of a mirror-symmetric f:
    the plain sum of the iterated free contractions over B_k."""
    if f.order == 0:
        return scaled_scalar(f.coeffs[0] ** k, f.scale_sq, k, f.mode)
    values = chain_values(f, k, "free", "B")
    total = _zero(f.mode)
    for v in values.values():
        total = total + v
    return total


def classical_moment(f: GridKernel, k: int) -> Scalar:
    """E[F^k] for the Wiener-Ito integral of f (symmetrized first):
    the weighted sum of iterated symmetrized contractions over B_k."""
    if f.order == 0:
        return scaled_scalar(f.coeffs[0] ** k, f.scale_sq, k, f.mode)
    values = chain_values(f, k, "classical", "B")
    total = _zero(f.mode)
    for t, v in values.items():
        total = total + comb.classical_coeff_seq(f.order, t) * v
    return total


# --- fourth-moment identities ----------------------------------------------


def _require_normalized(f: GridKernel, model: str) -> None:
    if model == "classical":
        v = math.factorial(f.order) * l2_norm_sq(symmetrize(f))
        label = "p! ||sym(f)||^2"
    else:
        v = l2_inner(f, adjoint(f))
        label = "<f, f*>"
    if f.mode == "exact":
        ok = v == 1
    else:
        ok = abs(float(v) - 1.0) <= _NORMALIZATION_RTOL
    if not ok:
        raise PreconditionError(
            f"kernel is not variance-normalized for the {model} model: "
            f"{label} = {v}; call normalize_variance first"
        )


def free_fourth_identity(f: GridKernel) -> Scalar:
    """2 ||f||^4 + sum_{r=1}^{p-1} ||f fr_r f||^2, which equals the free
    fourth moment of any mirror-symmetric kernel."""
    if not is_mirror_symmetric(f):
        raise PreconditionError("the free fourth-moment identity needs f = f*")
    nsq = l2_norm_sq(f)
    total = 2 * nsq * nsq
    for r in range(1, f.order):
        total = total + l2_norm_sq(contract_free(f, f, r))
    return total


def classical_fourth_identity(f: GridKernel) -> Scalar:
    """3 + sum_{r=1}^{p-1} C(p,r)^2 [ (p!)^2 ||f ox_r f||^2
    + (r!)^2 C(p,r)^2 (2p-2r)! ||sym(f ox_r f)||^2 ]
    for a symmetric, variance-normalized kernel."""
    if not is_symmetric(f):
        raise PreconditionError("the classical identity needs a symmetric kernel")
    _require_normalized(f, "classical")
    p = f.order
    pf2 = math.factorial(p) ** 2
    total = 3 if f.mode == "float" else Fraction(3)
    for r in range(1, p):
        raw = l2_norm_sq(contract_classical(f, f, r))
        sym = l2_norm_sq(contract_classical_sym(f, f, r))
        c = math.comb(p, r)
        total = total + c**2 * (
            pf2 * raw
            + math.factorial(r) ** 2 * c**2 * math.factorial(2 * p - 2 * r) * sym
        )
    return total


def symmetrized_square_identity(f: GridKernel) -> tuple[Scalar, Scalar]:
    """Both sides of the exact split of the symmetrized tensor square:
    (2p)! ||sym(f ox f)||^2  and  2 + (p!)^2 sum_r C(p,r)^2 ||f ox_r f||^2,
    for a symmetric variance-normalized kernel."""
    if not is_symmetric(f):
        raise PreconditionError("the square identity needs a symmetric kernel")
    _require_normalized(f, "classical")
    p = f.order
    lhs = math.factorial(2 * p) * l2_norm_sq(contract_classical_sym(f, f, 0))
    rhs = 2 if f.mode == "float" else Fraction(2)
    pf2 = math.factorial(p) ** 2
    for r in range(1, p):
        rhs = rhs + pf2 * math.comb(p, r) ** 2 * l2_norm_sq(
            contract_classical(f, f, r)
        )
    return lhs, rhs


def contraction_profile(f: GridKernel, model: str) -> ContractionProfile:
    """[||f o_r f||^2 for r = 1..p-1]; the classical profile also carries the
    symmetrized variants.  These are the quantities whose decay drives the
    fourth-moment criterion."""
    if model not in ("classical", "free"):
        raise InvalidInputError(f"unknown model {model!r}")
    if model == "free":
        raw = tuple(
            l2_norm_sq(contract_free(f, f, r)) for r in range(1, f.order)
        )
        return ContractionProfile(raw_sq=raw, sym_sq=None)
    raw = tuple(
        l2_norm_sq(contract_classical(f, f, r)) for r in range(1, f.order)
    )
    sym = tuple(
        l2_norm_sq(contract_classical_sym(f, f, r)) for r in range(1, f.order)
    )
    return ContractionProfile(raw_sq=raw, sym_sq=sym)


def fourth_moment_gap(f: GridKernel, model: str) -> Scalar:
    """E[F^4] minus its limiting value (3 classical, 2 free) for a
    normalized kernel; nonnegative by the fourth-moment identities."""
    _require_normalized(f, model)
    if model == "classical":
        return classical_moment(symmetrize(f), 4) - 3
    return free_moment(f, 4) - 2


# --- Wick/Isserlis oracle ---------------------------------------------------


@lru_cache(maxsize=64)
def _hermite_coeffs(n: int) -> tuple[int, ...]:
    """Coefficients of the probabilists' Hermite polynomial He_n."""
    if n == 0:
        return (1,)
    if n == 1:
        return (0, 1)
    prev2, prev1 = _hermite_coeffs(n - 2), _hermite_coeffs(n - 1)
    out = [0] * (n + 1)
    for i, c in enumerate(prev1):
        out[i + 1] += c
    for i, c in enumerate(prev2):
        out[i] -= (n - 1) * c
    return tuple(out)


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def _gauss_polynomial(f: GridKernel) -> dict:
    """f's integral as a polynomial in m independent standard normals,
    WITHOUT the overall m^(-p/2) and scale factors: each ordered nonzero
    cell with index multiplicities (k_1, ...) contributes
    a_I * prod_i He_{k_i}(xi_i)."""
    p, m = f.order, f.resolution
    poly: dict = {}
    flat = f.coeffs
    for i in range(flat.size):
        a = flat[i]
        if a == 0:
            continue
        counts: dict[int, int] = {}
        rem = i
        for j in range(p):
            d = (rem // m ** (p - 1 - j)) % m
            counts[d] = counts.get(d, 0) + 1
        cell_poly: dict = {(0,) * m: 1}
        for var, cnt in counts.items():
            hc = _hermite_coeffs(cnt)
            nxt: dict = {}
            for exps, co in cell_poly.items():
                for e, c in enumerate(hc):
                    if c == 0:
                        continue
                    key = exps[:var] + (exps[var] + e,) + exps[var + 1 :]
                    nxt[key] = nxt.get(key, 0) + co * c
            cell_poly = nxt
        for exps, co in cell_poly.items():
            poly[exps] = poly.get(exps, 0) + a * co
    return {e: c for e, c in poly.items() if c != 0}


def wick_oracle_moment(f: GridKernel, k: int, *, var_cap: int = WICK_VARIABLE_CAP,
                       degree_cap: int = WICK_DEGREE_CAP) -> Scalar:
    """E[F^k] computed with no contraction machinery at all: F is written
    exactly as a polynomial in m independent standard normals via the
    Hermite product rule, raised to the k-th power symbolically, and
    integrated termwise with E[xi^n] = (n-1)!! (0 for odd n).

    Exact in exact mode whenever the global factor sqrt(scale_sq^k / m^(kp))
    is rational (always true for even k*p and rational scales); otherwise
    the rational part is computed exactly and the root applied in binary64.
    """
    if k < 1:
        raise InvalidInputError("moment order k must be >= 1")
    if not is_symmetric(f):
        raise PreconditionError("the Wick oracle requires a symmetric kernel")
    p, m = f.order, f.resolution
    if m > var_cap:
        raise BudgetExceededError(
            p, m, var_cap,
            f"Wick oracle capped at {var_cap} Gaussian variables, kernel has {m}",
        )
    if k * p > degree_cap:
        raise BudgetExceededError(
            k * p, k * p, degree_cap,
            f"Wick oracle capped at polynomial degree {degree_cap}, need {k * p}",
        )
    if p == 0:
        return scaled_scalar(f.coeffs[0] ** k, f.scale_sq, k, f.mode)
    base = _gauss_polynomial(f)
    power = {(0,) * m: 1}
    for _ in range(k):
        power = _poly_mul(power, base)
    raw = 0
    for exps, co in power.items():
        if any(e % 2 for e in exps):
            continue
        term = co
        for e in exps:
            if e:
                term *= comb.double_factorial(e - 1)
        raw += term
    if f.mode == "float":
        return float(raw) * float(f.scale_sq) ** (k / 2.0) / m ** (k * p / 2.0)
    raw = Fraction(raw)
    return scaled_scalar(raw, f.scale_sq / m**p, k, "exact")


# --- cross-path dispatch and convergence tables ------------------------------


def compute_moment(f: GridKernel, k: int, model: str, path: str = "formula") -> Scalar:
    """Route to one of the three deterministic moment paths."""
    from .chaos import moment_via_expansion  # local import to avoid cycle

    if model not in ("classical", "free"):
        raise InvalidInputError(f"unknown model {model!r}")
    if path == "formula":
        if model == "classical":
            return classical_moment(symmetrize(f), k)
        return free_moment(f, k)
    if path == "expansion":
        return moment_via_expansion(f, k, model)
    if path == "oracle":
        if model != "classical":
            raise InvalidInputError("the Wick oracle applies to the classical model")
        return wick_oracle_moment(symmetrize(f), k)
    raise InvalidInputError(f"unknown moment path {path!r}")


def is_normalized(f: GridKernel, model: str) -> bool:
    try:
        _require_normalized(f, model)
    except PreconditionError:
        return False
    return True


def convergence_report(family: str, n_list, k_max: int, model: str,
                       mode: str = "float") -> list[dict]:
    """Moment table for a kernel family along an n-grid.

    One row per (n, k): the formula-path moment, the Gaussian/semicircle
    target, their gap, the B_k sum split into its C_k and E_k parts, and the
    self-contraction profile.  For the free model the C_k partial sum is
    always computed in exact arithmetic (cheap: class-C chains only take
    full or tensor steps), which makes its constancy an exact statement.
    """
    if k_max < 2:
        raise InvalidInputError("k_max must be >= 2")
    rows: list[dict] = []
    for n in n_list:
        f = family_kernel(family, n=n, model=model, mode=mode)
        prof = contraction_profile(f, model)
        exact_f = None
        if model == "free" and mode == "float":
            exact_f = family_kernel(family, n=n, model=model, mode="exact")
        for k in range(2, k_max + 1):
            values = chain_values(f, k, model, "B")

            def in_c(t):
                return all(rj in (0, f.order) for rj in t)

            if model == "classical":
                weighted = {
                    t: comb.classical_coeff_seq(f.order, t) * v
                    for t, v in values.items()
                }
                moment = sum(weighted.values(), _zero(mode))
                ck = sum((v for t, v in weighted.items() if in_c(t)), _zero(mode))
                ek = sum((v for t, v in weighted.items() if not in_c(t)), _zero(mode))
                target = comb.gaussian_moment(k)
            else:
                moment = sum(values.values(), _zero(mode))
                ek = sum((v for t, v in values.items() if not in_c(t)), _zero(mode))
                if exact_f is not None:
                    ck = sum(
                        chain_values(exact_f, k, "free", "C").values(), Fraction(0)
                    )
                else:
                    ck = sum((v for t, v in values.items() if in_c(t)), _zero(mode))
                target = comb.semicircle_moment(k)
            rows.append(
                {
                    "family": family,
                    "model": model,
                    "n": n,
                    "k": k,
                    "moment": moment,
                    "target": target,
                    "gap": moment - target,
                    "ck_sum": ck,
                    "ek_sum": ek,
                    "profile_sq": tuple(prof.raw_sq),
                    "profile_sym_sq": tuple(prof.sym_sq) if prof.sym_sq else None,
                }
            )
    return rows
