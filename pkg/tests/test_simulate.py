import numpy as np
import pytest

from chaoskit.config import set_thread_count
from chaoskit.errors import InvalidInputError, PreconditionError
from chaoskit.kernels import (
    constant_kernel,
    new_kernel,
    normalize_variance,
    off_diagonal_part,
    refine,
)
from chaoskit.moments import free_moment
from chaoskit.simulate import (
    SampleConfig,
    derive_rng,
    gue_increments,
    mc_classical_moment,
    mc_free_moment,
    sample_classical,
    sample_free_gue,
)


def test_sample_config_validation():
    SampleConfig(seed=1, n_samples=10)
    with pytest.raises(InvalidInputError):
        SampleConfig(seed=-1, n_samples=10)
    with pytest.raises(InvalidInputError):
        SampleConfig(seed="abc", n_samples=10)
    with pytest.raises(InvalidInputError):
        SampleConfig(seed=1, n_samples=0)
    with pytest.raises(InvalidInputError):
        SampleConfig(seed=1, n_samples=10, matrix_dim=1)


def test_sample_classical_hermite_exact():
    # the order-2 constant kernel samples are exactly xi^2 - 1
    ones2 = constant_kernel(2, 1)
    val = sample_classical(ones2, derive_rng(7, 0))
    xi = derive_rng(7, 0).standard_normal((1, 1))[0, 0]
    assert val == pytest.approx(xi * xi - 1, abs=0)


def test_sample_classical_off_diagonal_is_plain_product(pair_kernel):
    # off-diagonal kernels reduce to products of increments (He_1(x) = x)
    val = sample_classical(pair_kernel, derive_rng(9, 0))
    xi = derive_rng(9, 0).standard_normal((1, 2))[0]
    assert val == pytest.approx(xi[0] * xi[1], abs=0)


def test_sample_classical_requires_symmetry():
    with pytest.raises(PreconditionError):
        sample_classical(new_kernel(2, 2, [0, 1, 0, 0]), derive_rng(1, 0))


def test_mc_classical_reproducible(pair_kernel):
    cfg = SampleConfig(seed=123, n_samples=70_000)
    a = mc_classical_moment(pair_kernel, 4, cfg)
    b = mc_classical_moment(pair_kernel, 4, cfg)
    assert a.value == b.value and a.stderr == b.stderr


def test_mc_classical_thread_invariant(pair_kernel):
    cfg = SampleConfig(seed=321, n_samples=150_000)
    base = mc_classical_moment(pair_kernel, 4, cfg)
    set_thread_count(4)
    try:
        threaded = mc_classical_moment(pair_kernel, 4, cfg)
    finally:
        set_thread_count(None)
    assert threaded.value == base.value


def test_mc_classical_hits_targets(pair_kernel):
    cfg = SampleConfig(seed=2026, n_samples=120_000)
    rep = mc_classical_moment(pair_kernel, 4, cfg)
    assert rep.target == 9
    assert abs(rep.value - 9) <= 4 * rep.stderr
    ones1 = constant_kernel(1, 1)
    rep2 = mc_classical_moment(ones1, 4, cfg)
    assert abs(rep2.value - 3) <= 4 * rep2.stderr
    ones2 = constant_kernel(2, 1)
    rep3 = mc_classical_moment(ones2, 4, cfg)
    assert abs(rep3.value - 60) <= 4 * rep3.stderr


def test_gue_increment_normalization():
    # mean normalized trace of G^2 concentrates at 1/m
    rng = derive_rng(5, 0)
    incr = gue_increments(2, 150, rng)
    vals = [float(np.trace(g @ g).real) / 150 for g in incr]
    assert abs(np.mean(vals) - 0.5) < 0.05


def test_sample_free_gue_semicircle():
    ones1 = constant_kernel(1, 1)
    mom = sample_free_gue(ones1, 6, 400, derive_rng(11, 0))
    assert abs(mom[1] - 1) < 0.1
    assert abs(mom[3] - 2) < 0.3
    assert abs(mom[0]) < 0.1 and abs(mom[2]) < 0.2


def test_sample_free_gue_preconditions():
    with pytest.raises(PreconditionError):
        sample_free_gue(new_kernel(2, 2, [0, 1, 0, 0]), 2, 50, derive_rng(1, 0))
    with pytest.raises(PreconditionError):
        # constant order-2 kernel touches the diagonal; refine first
        sample_free_gue(constant_kernel(2, 1), 2, 50, derive_rng(1, 0))


def test_mc_free_reproducible(pair_kernel):
    pv = normalize_variance(pair_kernel, "free")
    cfg = SampleConfig(seed=77, n_samples=20, matrix_dim=50)
    a = mc_free_moment(pv, 4, cfg)
    b = mc_free_moment(pv, 4, cfg)
    assert a.value == b.value
    set_thread_count(3)
    try:
        c = mc_free_moment(pv, 4, cfg)
    finally:
        set_thread_count(None)
    assert c.value == a.value


def test_mc_free_requires_dim(pair_kernel):
    pv = normalize_variance(pair_kernel, "free")
    with pytest.raises(InvalidInputError):
        mc_free_moment(pv, 4, SampleConfig(seed=1, n_samples=5))


def test_mc_free_near_target(pair_kernel):
    pv = normalize_variance(pair_kernel, "free")
    rep = mc_free_moment(pv, 4, SampleConfig(seed=13, n_samples=60, matrix_dim=80))
    assert rep.target == pytest.approx(2.5, abs=1e-9)
    assert abs(rep.value - 2.5) < 0.1


def test_mc_free_refined_constant():
    g = off_diagonal_part(refine(constant_kernel(2, 1), 16))
    target = float(free_moment(g, 4))
    rep = mc_free_moment(g, 4, SampleConfig(seed=3, n_samples=25, matrix_dim=60))
    assert abs(rep.value - target) < 0.3
    # the discarded diagonal mass is O(1/m): the exact value climbs to 3
    targets = [
        float(free_moment(off_diagonal_part(refine(constant_kernel(2, 1), m)), 4))
        for m in (8, 16, 32)
    ]
    assert targets[0] < targets[1] < targets[2] < 3
    assert 3 - targets[2] < 0.25


def test_mc_free_bias_shrinks_with_dimension(pair_kernel):
    pv = normalize_variance(pair_kernel, "free")
    errs = []
    for dim, draws in ((40, 120), (80, 120)):
        rep = mc_free_moment(pv, 4, SampleConfig(seed=7, n_samples=draws,
                                                 matrix_dim=dim))
        errs.append(abs(rep.value - 2.5))
    assert errs[1] < errs[0]


def test_mc_classical_multi_seed_coverage(pair_kernel):
    # the 4-stderr bound holds across independent seed batches
    exact = 9.0
    hits = 0
    for seed in range(12):
        rep = mc_classical_moment(pair_kernel, 4,
                                  SampleConfig(seed=seed, n_samples=20_000),
                                  target=exact)
        if abs(rep.value - exact) <= 4 * rep.stderr:
            hits += 1
    assert hits >= 11


def test_mc_free_family_approaches_semicircle():
    from chaoskit.kernels import family_kernel

    f8 = family_kernel("pair_clt", n=8, model="free")
    target = float(free_moment(f8, 4))  # 2 + 1/16
    assert target == pytest.approx(2.0625)
    rep = mc_free_moment(f8, 4, SampleConfig(seed=4, n_samples=30, matrix_dim=100))
    assert abs(rep.value - target) < 0.15
