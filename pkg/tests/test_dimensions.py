import numpy as np
import pytest

from sqlab import make_rng
from sqlab.dimensions import (
    FnSet,
    default_psi_family,
    extend_witness,
    parity_witness,
    shifted_set,
    sq_dim,
    sq_sdim_estimate,
    sqd_lower_scaling,
    sqd_upper,
)
from sqlab.errors import NormRangeError, PoolInsufficientError, UsageError
from sqlab.fnspace import (
    Domain,
    RealFn,
    conjunction_class,
    dist_uniform,
    norm,
    parity_class,
    random_bool_fn,
    random_real_fn,
    sign_of,
)
from sqlab.sqcore import ApproxSet


def _half_pool(fs, idx, gamma):
    members = [RealFn(fs.domain, row / 2.0) for row in fs.matrix[list(idx)]]
    return ApproxSet(members, gamma=gamma, provenance="half-witness")


def test_fnset_validation(domain3):
    with pytest.raises(UsageError):
        FnSet(domain3, [np.full(8, 2.5)])
    with pytest.raises(UsageError):
        FnSet(domain3, [np.zeros(4)])
    with pytest.raises(UsageError):
        FnSet(domain3, [], allow_empty=False)
    empty = FnSet(domain3, [], allow_empty=True)
    assert len(empty) == 0 and empty.matrix.shape == (0, 8)
    with pytest.raises(UsageError):
        FnSet.from_fns([])


def test_sq_dim_parities_is_class_size(uniform3):
    for n in (1, 2, 3):
        fs = FnSet.from_fns(list(parity_class(n)))
        rep = sq_dim(fs, dist_uniform(Domain(n)))
        assert rep.value == 2**n
        assert rep.certainty == "exact"
        assert sorted(rep.witness) == list(range(2**n))


def test_sq_dim_trivial_sets(domain3, uniform3):
    f = random_bool_fn(domain3, make_rng(1, 0, "f"))
    single = FnSet.from_fns([f])
    assert sq_dim(single, uniform3).value == 1
    dup = FnSet.from_fns([f, f])
    assert sq_dim(dup, uniform3).value == 1  # |<f,f>| = 1 > 1/2


def test_sq_dim_negation_invariance(domain3, uniform3):
    fns = list(parity_class(3))[:5]
    a = sq_dim(FnSet.from_fns(fns), uniform3).value
    b = sq_dim(FnSet.from_fns([-f for f in fns]), uniform3).value
    assert a == b


def test_sq_dim_greedy_never_exceeds_exact(uniform3, domain3):
    rng = make_rng(2, 0, "f")
    for _ in range(10):
        fns = [random_bool_fn(domain3, rng) for _ in range(8)]
        fs = FnSet.from_fns(fns)
        exact = sq_dim(fs, uniform3, mode="exact")
        greedy = sq_dim(fs, uniform3, mode="greedy")
        assert greedy.value <= exact.value
        assert greedy.certainty == "lower-bound"


def test_sq_dim_exact_cap(uniform3, domain3):
    rng = make_rng(3, 0, "f")
    fns = [random_bool_fn(domain3, rng) for _ in range(31)]
    with pytest.raises(UsageError):
        sq_dim(FnSet.from_fns(fns), uniform3, mode="exact")
    sq_dim(FnSet.from_fns(fns), uniform3, mode="greedy")  # no cap


def test_extend_witness_is_inclusion_maximal(uniform3):
    fs = FnSet.from_fns(list(conjunction_class(3)))
    rep = sq_dim(fs, uniform3)
    thr = 1.0 / rep.value
    ext = extend_witness(fs, uniform3, rep.witness, thr)
    assert set(rep.witness) <= set(ext)
    absgram = np.abs(fs.matrix * uniform3.weights @ fs.matrix.T)
    np.fill_diagonal(absgram, 0.0)
    for j in range(len(fs)):
        if j in ext:
            continue
        assert any(absgram[j, c] > thr for c in ext)


def test_sqd_upper_parities_cover_only_themselves(uniform3):
    fs = FnSet.from_fns(list(parity_class(3)))
    pool = ApproxSet([f.as_real() for f in parity_class(3)], gamma=0.5)
    rep = sqd_upper(fs, uniform3, 0.5, pool)
    assert rep.value == len(fs)  # orthogonal members: one pool fn each
    rep1 = sqd_upper(FnSet.from_fns([parity_class(3)[3]]), uniform3, 0.5, pool)
    assert rep1.value == 1


def test_sqd_upper_insufficient_pool(domain3, uniform3):
    fs = FnSet.from_fns(list(parity_class(3))[:4])
    blind = ApproxSet([RealFn(domain3, np.zeros(8))], gamma=0.5)
    with pytest.raises(PoolInsufficientError):
        sqd_upper(fs, uniform3, 0.5, blind)
    with pytest.raises(UsageError):
        sqd_upper(fs, uniform3, 0.0, blind)


def test_sqd_lower_scaling_boolean_example(uniform3):
    fs = FnSet.from_fns(list(parity_class(3)))
    rep = sqd_lower_scaling(fs, uniform3, 1.0, 1.0)
    # base dim 8, unit norms: bound = 8^(1/3)/2 = 1, at gamma = 1/2
    assert rep.value == 1
    assert rep.params["bound"] == pytest.approx(1.0, abs=1e-12)
    assert rep.params["gamma"] == pytest.approx(0.5, abs=1e-12)
    assert rep.params["base_dim"] == 8


def test_sqd_lower_scaling_norm_validation(domain3, uniform3):
    small = FnSet(domain3, [np.full(8, 0.5)], labels=["tiny"])
    with pytest.raises(NormRangeError, match="tiny"):
        sqd_lower_scaling(small, uniform3, 0.9, 1.0)
    with pytest.raises(UsageError):
        sqd_lower_scaling(small, uniform3, 0.5, 0.9)  # M < 1


def test_shifted_set_zero_psi_keeps_far_members(domain3, uniform3):
    cclass = parity_class(3)
    zero = RealFn(domain3, np.zeros(8))
    fs = shifted_set(cclass, zero, uniform3, 0.1)
    # every nonconstant parity is 1/2-far from sign(0) = +1; chi_empty is not
    assert len(fs) == 7
    assert 0 not in fs.labels
    np.testing.assert_array_equal(fs.matrix, np.stack([f.values for f in cclass[1:]]))


def test_shifted_set_self_psi_is_empty(domain3, uniform3):
    cclass = parity_class(3)
    fs = shifted_set([cclass[3]], cclass[3].as_real(), uniform3, 0.1)
    assert len(fs) == 0
    assert sq_dim(fs, uniform3).value == 0


def test_shifted_set_member_norms(domain3, uniform3):
    rng = make_rng(4, 0, "psi")
    eps = 0.2
    for _ in range(10):
        psi = random_real_fn(domain3, rng)
        fs = shifted_set(parity_class(3), psi, uniform3, eps)
        if len(fs) == 0:
            continue
        norms = np.sqrt((fs.matrix**2 * uniform3.weights).sum(axis=1))
        assert norms.min() >= np.sqrt(eps) - 1e-12


def test_sq_sdim_estimate_zero_family(domain3, uniform3):
    zero = RealFn(domain3, np.zeros(8))
    rep = sq_sdim_estimate(parity_class(3), uniform3, 0.1, [zero])
    # sign(0) = +1 coincides with chi_empty, so only the 7 others survive
    assert rep.value == 7
    assert rep.certainty == "lower-bound"
    assert rep.params["psi_index"] == 0
    assert 0 not in rep.witness


def test_sq_sdim_estimate_monotone_in_family(domain3, uniform3):
    cclass = parity_class(3)
    rng = make_rng(5, 0, "psi")
    family = default_psi_family(cclass, rng, n_random=3)
    small = sq_sdim_estimate(cclass, uniform3, 0.1, family[:2])
    big = sq_sdim_estimate(cclass, uniform3, 0.1, family)
    assert big.value >= small.value
    assert big.params["family_size"] == len(family)
    single = sq_sdim_estimate([cclass[3]], uniform3, 0.1, [cclass[3].as_real()])
    assert single.value == 0 and single.params["psi_index"] is None


def test_parity_witness_counts_and_radius():
    fs, rep = parity_witness(5, 2)
    assert rep.value == len(fs) == 15  # C(5,1) + C(5,2)
    assert rep.certainty == "exact"
    assert rep.params["l1_radius"] == pytest.approx(0.5)
    fs3, rep3 = parity_witness(3, 3)
    assert rep3.value == 7
    uniform = dist_uniform(Domain(3))
    gram = fs3.matrix * uniform.weights @ fs3.matrix.T
    np.testing.assert_allclose(gram - np.eye(7), 0.0, atol=1e-12)


def test_parity_witness_validation():
    with pytest.raises(UsageError):
        parity_witness(3, 4)
    with pytest.raises(UsageError):
        parity_witness(3, 0)
    # pairwise-zero correlations satisfy any positive separation target
    _, rep = parity_witness(4, 2, gamma_target=1e-6)
    assert rep.value == 10


def test_duality_cover_on_maximizer(uniform3, domain3):
    # the witness pool, halved, covers the shifted set it came from
    eps = 0.4
    cclass = conjunction_class(3)
    best = None
    for j in range(20):
        psi = random_real_fn(domain3, make_rng(100 + j, 0, "psi"))
        fs = shifted_set(cclass, psi, uniform3, eps)
        if len(fs) == 0:
            continue
        rep = sq_dim(fs, uniform3)
        if best is None or rep.value > best[1].value:
            best = (fs, rep)
    fs, rep = best
    ext = extend_witness(fs, uniform3, rep.witness, 1.0 / rep.value)
    d = len(ext)
    cover = sqd_upper(fs, uniform3, 1.0 / (2 * d), _half_pool(fs, ext, 1.0 / (2 * d)))
    assert cover.value <= d
