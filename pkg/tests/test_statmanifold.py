import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statbundle import checks as ck
from statbundle import gallery as ga
from statbundle import statmanifold as sm
from statbundle.diffengine import Box
from statbundle.errors import CollinearError, DomainError, StructureError
from statbundle.statmanifold import ConnectionKind as CK
from statbundle.statmanifold import SectionalKind as SK

from conftest import ENTRY_PARAMS

BASE_CHECKS = [c for c in ck.CHECKS if c.scope == ck.BASE and c.id != "base.conjugate_symmetry"]


@pytest.mark.parametrize("check", BASE_CHECKS, ids=lambda c: c.id)
@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_base_identities(entry, check):
    s = entry.structure
    for x in s.sample(6, 21):
        assert check.residual(s, x) <= 1e-9


def test_euclid_everything_vanishes():
    s = ga.euclid_trivial(3).structure
    x = np.array([0.3, -1.0, 1.5])
    for kind in CK:
        assert not sm.christoffel(s, x, kind).components.any()
        assert not sm.curvature(s, x, kind).components.any()
    f = sm.ricci_family(s, x)
    for t in (f.Ric, f.Ric_star, f.Ric_g, f.Ric_K, f.frak_Ric):
        assert not t.components.any()
    assert sm.scalars(s, x) == (0.0, 0.0)
    kf = sm.koszul_forms(s, x)
    assert not (kf.tau.components.any() or kf.nabla_tau.components.any() or kf.E.components.any())
    assert sm.sectional(s, x, (np.eye(3)[0], np.eye(3)[1]), SK.KCURV) == 0.0


def test_example_christoffels():
    s = ga.paper_hessian(3).structure
    x = np.array([1.0, 2.0, 0.5])
    assert not sm.christoffel(s, x, CK.LEVI_CIVITA).components.any()
    G = sm.christoffel(s, x, CK.STATISTICAL).components
    expected = np.zeros((3, 3, 3))
    for i in range(3):
        expected[i, i, i] = -1.0 / x[i]
    np.testing.assert_array_equal(G, expected)
    np.testing.assert_array_equal(sm.christoffel(s, x, CK.CONJUGATE).components, -expected)


def test_example_curvatures_and_forms():
    s = ga.paper_hessian(3).structure
    x = np.ones(3)
    for kind in (CK.STATISTICAL, CK.LEVI_CIVITA):
        assert np.abs(sm.curvature(s, x, kind).components).max() == 0.0
    assert not sm.bracket_KK(s, x).components.any()
    kf = sm.koszul_forms(s, x)
    np.testing.assert_array_equal(kf.tau.components, -np.ones(3))
    np.testing.assert_array_equal(kf.E.components, -np.ones(3))
    fam = sm.ricci_family(s, x)
    assert not fam.Ric_g.components.any()
    np.testing.assert_array_equal(np.diag(fam.Ric_K.components), np.zeros(3))
    k2, t2 = sm.norms_K_tau(sm.bundle(s, x))
    assert (k2, t2) == (3.0, 3.0)
    assert sm.scalars(s, x) == (0.0, 0.0)
    e = np.eye(3)
    assert sm.sectional(s, x, (e[0], e[2]), SK.KCURV) == 0.0


def test_example_difference_tensor_is_parallel():
    s = ga.paper_hessian(3).structure
    for x in s.sample(10, 3):
        assert np.abs(sm.bundle(s, x).nablaK_t).max() <= 1e-10


def test_round_sphere_sectional_is_one():
    s = ga.round_sphere2().structure
    rng = np.random.default_rng(8)
    for x in s.sample(10, 8):
        X, Y = rng.standard_normal((2, 2))
        assert sm.sectional(s, x, (X, Y)) == pytest.approx(1.0, abs=1e-9)
        assert sm.scalars(s, x)[1] == pytest.approx(2.0, abs=1e-9)


def test_fisher_scalar_curvature():
    # the normal family with the Fisher metric is a hyperbolic plane of curvature -1/2
    for alpha in (0.0, 0.5, 1.0):
        s = ga.gaussian_fisher(alpha).structure
        for x in s.sample(5, 2):
            assert sm.scalars(s, x)[1] == pytest.approx(-1.0, abs=1e-12)


def test_fisher_alpha_one_is_flat():
    s = ga.gaussian_fisher(1.0).structure
    for x in s.sample(10, 5):
        assert np.abs(sm.curvature(s, x, CK.STATISTICAL).components).max() <= 1e-12


def test_bracket_antisymmetric_in_last_pair_when_lowered():
    s = ga.torus_bump(3).structure
    x = s.sample(1, 4)[0]
    b = sm.bundle(s, x)
    low = np.einsum("aw,axyz->xyzw", b.g, b.KK_t)
    assert np.abs(low + low.transpose(0, 1, 3, 2)).max() <= 1e-10
    assert np.abs(b.KK_t + b.KK_t.transpose(0, 2, 1, 3)).max() <= 1e-15


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_classify_matches_known_flags(entry):
    s = entry.structure
    assert sm.classify(s, s.sample(20, 0)) == entry.known_flags


def test_conjugate_symmetry_negative_control():
    s = ga.torus_bump(3).structure
    worst = max(ck.conjugate_symmetry_of_nablagK(s, x) for x in s.sample(10, 0))
    assert worst > 1e-3


@pytest.mark.parametrize("entry", [e for e in ENTRY_PARAMS
                                   if e.values[0].known_flags.conjugate_symmetric])
def test_conjugate_symmetric_entries_have_symmetric_nablagK(entry):
    s = entry.structure
    assert max(ck.conjugate_symmetry_of_nablagK(s, x) for x in s.sample(10, 0)) <= 1e-9


def test_classify_needs_points():
    with pytest.raises(ValueError):
        sm.classify(ga.euclid_trivial(2).structure, [])


def test_collinear_plane_rejected():
    s = ga.round_sphere2().structure
    with pytest.raises(CollinearError):
        sm.sectional(s, np.zeros(2), (np.array([1.0, 2.0]), np.array([2.0, 4.0])))
    with pytest.raises(CollinearError):
        sm.sectional(s, np.zeros(2), (np.zeros(2), np.array([1.0, 0.0])))


def test_sectional_is_plane_invariant():
    s = ga.torus_bump(3).structure
    x = s.sample(1, 9)[0]
    X, Y = np.array([1.0, 0.2, -0.3]), np.array([0.1, 1.0, 0.4])
    for kind in SK:
        a = sm.sectional(s, x, (X, Y), kind)
        assert sm.sectional(s, x, (2 * X + Y, -X + 3 * Y), kind) == pytest.approx(a, abs=1e-12)


def test_invalid_structures_rejected():
    box = Box((0.0, 0.0), (1.0, 1.0))
    with pytest.raises(StructureError):
        sm.StatisticalStructure(2, box, lambda x: np.diag([1.0, -1.0]), lambda x: np.zeros((2, 2, 2)))
    K = np.zeros((2, 2, 2))
    K[0, 0, 1] = 1.0        # K(e_0, e_1) != K(e_1, e_0)
    with pytest.raises(StructureError):
        sm.StatisticalStructure(2, box, lambda x: np.eye(2), lambda x: K)
    K = np.zeros((2, 2, 2))
    K[0, 1, 1] = 1.0        # symmetric in the lower pair, but the cubic form is not
    with pytest.raises(StructureError):
        sm.StatisticalStructure(2, box, lambda x: np.eye(2), lambda x: K)
    with pytest.raises(StructureError):
        sm.StatisticalStructure(3, box, lambda x: np.eye(3), lambda x: np.zeros((3, 3, 3)))


def test_out_of_domain_point():
    s = ga.paper_hessian(2).structure
    with pytest.raises(DomainError):
        sm.curvature(s, np.array([0.1, 1.0]), CK.STATISTICAL)


def test_operations_return_tagged_tensors():
    s = ga.torus_bump(2).structure
    x = s.sample(1, 0)[0]
    R = sm.curvature(s, x, CK.CONJUGATE)
    assert R.variance == ("upper", "lower", "lower", "lower") and R.dims == (2, 2, 2, 2)
    assert sm.metric(s, x).variance == ("lower", "lower")


@given(st.floats(-0.9, 0.9), st.floats(0.55, 1.95), st.floats(-1, 1))
def test_fisher_duality_and_curvature_sum_everywhere(mu, sigma, alpha):
    s = ga.gaussian_fisher(alpha).structure
    x = np.array([mu, sigma])
    assert ck.connection_duality(s, x) <= 1e-9
    assert ck.curvature_duality(s, x) <= 1e-9
    assert ck.curvature_sum(s, x) <= 1e-9
    assert ck.ricci_sum(s, x) <= 1e-9
    assert ck.scalar_relation(s, x) <= 1e-9


@given(st.lists(st.floats(0.1, 6.1), min_size=3, max_size=3))
def test_torus_curvature_antisymmetric(xs):
    s = ga.torus_bump(3).structure
    b = sm.bundle(s, np.array(xs))
    for T in (b.Rt, b.R_star, b.Rg_t):
        assert np.abs(T + T.transpose(0, 2, 1, 3)).max() <= 1e-12
    # ricci of the metric connection is symmetric
    ric_g = np.einsum("aajk->jk", b.Rg_t)
    assert np.abs(ric_g - ric_g.T).max() <= 1e-12
