import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from statbundle import checks as ck
from statbundle import gallery as ga
from statbundle import sasaki as sa
from statbundle import statmanifold as sm
from statbundle import tmoracle as tm
from statbundle.errors import ClassificationError, NormalizationError
from statbundle.sasaki import H, V, SpecialCase, SplitVector, TangentPoint

from conftest import ENTRY_PARAMS

E3 = np.eye(3)


def tpoints(s, count=4, seed=5):
    return ck.tangent_points(s, count, seed)


def test_tangent_point_validation():
    with pytest.raises(ValueError):
        TangentPoint(np.zeros(2), np.zeros(3))
    tp = TangentPoint([1.0, 2.0], [0.0, 1.0])
    np.testing.assert_array_equal(tp.z, [1.0, 2.0, 0.0, 1.0])
    assert tp.n == 2


def test_split_vector_arithmetic():
    A = SplitVector(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    np.testing.assert_array_equal((2 * A - A).as_array(), A.as_array())
    np.testing.assert_array_equal(SplitVector.from_array([1, 2, 3, 4]).v, [3.0, 4.0])
    with pytest.raises(ValueError):
        SplitVector.lift("x", np.zeros(2))


def test_lift_metric_euclid_identity():
    s = ga.euclid_trivial(3).structure
    G = sa.lift_metric(s, TangentPoint(np.zeros(3), np.ones(3))).components
    np.testing.assert_array_equal(G, np.eye(6))


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_lift_metric_blocks_and_oracle(entry):
    s = entry.structure
    n = s.n
    for tp in tpoints(s):
        G = sa.lift_metric(s, tp).components
        assert not G[:n, n:].any() and not G[n:, :n].any()
        Gc = tm.tm_metric(s, tp.z).components
        Finv = tm.frame_change_inverse(s, tp.z)
        np.testing.assert_allclose(Finv.T @ Gc @ Finv, G, atol=1e-10)


def test_inner_is_sum_of_blocks():
    s = ga.torus_bump(2).structure
    x = s.sample(1, 0)[0]
    b = sm.bundle(s, x)
    A = SplitVector(np.array([1.0, 2.0]), np.array([-1.0, 0.5]))
    B = SplitVector(np.array([0.3, 0.1]), np.array([2.0, 1.0]))
    assert sa.inner(b, A, B) == pytest.approx(b.ip(A.h, B.h) + b.ip(A.v, B.v), abs=1e-15)


def test_tnabla_euclid_zero():
    s = ga.euclid_trivial(3).structure
    tp = TangentPoint(np.zeros(3), np.array([1.0, -1.0, 0.5]))
    for a, c in itertools.product((H, V), repeat=2):
        assert not sa.tnabla(s, tp, a, E3[0], c, E3[1]).as_array().any()


def test_tnabla_vv_example():
    s = ga.paper_hessian(3).structure
    out = sa.tnabla(s, TangentPoint(np.ones(3), np.zeros(3)), V, E3[0], V, E3[0])
    np.testing.assert_array_equal(out.h, -E3[0])
    np.testing.assert_array_equal(out.v, np.zeros(3))


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_tnabla_vs_oracle(entry):
    s = entry.structure
    for tp in tpoints(s):
        assert ck.sasaki_connection_oracle(s, tp) <= 1e-7


def test_tnabla_is_metric_and_torsion_free():
    # torsion: nabla_A B - nabla_B A = [A, B] on lifted coordinate fields
    s = ga.torus_bump(3).structure
    tp = tpoints(s, 1, 2)[0]
    b = sm.bundle(s, tp.x)
    for A, B in itertools.product(sa.adapted_basis(3), repeat=2):
        lhs = sa.tnabla(s, tp, *A, *B) - sa.tnabla(s, tp, *B, *A)
        np.testing.assert_allclose(lhs.as_array(), sa.bracket(b, tp.xi, A, B).as_array(),
                                   atol=1e-12)


def test_aux_vanishes_on_flat_connection():
    s = ga.paper_hessian(3).structure
    x = s.sample(1, 0)[0]
    A = sa.aux(s, x)
    xi = np.array([1.0, 2.0, 3.0])
    assert not A.R1(E3[0], xi, E3[1]).any()
    assert not A.R2(xi, E3[0]).any() and not A.R3(xi, E3[1]).any()
    assert A.norm_R4_sq(xi) == 0.0


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_aux_identities(entry):
    s = entry.structure
    rng = np.random.default_rng(1)
    for x in s.sample(4, 3):
        A = sa.aux(s, x)
        b = A.b
        X, Y, Z, xi = rng.standard_normal((4, s.n))
        # R1(Z, Y, X) - R1(Z, X, Y) = frakR(X, Y) Z
        lhs = A.R1(Z, Y, X) - A.R1(Z, X, Y)
        rhs = b.Rg(X, Y, Z) + b.KK(X, Y, Z)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)
        # defining property of R1
        W = rng.standard_normal(s.n)
        assert b.ip(W, A.R1(X, Y, Z)) == pytest.approx(0.5 * b.ip(b.R(W, X, Y), Z), abs=1e-12)
        # full double sum over a frame, by loop and vectorised
        F = b.frame
        loop = sum(b.norm_sq(b.R(F[:, i], F[:, j], xi)) for i in range(s.n) for j in range(s.n))
        assert A.norm_R4_sq(xi) == pytest.approx(loop, rel=1e-12, abs=1e-12)
        assert sa.norm_R4_sq(b, xi) == pytest.approx(loop, rel=1e-10, abs=1e-10)
        np.testing.assert_allclose(A.R4(xi)[:, 0, 1], b.R(E_(s, 0), E_(s, 1), xi), atol=1e-15)
        np.testing.assert_allclose(A.R2(X, Y) @ Z, b.R(Z, X, Y), atol=1e-12)
        assert Z @ A.R3(X, Y) @ W == pytest.approx(b.ip(b.R(Z, W, X), Y), abs=1e-12)
        if entry.known_flags.conjugate_symmetric:
            np.testing.assert_allclose(A.R1(X, Y, Z), 0.5 * b.R(Z, Y, X), atol=1e-9)


def E_(s, i):
    return np.eye(s.n)[i]


def test_curvature_example_vanishes():
    s = ga.paper_hessian(3).structure
    tp = TangentPoint(np.array([1.0, 1.5, 2.0]), np.array([0.3, -2.0, 1.0]))
    assert np.abs(sa.curvature_tg_array(s, tp)).max() <= 1e-12


def test_curvature_at_zero_section_round_sphere():
    s = ga.round_sphere2().structure
    x = np.array([0.4, -0.1])
    tp = TangentPoint(x, np.zeros(2))
    b = sm.bundle(s, x)
    e = np.eye(2)
    for X, Y, Z in itertools.product(e, repeat=3):
        out = sa.curvature_tg(s, tp, (H, X), (H, Y), (H, Z))
        np.testing.assert_allclose(out.h, b.Rg(X, Y, Z), atol=1e-12)
        np.testing.assert_allclose(out.v, 0.0, atol=1e-12)
        # vertical slots at the zero section
        out = sa.curvature_tg(s, tp, (H, X), (H, Y), (V, Z))
        np.testing.assert_allclose(out.v, b.Rg(X, Y, Z), atol=1e-12)


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_curvature_ricci_scalar_vs_oracle(entry):
    s = entry.structure
    for tp in tpoints(s, 4, 13):
        assert ck.sasaki_curvature_oracle(s, tp) <= 1e-6
        assert ck.sasaki_ricci_oracle(s, tp) <= 1e-6
        assert ck.sasaki_scalar_oracle(s, tp) <= 1e-6


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_curvature_symmetries(entry):
    s = entry.structure
    for tp in tpoints(s, 3, 17):
        b = sm.bundle(s, tp.x)
        R = sa.curvature_tg_array(s, tp)
        G = sa.lift_metric(s, tp).components
        low = np.einsum("ad,abgc->bgcd", G, R)     # g~(R(E_b, E_g) E_c, E_d)
        assert np.abs(low + low.transpose(1, 0, 2, 3)).max() <= 1e-8
        assert np.abs(low + low.transpose(0, 1, 3, 2)).max() <= 1e-8
        assert np.abs(low - low.transpose(2, 3, 0, 1)).max() <= 1e-8
        assert ck.sasaki_first_bianchi(s, tp) <= 1e-8
        assert b is sm.bundle(s, tp.x)


def test_special_cases():
    hes = ga.paper_hessian(3).structure
    tp = TangentPoint(np.ones(3), np.array([1.0, 0.5, -0.5]))
    out = sa.curvature_tg_special(hes, tp, (V, E3[0]), (H, E3[1]), (V, E3[0]), SpecialCase.HESSIAN)
    assert not out.as_array().any()
    sph = ga.round_sphere2().structure
    for tp in tpoints(sph):
        a = sa.curvature_tg_array(sph, tp, SpecialCase.CONJUGATE_SYMMETRIC)
        assert np.abs(a - sa.curvature_tg_array(sph, tp)).max() <= 1e-10
    half = ga.gaussian_fisher(0.5).structure
    for tp in tpoints(half):
        assert ck._special(SpecialCase.CONJUGATE_SYMMETRIC)(half, tp) <= 1e-8
    one = ga.gaussian_fisher(1.0).structure
    for tp in tpoints(one):
        assert ck._special(SpecialCase.HESSIAN)(one, tp) <= 1e-8
        assert ck._special(SpecialCase.CONJUGATE_SYMMETRIC)(one, tp) <= 1e-8


def test_special_case_preconditions():
    tor = ga.torus_bump(2).structure
    tp = tpoints(tor, 1)[0]
    e = np.eye(2)
    with pytest.raises(ClassificationError):
        sa.curvature_tg_special(tor, tp, (H, e[0]), (H, e[1]), (V, e[0]),
                                SpecialCase.CONJUGATE_SYMMETRIC)
    sph = ga.round_sphere2().structure
    with pytest.raises(ClassificationError):
        sa.curvature_tg_special(sph, tpoints(sph, 1)[0], (H, e[0]), (H, e[1]), (V, e[0]),
                                SpecialCase.HESSIAN)


def test_ricci_examples():
    hes = ga.paper_hessian(3).structure
    tp = TangentPoint(np.array([1.0, 2.0, 1.5]), np.array([1.0, 1.0, -2.0]))
    assert np.abs(sa.ricci_tg_array(hes, tp)).max() <= 1e-12
    sph = ga.round_sphere2().structure
    x = np.array([-0.3, 0.8])
    ric_g = sm.ricci_family(sph, x).Ric_g.components
    e = np.eye(2)
    for i, j in itertools.product(range(2), repeat=2):
        val = sa.ricci_tg(sph, TangentPoint(x, np.zeros(2)), (H, e[i]), (H, e[j]))
        assert val == pytest.approx(ric_g[i, j], abs=1e-12)


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_ricci_and_scalar_traces(entry):
    s = entry.structure
    for tp in tpoints(s, 3, 19):
        assert ck.sasaki_ricci_trace(s, tp) <= 1e-8
        assert abs(sa.scalar_tg(s, tp) - sa.scalar_trace(s, tp)) <= 1e-8


def test_scalar_examples():
    hes = ga.paper_hessian(3).structure
    for tp in tpoints(hes):
        assert abs(sa.scalar_tg(hes, tp)) <= 1e-12
    euc = ga.euclid_trivial(3).structure
    assert sa.scalar_tg(euc, TangentPoint(np.zeros(3), np.ones(3))) == 0.0


def test_scalar_on_zero_section():
    for e in ga.default_entries(3):
        s = e.structure
        for x in s.sample(3, 2):
            b = sm.bundle(s, x)
            rho = sm.scalars(s, x)[0]
            expected = rho + 2.0 * float(np.einsum("ij,ij->", b.ginv, b.nabla_tau))
            assert sa.scalar_at_zero(s, x) == pytest.approx(expected, abs=1e-12)


def test_scalar_decreases_along_ray_on_round_sphere():
    s = ga.round_sphere2().structure
    x = np.array([0.2, 0.5])
    v = np.array([1.0, -0.4])
    vals = [sa.scalar_tg(s, TangentPoint(x, t * v)) for t in np.linspace(0.0, 4.0, 9)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def _orthonormal(s, x):
    F = sm.bundle(s, x).frame
    return F[:, 0], F[:, 1]


def test_sectional_examples():
    hes = ga.paper_hessian(3).structure
    x = np.array([1.0, 2.0, 0.7])
    X, Y = _orthonormal(hes, x)
    tp = TangentPoint(x, np.array([0.5, 1.0, 2.0]))
    for A, B in [((V, X), (V, Y)), ((H, X), (H, Y)), ((V, X), (H, Y))]:
        assert sa.sectional_tg(hes, tp, A, B) == pytest.approx(0.0, abs=1e-12)
    sph = ga.round_sphere2().structure
    x = np.array([0.1, 0.3])
    X, Y = _orthonormal(sph, x)
    assert sa.sectional_tg(sph, TangentPoint(x, np.zeros(2)), (H, X), (H, Y)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_sectional_matches_curvature(entry):
    s = entry.structure
    for tp in tpoints(s, 3, 23):
        X, Y = _orthonormal(s, tp.x)
        for A, B in [((V, X), (V, Y)), ((H, X), (H, Y)), ((V, X), (H, Y)), ((H, X), (V, Y)),
                     ((V, X), (H, X))]:
            assert sa.sectional_tg(s, tp, A, B) == pytest.approx(
                sa.sectional_from_curvature(s, tp, A, B), abs=1e-9)


def test_sectional_requires_orthonormal_pair():
    s = ga.round_sphere2().structure
    tp = TangentPoint(np.zeros(2), np.zeros(2))
    with pytest.raises(NormalizationError):
        sa.sectional_tg(s, tp, (H, np.array([1.0, 0.0])), (H, np.array([0.0, 1.0])))


def test_sectional_unbounded_below_on_round_sphere():
    s = ga.round_sphere2().structure
    x = np.array([0.0, 0.0])
    X, Y = _orthonormal(s, x)
    vals = [sa.sectional_tg(s, TangentPoint(x, t * X), (H, X), (H, Y)) for t in (1, 10, 100)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < -1e3


def test_J_and_omega():
    s = ga.torus_bump(2).structure
    tp = tpoints(s, 1)[0]
    b = sm.bundle(s, tp.x)
    cd = sa.almost_complex_and_omega(s, tp)
    assert cd.j_squared_residual == 0.0
    assert cd.hermitian_residual <= 1e-15
    X, Y = np.array([1.0, 0.3]), np.array([-0.2, 2.0])
    assert sa.omega(b, SplitVector.lift(V, X), SplitVector.lift(H, Y)) == pytest.approx(b.ip(X, Y))
    assert sa.omega(b, SplitVector.lift(V, X), SplitVector.lift(V, Y)) == 0.0
    assert sa.omega(b, SplitVector.lift(H, X), SplitVector.lift(H, Y)) == 0.0
    np.testing.assert_array_equal(sa.J(SplitVector.lift(V, X)).h, X)
    np.testing.assert_array_equal(sa.J(SplitVector.lift(H, X)).v, -X)


@pytest.mark.parametrize("entry", ENTRY_PARAMS)
def test_omega_closed(entry):
    s = entry.structure
    for tp in tpoints(s, 4, 29):
        assert sa.d_omega_residual(s, tp) <= 1e-9
        assert ck.sasaki_d_omega_oracle(s, tp) <= 1e-9


def test_nijenhuis():
    for e in (ga.paper_hessian(3), ga.gaussian_fisher(1.0), ga.euclid_trivial(2)):
        for tp in tpoints(e.structure):
            assert sa.nijenhuis_norm(e.structure, tp) <= 1e-7
            assert np.abs(tm.nijenhuis_coord(e.structure, tp.z)).max() <= 1e-7
    s = ga.round_sphere2().structure
    tps = tpoints(s, 8)
    assert max(sa.nijenhuis_norm(s, tp) for tp in tps) > 1e-2
    assert max(np.abs(tm.nijenhuis_coord(s, tp.z)).max() for tp in tps) > 1e-2


@given(st.lists(st.floats(0.2, 6.0), min_size=2, max_size=2),
       st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_first_bianchi_torus_property(x, xi):
    s = ga.torus_bump(2).structure
    assert ck.sasaki_first_bianchi(s, TangentPoint(x, xi)) <= 1e-8
