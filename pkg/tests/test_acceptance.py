"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line."""

import itertools
import time

import numpy as np
import pytest

from statbundle import checks as ck
from statbundle import cli
from statbundle import gallery as ga
from statbundle import sasaki as sa
from statbundle import spherebundle as sb
from statbundle import statmanifold as sm
from statbundle import tmoracle as tm
from statbundle.sasaki import H, V, SplitVector, TangentPoint
from statbundle.spherebundle import TH, TV, SpherePoint

from conftest import all_entries

DUAL_TOL = ck.Tolerances(1e-8, 1e-6)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def test_criterion_1_base_identities(report):
    t0 = time.perf_counter()
    worst = {}
    for e in ga.default_entries(3):
        for r in ck.run_suite(e.structure, e.known_flags, 20, 0, DUAL_TOL, select=["base."]):
            worst[r.id] = max(worst.get(r.id, 0.0), r.max_residual)
    elapsed = time.perf_counter() - t0
    top = max(worst.values())
    ok = top <= 1e-8 and elapsed <= 60.0
    assert report(1, ok, f"max residual {top:.2e} over {len(worst)} checks, {elapsed:.1f} s"), worst


def test_criterion_2_sasaki_dual_path(report):
    t0 = time.perf_counter()
    worst = {"connection": 0.0, "curvature": 0.0, "ricci": 0.0, "scalar": 0.0}
    fns = {"connection": ck.sasaki_connection_oracle, "curvature": ck.sasaki_curvature_oracle,
           "ricci": ck.sasaki_ricci_oracle, "scalar": ck.sasaki_scalar_oracle}
    for e in all_entries():
        s = e.structure
        pts = ck.tangent_points(s, 10, 1)
        for name, fn in fns.items():
            worst[name] = max([worst[name]] + [fn(s, tp) for tp in pts])
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-6 and elapsed <= 300.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert report(2, ok, f"{detail}, {elapsed:.1f} s")


def test_criterion_3_omega_closed(report):
    worst = 0.0
    for e in all_entries():
        for tp in ck.tangent_points(e.structure, 10, 2):
            worst = max(worst, sa.d_omega_residual(e.structure, tp),
                        ck.sasaki_d_omega_oracle(e.structure, tp))
    assert report(3, worst <= 1e-9, f"max |d omega| {worst:.1e} (lifted and coordinate routes)")


def _ray_points(s, norms, seed):
    rng = np.random.default_rng(seed)
    out = []
    for x, t in zip(s.sample(len(norms), seed), norms):
        b = sm.bundle(s, x)
        d = rng.standard_normal(s.n)
        xi = d * (t / np.sqrt(b.norm_sq(d)))
        out.append(TangentPoint(x, xi))
    return out


def test_criterion_4_flatness_rigidity(report):
    hes = ga.paper_hessian(3).structure
    flat = 0.0
    for tp in _ray_points(hes, [0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 5.0], 3):
        flat = max(flat, sa.curvature_norm(hes, tp),
                   float(np.linalg.norm(tm.adapted_curvature(hes, tp.z))))
    sph = ga.round_sphere2().structure
    control = max(sa.curvature_norm(sph, tp) for tp in _ray_points(sph, [0.5, 1.0, 2.0], 3))
    ok = flat <= 1e-7 and control >= 1e-1
    assert report(4, ok, f"paper_hessian max ||R~|| {flat:.1e}; round_sphere2 {control:.2f}")


def test_criterion_5_unbounded_curvature(report):
    s = ga.round_sphere2().structure
    x = np.array([0.3, -0.2])
    b = sm.bundle(s, x)
    X, Y = b.frame[:, 0], b.frame[:, 1]
    v = X
    ts = [1, 2, 4, 8, 16]
    secs, closed, scal = [], [], []
    for t in ts:
        tp = TangentPoint(x, t * v)
        secs.append(sa.sectional_tg(s, tp, (H, X), (H, Y)))
        kg = sm.sectional(s, x, (X, Y))
        closed.append(kg - 0.75 * b.norm_sq(b.R(X, Y, t * v)))
        scal.append(sa.scalar_tg(s, tp))
    # K = 0 and unit curvature: R(X, Y) xi has the length of xi, the frame double sum is 2 t^2
    expected_scal = [2.0 - t * t / 2.0 for t in ts]
    ok = (all(a > c for a, c in zip(secs, secs[1:])) and secs[-1] < -100
          and np.allclose(secs, closed, atol=1e-9) and min(scal) < -100
          and np.allclose(scal, expected_scal, atol=1e-9))
    assert report(5, ok, f"k(X^h,Y^h) at t=16 {secs[-1]:.2f}, rho^tg {scal[-1]:.2f}")


def _slot_vectors(s, sp):
    b = sm.bundle(s, sp.x)
    slots = []
    for X in b.frame.T:
        tv, th = sb.tangent_lifts(s, sp, X)
        slots.append(((TH, X), th))
        slots.append(((TV, X), tv))
    for X in sb._complement(b, sp.xi):
        slots.append(((V, X), SplitVector.lift(V, X)))
    return slots


def test_criterion_6_hypersurface_oracle(report):
    worst_h = worst_H = 0.0
    sign_gap = np.inf
    for e in all_entries():
        s = e.structure
        for sp in ck.sphere_points(s, 4, 5, 1.0) + ck.sphere_points(s, 2, 6, 0.3):
            b = sm.bundle(s, sp.x)
            slots = _slot_vectors(s, sp)
            images = [sb.shape_operator_oracle(s, sp, T) for _, T in slots]
            for (A, TA), SA in zip(slots, images):
                for B, TB in slots:
                    closed = sb.second_fundamental_form(s, sp, A, B)
                    worst_h = max(worst_h, abs(closed - sa.inner(b, SA, TB)))
            S = sb.shape_matrix_oracle(s, sp)
            Hc = sb.mean_curvature(s, sp)
            worst_H = max(worst_H, abs(Hc - np.trace(S)))
            # the opposite sign on the tr K_xi^2 term moves H by 4 f tr K_xi^2
            Kxi = np.einsum("aij,i->aj", b.Kt, sp.xi)
            shift = 4.0 * float(np.trace(Kxi @ Kxi)) / np.sqrt(sp.r ** 2 + b.norm_sq(b.K(sp.xi, sp.xi)))
            if abs(shift) > 1e-2:
                sign_gap = min(sign_gap, abs(Hc + shift - np.trace(S)))
    ok = worst_h <= 1e-6 and worst_H <= 1e-6 and sign_gap > 1e-2
    assert report(6, ok, f"h {worst_h:.1e}, H {worst_H:.1e}; flipped-sign H misses by >= {sign_gap:.2f}")


def test_criterion_7_small_radius_blowup(report):
    n, r = 3, 1.0
    s = ga.torus_bump(n).structure
    pts = sb.sample_sphere_points(s, r, 4, 4, 0)
    lams = sb.halving_grid(10)
    rows = sb.radius_sweep(s, pts, lams, workers=4)
    small = [row for row in rows if row.lam == lams[-1]]
    rem_h, rem_g = [], []
    for row in rows:
        d = row.r_eff ** 2 + row.k_norm_sq       # lam^2 r^2 + lam^4 ||K(xi, xi)||^2
        rem_h.append(abs(row.norm_h_sq - (n - 1) / d))
        rem_g.append(abs(row.H2_minus_h2 - (n - 1) * (n - 2) / d))
    bound = 10.0
    min_H = min(abs(row.H) for row in small)
    min_rho = min(row.rho_tilde for row in small)
    ok = min_H > 1e3 and max(rem_h) <= bound and max(rem_g) <= bound and min_rho > 1e3
    assert report(7, ok, f"min|H| {min_H:.0f}, sup rem ||h||^2 {max(rem_h):.3f}, "
                         f"sup rem H^2-||h||^2 {max(rem_g):.3f}, min rho~ {min_rho:.3g}")


def test_criterion_8_classical_limits(report):
    s = ga.round_sphere2().structure       # K = 0, curved
    worst = 0.0
    for x in s.sample(3, 4):
        b = sm.bundle(s, x)
        tp = TangentPoint(x, np.zeros(2))
        Ra = tm.adapted_curvature(s, tp.z)
        for i, j, k in itertools.product(range(2), repeat=3):
            e = np.eye(2)
            hhh = sa.curvature_tg(s, tp, (H, e[i]), (H, e[j]), (H, e[k]))
            hhv = sa.curvature_tg(s, tp, (H, e[i]), (H, e[j]), (V, e[k]))
            vvv = sa.curvature_tg(s, tp, (V, e[i]), (V, e[j]), (V, e[k]))
            Rg = b.Rg(e[i], e[j], e[k])
            worst = max(worst, np.abs(hhh.h - Rg).max(), np.abs(hhh.v).max(),
                        np.abs(hhv.v - Rg).max(), np.abs(hhv.h).max(),
                        np.abs(vvv.as_array()).max(),
                        np.abs(Ra[:2, i, j, k] - Rg).max(),
                        np.abs(Ra[2:, i, j, 2 + k] - Rg).max())
    exact = True
    for n in (2, 3, 4):
        e = ga.euclid_trivial(n).structure
        pts = sb.sample_sphere_points(e, 1.0, 2, 3, 0)
        for row in sb.radius_sweep(e, pts, sb.halving_grid(10)):
            exact &= row.H == -(n - 1) / row.r_eff
            exact &= row.rho_tilde == (n - 1) * (n - 2) / row.r_eff ** 2
    ok = worst <= 1e-10 and exact
    assert report(8, ok, f"zero-section blocks vs R^g {worst:.1e}; euclid H and rho~ exact: {exact}")


def test_criterion_9_determinism(tmp_path, report, capsys):
    arts = []
    for k in range(2):
        rep = tmp_path / f"r{k}.json"
        csvp = tmp_path / f"s{k}.csv"
        cli.main(["verify", "--structure", "torus_bump", "--dim", "2", "--points", "3",
                  "--seed", "9", "--output", str(rep), "--format", "json"])
        cli.main(["sweep", "--structure", "torus_bump", "--seed", "9", "--halvings", "4",
                  "--base-points", "2", "--fiber-points", "2", "--workers", str(1 + 2 * k),
                  "--output", str(csvp)])
        arts.append((rep.read_bytes(), csvp.read_bytes()))
    capsys.readouterr()
    ok = arts[0] == arts[1] and len(arts[0][0]) > 0 and len(arts[0][1]) > 0
    assert report(9, ok, f"report {len(arts[0][0])} bytes, CSV {len(arts[0][1])} bytes identical")
