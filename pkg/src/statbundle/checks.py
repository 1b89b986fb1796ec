"""Verification suites: every identity and closed-form/oracle comparison as a named check.

A check maps one evaluation point to a non-negative residual; a suite run
reports the worst residual per check against its tolerance class.  The CLI
``verify`` command and the acceptance tests both drive this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import diffengine as de
from . import sasaki as sa
from . import spherebundle as sb
from . import statmanifold as sm
from . import tmoracle as tm
from .diffengine import DerivMode, DerivativeConfig
from .sasaki import SpecialCase, TangentPoint
from .statmanifold import Classification, StatisticalStructure, bundle

XI_NORMS = (0.0, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class Tolerances:
    identity: float
    oracle: float

    @classmethod
    def default_for(cls, deriv: DerivativeConfig) -> Tolerances:
        if deriv.mode is DerivMode.FD:
            return cls(1e-4, 1e-3)
        return cls(1e-8, 1e-6)


# --------------------------------------------------------------------------
# point sets
# --------------------------------------------------------------------------

def base_points(s: StatisticalStructure, count: int, seed: int) -> list[np.ndarray]:
    return s.sample(count, seed)


def tangent_points(s: StatisticalStructure, count: int, seed: int,
                   norms=XI_NORMS) -> list[TangentPoint]:
    """Seeded ``(x, xi)`` pairs with ``||xi||_g`` cycling through ``norms``."""
    rng = np.random.default_rng([seed, 1])
    out = []
    for i, x in enumerate(s.sample(count, seed)):
        d = rng.standard_normal(s.n)
        d /= np.sqrt(bundle(s, x).norm_sq(d))
        out.append(TangentPoint(x, norms[i % len(norms)] * d))
    return out


def sphere_points(s: StatisticalStructure, count: int, seed: int, r: float = 1.0):
    """``count`` sphere points: seeded base points, one Halton fiber direction each."""
    dirs = sb.fiber_directions(s.n, count, seed)
    return [sb.SpherePoint.on(s, x, d, r) for x, d in zip(s.sample(count, seed), dirs)]


# --------------------------------------------------------------------------
# base-manifold residuals
# --------------------------------------------------------------------------

def connection_duality(s, x) -> float:
    """``g(nabla_X Y, Z) + g(Y, nabla*_X Z) - X g(Y, Z)`` over coordinate fields."""
    b = bundle(s, x)
    dg = np.asarray(de.partials(s.g, np.asarray(x, dtype=float), s.deriv, s.domain), dtype=float)
    lowG = np.einsum("az,ayx->xyz", b.g, b.Gamma)         # g(nabla_x d_y, d_z)
    lowGs = np.einsum("ay,azx->xyz", b.g, b.Gamma_star)   # g(d_y, nabla*_x d_z)
    return float(np.abs(lowG + lowGs - np.einsum("yzx->xyz", dg)).max())


def curvature_duality(s, x) -> float:
    """``g(R(X,Y)Z, W) + g(R*(X,Y)W, Z)``."""
    b = bundle(s, x)
    a = np.einsum("aw,axyz->xyzw", b.g, b.Rt)
    c = np.einsum("az,axyw->xyzw", b.g, b.R_star)
    return float(np.abs(a + c).max())


def curvature_sum(s, x) -> float:
    """``R + R* - 2 R^g - 2 [K, K]``."""
    b = bundle(s, x)
    return float(np.abs(b.Rt + b.R_star - 2.0 * b.Rg_t - 2.0 * b.KK_t).max())


def curvature_assembly(s, x) -> float:
    """Coordinate R against both assemblies from (R^g, K)."""
    R = bundle(s, x).Rt
    a = sm.curvature_via_difference_tensor(s, x).components
    c = sm.curvature_via_statistical_derivative(s, x).components
    return float(max(np.abs(R - a).max(), np.abs(R - c).max()))


def koszul_closed(s, x) -> float:
    """``tr R(X, Y) - (nabla_X tau)(Y) + (nabla_Y tau)(X)``."""
    b = bundle(s, x)
    trR = np.einsum("aija->ij", b.Rt)
    return float(np.abs(trR - (b.nabla_tau - b.nabla_tau.T)).max())


def divergence_trace(s, x) -> float:
    """``sum_i g((nabla_{e_i} K)(Y, Z), e_i) = Ric - Ric^g + Ric^K + nabla tau``."""
    b = bundle(s, x)
    fam = sm.ricci_family(s, x)
    div = np.einsum("ajka->jk", b.nablaK_t)
    rhs = (fam.Ric.components - fam.Ric_g.components + fam.Ric_K.components + b.nabla_tau)
    return float(np.abs(div - rhs).max())


def ricci_sum(s, x) -> float:
    """``2 frakRic = Ric + Ric* = 2 Ric^g + 2 Ric^K``."""
    f = sm.ricci_family(s, x)
    a = 2.0 * f.frak_Ric.components
    return float(max(np.abs(a - f.Ric.components - f.Ric_star.components).max(),
                     np.abs(a - 2.0 * f.Ric_g.components - 2.0 * f.Ric_K.components).max()))


def scalar_relation(s, x) -> float:
    """``rho^g - rho - ||K||^2 + ||tau||^2``."""
    rho, rho_g = sm.scalars(s, x)
    k2, t2 = sm.norms_K_tau(bundle(s, x))
    return abs(rho_g - rho - k2 + t2)


def ricci_K_closed(s, x) -> float:
    return float(np.abs(sm.ricci_family(s, x).Ric_K.components
                        - sm.ricci_K_closed_form(s, x)).max())


def nabla_tau_trace(s, x) -> float:
    return float(np.abs(bundle(s, x).nabla_tau - sm.nabla_tau_from_trace(s, x)).max())


def conjugate_symmetry_of_nablagK(s, x) -> float:
    """Deviation of ``g((nabla^g_X K)(Y, Z), W)`` from symmetry in ``(X, Y)``."""
    b = bundle(s, x)
    low = np.einsum("aw,ayzx->xyzw", b.g, b.nablagK_t)
    return float(np.abs(low - low.transpose(1, 0, 2, 3)).max())


# --------------------------------------------------------------------------
# tangent-bundle residuals
# --------------------------------------------------------------------------

def _rel(a, c) -> float:
    return tm.rel_err(a, c)


def sasaki_connection_oracle(s, tp) -> float:
    return _rel(sa.tnabla_adapted(s, tp), tm.adapted_connection(s, tp.z))


def sasaki_curvature_oracle(s, tp) -> float:
    return _rel(sa.curvature_tg_array(s, tp), tm.adapted_curvature(s, tp.z))


def sasaki_ricci_oracle(s, tp) -> float:
    return _rel(sa.ricci_tg_array(s, tp), tm.adapted_ricci(s, tp.z))


def sasaki_scalar_oracle(s, tp) -> float:
    return _rel(sa.scalar_tg(s, tp), tm.tm_scalar(s, tp.z))


def sasaki_ricci_trace(s, tp) -> float:
    """Closed-form Ricci against the frame trace of the closed-form curvature."""
    basis = sa.adapted_basis(s.n)
    worst = 0.0
    for A in basis:
        for B in basis:
            worst = max(worst, abs(sa.ricci_tg(s, tp, A, B) - sa.ricci_trace(s, tp, A, B)))
    return worst


def sasaki_first_bianchi(s, tp) -> float:
    R = sa.curvature_tg_array(s, tp)
    return float(np.abs(R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)).max())


def sasaki_d_omega(s, tp) -> float:
    return sa.d_omega_residual(s, tp)


def sasaki_d_omega_oracle(s, tp) -> float:
    return float(np.abs(tm.d_omega_coord(s, tp.z)).max())


def _special(case):
    def residual(s, tp) -> float:
        return float(np.abs(sa.curvature_tg_array(s, tp, case)
                            - sa.curvature_tg_array(s, tp)).max())
    return residual


def sasaki_flat_closed(s, tp) -> float:
    return sa.curvature_norm(s, tp)


def sasaki_flat_oracle(s, tp) -> float:
    return float(np.linalg.norm(tm.adapted_curvature(s, tp.z)))


# --------------------------------------------------------------------------
# sphere-bundle residuals
# --------------------------------------------------------------------------

def sphere_normal(s, sp) -> float:
    """``| ||N|| - 1 |`` and ``|g~(N, X^tv)|``, ``|g~(N, X^th)|`` over the base frame."""
    b = bundle(s, sp.x)
    N = sb.normal(s, sp)
    worst = abs(sa.inner(b, N, N) - 1.0)
    for i in range(s.n):
        for L in sb.tangent_lifts(s, sp, b.frame[:, i]):
            worst = max(worst, abs(sa.inner(b, N, L)))
    return worst


def sphere_frame_orthonormal(s, sp) -> float:
    b = bundle(s, sp.x)
    fr = sb.sphere_frame(s, sp)
    vecs = fr.vectors()
    gram = np.array([[sa.inner(b, A, B) for B in vecs] for A in vecs])
    perp = max(abs(sa.inner(b, A, fr.normal)) for A in vecs)
    return float(max(np.abs(gram - np.eye(len(vecs))).max(), perp))


def sphere_h_oracle(s, sp) -> float:
    return _rel(sb.h_matrix(s, sp), sb.shape_matrix_oracle(s, sp))


def sphere_h_symmetric(s, sp) -> float:
    h = sb.h_matrix(s, sp)
    return float(np.abs(h - h.T).max())


def sphere_shape_self_adjoint(s, sp) -> float:
    S = sb.shape_matrix_oracle(s, sp)
    return float(np.abs(S - S.T).max())


def sphere_mean_oracle(s, sp) -> float:
    return _rel(sb.mean_curvature(s, sp), np.trace(sb.shape_matrix_oracle(s, sp)))


def sphere_mean_frame(s, sp) -> float:
    return abs(sb.mean_curvature(s, sp) - sb.mean_curvature_frame(s, sp))


def sphere_norm_h_blocks(s, sp) -> float:
    return abs(sb.norm_h_squared(s, sp) - sb.norm_h_squared_naive(s, sp))


def sphere_norm_h_oracle(s, sp) -> float:
    return _rel(sb.norm_h_squared(s, sp), np.sum(sb.shape_matrix_oracle(s, sp) ** 2))


def sphere_gauss_oracle(s, sp) -> float:
    return _rel(sb.scalar_sphere(s, sp), sb.gauss_terms_oracle(s, sp).rho_tilde)


def sphere_symmetrized_derivative(s, sp) -> float:
    """``1/2 g(R(Y,X)xi,xi) + g((nabla^g_X K)(xi,xi), Y)`` equals its symmetrization."""
    b = bundle(s, sp.x)
    xi = sp.xi
    worst = 0.0
    F = b.frame
    for i in range(s.n):
        for j in range(s.n):
            X, Y = F[:, i], F[:, j]
            lhs = 0.5 * b.ip(b.R(Y, X, xi), xi) + b.ip(b.ngK(X, xi, xi), Y)
            rhs = 0.5 * (b.ip(b.ngK(X, xi, xi), Y) + b.ip(b.ngK(Y, xi, xi), X))
            worst = max(worst, abs(lhs - rhs))
    return worst


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------

BASE, TANGENT, SPHERE = "base", "tangent", "sphere"
IDENTITY, ORACLE = "identity", "oracle"


@dataclass(frozen=True)
class Check:
    id: str
    statement: str
    scope: str
    tol_class: str
    residual: Callable
    applies: Callable[[Traits], bool] = lambda traits: True


@dataclass(frozen=True)
class Traits:
    """Classification flags plus whether K is parallel for the statistical connection."""

    flags: Classification
    parallel_K: bool

    @property
    def conjugate_symmetric(self) -> bool:
        return self.flags.conjugate_symmetric

    @property
    def hessian(self) -> bool:
        return self.flags.hessian

    @property
    def flat_lift(self) -> bool:
        return self.flags.hessian and self.parallel_K


def traits(s: StatisticalStructure, flags: Classification, sample, tol: float = 1e-7) -> Traits:
    worst = max(float(np.linalg.norm(bundle(s, x).nablaK_t)) for x in sample)
    return Traits(flags, worst <= tol)


CHECKS: tuple[Check, ...] = (
    Check("base.connection_duality", "g(nabla_X Y,Z) + g(Y,nabla*_X Z) = X g(Y,Z)",
          BASE, IDENTITY, connection_duality),
    Check("base.curvature_duality", "g(R(X,Y)Z,W) = -g(R*(X,Y)W,Z)",
          BASE, IDENTITY, curvature_duality),
    Check("base.curvature_sum", "R + R* = 2R^g + 2[K,K]", BASE, IDENTITY, curvature_sum),
    Check("base.curvature_assembly", "coordinate R equals both (R^g, K) assemblies",
          BASE, IDENTITY, curvature_assembly),
    Check("base.koszul_closed", "tr R(X,Y) = d tau(X,Y)", BASE, IDENTITY, koszul_closed),
    Check("base.divergence_trace", "div K = Ric - Ric^g + Ric^K + nabla tau",
          BASE, IDENTITY, divergence_trace),
    Check("base.ricci_sum", "Ric + Ric* = 2 frakRic = 2Ric^g + 2Ric^K",
          BASE, IDENTITY, ricci_sum),
    Check("base.scalar_relation", "rho^g = rho + ||K||^2 - ||tau||^2",
          BASE, IDENTITY, scalar_relation),
    Check("base.ricci_K", "Ric^K(X,Y) = tau(K(X,Y)) - tr(K_X K_Y)",
          BASE, IDENTITY, ricci_K_closed),
    Check("base.nabla_tau_trace", "nabla tau(X,Y) = tr nabla K(X,Y,.)",
          BASE, IDENTITY, nabla_tau_trace),
    Check("base.conjugate_symmetry", "nabla^g K totally symmetric",
          BASE, IDENTITY, conjugate_symmetry_of_nablagK,
          lambda f: f.conjugate_symmetric),
    Check("tangent.connection_oracle", "lifted connection vs coordinate oracle",
          TANGENT, ORACLE, sasaki_connection_oracle),
    Check("tangent.curvature_oracle", "lifted curvature vs coordinate oracle",
          TANGENT, ORACLE, sasaki_curvature_oracle),
    Check("tangent.ricci_oracle", "lifted Ricci vs coordinate oracle",
          TANGENT, ORACLE, sasaki_ricci_oracle),
    Check("tangent.scalar_oracle", "lifted scalar curvature vs coordinate oracle",
          TANGENT, ORACLE, sasaki_scalar_oracle),
    Check("tangent.ricci_trace", "closed-form Ricci equals trace of closed-form curvature",
          TANGENT, IDENTITY, sasaki_ricci_trace),
    Check("tangent.first_bianchi", "cyclic sum of lifted curvature vanishes",
          TANGENT, IDENTITY, sasaki_first_bianchi),
    Check("tangent.d_omega", "d omega = 0 from lifted brackets", TANGENT, IDENTITY,
          sasaki_d_omega),
    Check("tangent.d_omega_oracle", "d omega = 0 in TM coordinates", TANGENT, IDENTITY,
          sasaki_d_omega_oracle),
    Check("tangent.conjugate_symmetric_case", "specialised curvature equals general formula",
          TANGENT, IDENTITY, _special(SpecialCase.CONJUGATE_SYMMETRIC),
          lambda f: f.conjugate_symmetric),
    Check("tangent.hessian_case", "specialised curvature equals general formula",
          TANGENT, IDENTITY, _special(SpecialCase.HESSIAN), lambda f: f.hessian),
    Check("tangent.flat_closed", "Hessian with parallel K: lifted curvature vanishes",
          TANGENT, IDENTITY, sasaki_flat_closed, lambda f: f.flat_lift),
    Check("tangent.flat_oracle", "Hessian with parallel K: oracle curvature vanishes",
          TANGENT, ORACLE, sasaki_flat_oracle, lambda f: f.flat_lift),
    Check("sphere.normal", "N unit and orthogonal to tangent lifts",
          SPHERE, IDENTITY, sphere_normal),
    Check("sphere.frame", "sphere frame orthonormal and orthogonal to N",
          SPHERE, IDENTITY, sphere_frame_orthonormal),
    Check("sphere.h_oracle", "second fundamental form vs shape-operator oracle",
          SPHERE, ORACLE, sphere_h_oracle),
    Check("sphere.h_symmetric", "mixed closed forms of h agree", SPHERE, IDENTITY,
          sphere_h_symmetric),
    Check("sphere.shape_self_adjoint", "oracle shape operator self-adjoint",
          SPHERE, ORACLE, sphere_shape_self_adjoint),
    Check("sphere.mean_oracle", "mean curvature vs trace of oracle shape operator",
          SPHERE, ORACLE, sphere_mean_oracle),
    Check("sphere.mean_frame", "mean curvature equals frame trace of h",
          SPHERE, IDENTITY, sphere_mean_frame),
    Check("sphere.norm_h_blocks", "block closed forms of ||h||^2 equal the double loop",
          SPHERE, IDENTITY, sphere_norm_h_blocks),
    Check("sphere.norm_h_oracle", "||h||^2 vs oracle Frobenius norm",
          SPHERE, ORACLE, sphere_norm_h_oracle),
    Check("sphere.gauss_oracle", "Gauss-equation scalar vs all-oracle ingredients",
          SPHERE, ORACLE, sphere_gauss_oracle),
    Check("sphere.symmetrized_derivative", "curvature term symmetrizes nabla^g K(xi,xi)",
          SPHERE, IDENTITY, sphere_symmetrized_derivative),
)

CHECK_IDS = tuple(c.id for c in CHECKS)


def get(check_id: str) -> Check:
    for c in CHECKS:
        if c.id == check_id:
            return c
    raise KeyError(check_id)


@dataclass(frozen=True)
class CheckResult:
    id: str
    statement: str
    max_residual: float
    tolerance: float
    passed: bool
    points: int

    def as_dict(self) -> dict:
        return {"id": self.id, "statement": self.statement,
                "max_residual": self.max_residual, "tolerance": self.tolerance,
                "passed": self.passed, "points": self.points}


def run_check(check: Check, s: StatisticalStructure, points, tol: Tolerances) -> CheckResult:
    worst = 0.0
    for p in points:
        r = float(check.residual(s, p))
        if not np.isfinite(r):
            worst = float("inf")
            break
        worst = max(worst, r)
    t = tol.identity if check.tol_class == IDENTITY else tol.oracle
    return CheckResult(check.id, check.statement, worst, t, worst <= t, len(points))


def run_suite(s: StatisticalStructure, flags: Classification, n_points: int, seed: int,
              tol: Tolerances, r: float = 1.0, select=None) -> list[CheckResult]:
    """Run every applicable check (or those whose id starts with a prefix in ``select``)."""
    pts = {BASE: lambda: base_points(s, n_points, seed),
           TANGENT: lambda: tangent_points(s, n_points, seed),
           SPHERE: lambda: sphere_points(s, n_points, seed, r)}
    cache: dict = {}
    tr = traits(s, flags, s.sample(8, seed))
    out = []
    for c in CHECKS:
        if not c.applies(tr):
            continue
        if select is not None and not any(c.id.startswith(p) for p in select):
            continue
        if c.scope not in cache:
            cache[c.scope] = pts[c.scope]()
        out.append(run_check(c, s, cache[c.scope], tol))
    return out
