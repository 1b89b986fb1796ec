"""Brute-force coordinate oracle on TM.

The Sasaki metric is written in the induced chart ``z = (x, xi)`` as an
ordinary 2n-dimensional Riemannian metric

    G = g_ij dx^i dx^j + g_kl theta^k theta^l,   theta^k = dxi^k + Gamma^k_ia xi^a dx^i,

and everything below (Christoffels, curvature, Ricci, scalar, covariant
derivatives of explicit fields) comes from the plain coordinate formulas
applied to ``G`` with dual-number derivatives.  Nothing here uses lifted
closed forms, which is what makes it a usable cross-check.
"""

from __future__ import annotations

import numpy as np

from . import diffengine as de
from .diffengine import Box
from .errors import FrameMismatchError
from .statmanifold import (ConnectionKind, StatisticalStructure, _symbols,
                           curvature_from_symbols, levi_civita_symbols,
                           levi_civita_symbols_derivative)
from .tensorcore import LOW, UP, DenseTensor, Frame, FrameKind, check_spd


def _split(s: StatisticalStructure, z):
    z = np.asarray(z)
    return z[:s.n], z[s.n:]


def _A(s: StatisticalStructure, z, connection: ConnectionKind):
    x, xi = _split(s, z)
    G = _symbols(s, x, connection)
    return np.einsum("kia,a->ki", G, xi)


def tm_metric_components(s: StatisticalStructure, z,
                         connection: ConnectionKind = ConnectionKind.STATISTICAL):
    """Raw 2n x 2n components of G at ``z`` (dual-number friendly)."""
    x, _ = _split(s, z)
    g = np.asarray(s.g(x))
    A = _A(s, z, connection)
    gA = g @ A
    return np.block([[g + A.T @ gA, gA.T], [gA, g]])


def frame_change(s: StatisticalStructure, z,
                 connection: ConnectionKind = ConnectionKind.STATISTICAL):
    """``F`` mapping coordinate components on TM to adapted (h, v) components."""
    A = _A(s, z, connection)
    n = s.n
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[eye, zero], [A, eye]])


def frame_change_inverse(s: StatisticalStructure, z,
                         connection: ConnectionKind = ConnectionKind.STATISTICAL):
    """Columns are the adapted frame fields ``e_i^h``, ``e_k^v`` in coordinates."""
    A = _A(s, z, connection)
    n = s.n
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[eye, zero], [-A, eye]])


def _tm_domain(s: StatisticalStructure) -> Box:
    big = 1e300
    return Box(tuple(s.domain.lo) + (-big,) * s.n, tuple(s.domain.hi) + (big,) * s.n)


def _check(s, z):
    z = np.asarray(z, dtype=float)
    if z.shape != (2 * s.n,):
        raise ValueError(f"expected a point of length {2 * s.n}, got shape {z.shape}")
    s.domain.require(z[:s.n])
    return z


def tm_metric(s: StatisticalStructure, z,
              connection: ConnectionKind = ConnectionKind.STATISTICAL) -> DenseTensor:
    z = _check(s, z)
    G = np.asarray(tm_metric_components(s, z, connection), dtype=float)
    check_spd(G)
    return DenseTensor(G, Frame.coord_tm(s.n), (LOW, LOW))


def _metric_fn(s, connection):
    return lambda z: tm_metric_components(s, z, connection)


def tm_christoffel(s: StatisticalStructure, z,
                   connection: ConnectionKind = ConnectionKind.STATISTICAL) -> np.ndarray:
    z = _check(s, z)
    f = _metric_fn(s, connection)
    G = np.asarray(f(z), dtype=float)
    dG = de.partials(f, z, s.deriv, _tm_domain(s))
    return levi_civita_symbols(G, dG)


def tm_curvature_components(s: StatisticalStructure, z,
                            connection: ConnectionKind = ConnectionKind.STATISTICAL):
    z = _check(s, z)
    G, dG, ddG = de.jet2(_metric_fn(s, connection), z, s.deriv, _tm_domain(s))
    check_spd(G)
    Ginv = np.linalg.inv(G)
    Gam = levi_civita_symbols(G, dG, Ginv)
    dGam = levi_civita_symbols_derivative(G, dG, ddG, Ginv)
    return curvature_from_symbols(Gam, dGam), G, Ginv


def tm_curvature(s: StatisticalStructure, z,
                 connection: ConnectionKind = ConnectionKind.STATISTICAL) -> DenseTensor:
    R, _, _ = tm_curvature_components(s, z, connection)
    return DenseTensor(R, Frame.coord_tm(s.n), (UP, LOW, LOW, LOW))


def tm_ricci(s: StatisticalStructure, z,
             connection: ConnectionKind = ConnectionKind.STATISTICAL) -> DenseTensor:
    R, _, _ = tm_curvature_components(s, z, connection)
    return DenseTensor(np.einsum("aajk->jk", R), Frame.coord_tm(s.n), (LOW, LOW))


def tm_scalar(s: StatisticalStructure, z,
              connection: ConnectionKind = ConnectionKind.STATISTICAL) -> float:
    R, _, Ginv = tm_curvature_components(s, z, connection)
    return float(np.einsum("jk,aajk->", Ginv, R))


def to_adapted(s: StatisticalStructure, z, t: DenseTensor) -> DenseTensor:
    """Re-express a coordinate-frame tensor on TM in the adapted (h, v) frame."""
    if t.frame.kind is not FrameKind.COORD_TM or t.frame.n != s.n:
        raise FrameMismatchError(f"expected a CoordTM tensor with n={s.n}, got {t.frame}")
    F = np.asarray(frame_change(s, np.asarray(z, dtype=float)), dtype=float)
    comp = _transform(t.components, t.variance, F, np.linalg.inv(F))
    return DenseTensor(comp, Frame.adapted(s.n), t.variance)


def from_adapted(s: StatisticalStructure, z, t: DenseTensor) -> DenseTensor:
    if t.frame.kind is not FrameKind.ADAPTED_TM or t.frame.n != s.n:
        raise FrameMismatchError(f"expected an AdaptedTM tensor with n={s.n}, got {t.frame}")
    F = np.asarray(frame_change(s, np.asarray(z, dtype=float)), dtype=float)
    comp = _transform(t.components, t.variance, np.linalg.inv(F), F)
    return DenseTensor(comp, Frame.coord_tm(s.n), t.variance)


def _transform(comp, variance, up_map, low_map):
    out = comp
    for slot, var in enumerate(variance):
        if var == UP:
            out = np.moveaxis(np.tensordot(up_map, out, axes=([1], [slot])), 0, slot)
        else:
            out = np.moveaxis(np.tensordot(out, low_map, axes=([slot], [0])), -1, slot)
    return out


def adapted_curvature(s: StatisticalStructure, z) -> np.ndarray:
    return to_adapted(s, z, tm_curvature(s, z)).components


def adapted_ricci(s: StatisticalStructure, z) -> np.ndarray:
    return to_adapted(s, z, tm_ricci(s, z)).components


def adapted_connection(s: StatisticalStructure, z) -> np.ndarray:
    """``C[al, be, ga]``: adapted component al of ``nabla_{E_be} E_ga``."""
    z = _check(s, z)
    E = np.asarray(frame_change_inverse(s, z), dtype=float)
    dE = de.partials(lambda w: frame_change_inverse(s, w), z, s.deriv, _tm_domain(s))
    Gam = tm_christoffel(s, z)
    # coordinate vector: d_m E[a, ga] E[m, be] + Gam[a, m, c] E[m, be] E[c, ga]
    coord = np.einsum("agm,mb->abg", dE, E) + np.einsum("amc,mb,cg->abg", Gam, E, E)
    F = np.linalg.inv(E)
    return np.einsum("da,abg->dbg", F, coord)


def covariant_derivative_of_field(s: StatisticalStructure, z, field) -> np.ndarray:
    """Matrix ``D[a, m] = (nabla_{d_m} W)^a`` for a coordinate vector field ``W(z)``."""
    z = _check(s, z)
    W = np.asarray(field(z), dtype=float)
    dW = de.partials(field, z, s.deriv, _tm_domain(s))
    Gam = tm_christoffel(s, z)
    return dW + np.einsum("amc,c->am", Gam, W)


def _omega_coord_fn(s: StatisticalStructure):
    n = s.n

    def omega(z):
        x, _ = _split(s, z)
        g = np.asarray(s.g(x))
        F = frame_change(s, z)
        zero = g * 0.0
        # adapted components: omega(X^v, Y^h) = g(X, Y)
        Om = np.block([[zero, -g], [g, zero]])
        return F.T @ Om @ F

    return omega


def d_omega_coord(s: StatisticalStructure, z) -> np.ndarray:
    """``d omega_{abc} = d_a w_bc + d_b w_ca + d_c w_ab`` in the TM chart."""
    z = _check(s, z)
    dw = de.partials(_omega_coord_fn(s), z, s.deriv, _tm_domain(s))   # [b, c, a]
    return (np.einsum("bca->abc", dw) + np.einsum("cab->abc", dw)
            + np.einsum("abc->abc", dw))


def _J_coord_fn(s: StatisticalStructure):
    n = s.n

    def Jc(z):
        F = frame_change(s, z)
        Finv = frame_change_inverse(s, z)
        eye = np.eye(n)
        zero = np.zeros((n, n))
        # J e^v = e^h, J e^h = -e^v in adapted components
        Ja = np.block([[zero, eye], [-eye, zero]])
        return Finv @ Ja @ F

    return Jc


def nijenhuis_coord(s: StatisticalStructure, z) -> np.ndarray:
    """``N[a, b, c]`` of the almost complex structure from its coordinate matrix field."""
    z = _check(s, z)
    f = _J_coord_fn(s)
    Jm = np.asarray(f(z), dtype=float)
    dJ = de.partials(f, z, s.deriv, _tm_domain(s))   # [a, c, m] = d_m J^a_c
    t1 = np.einsum("db,acd->abc", Jm, dJ) - np.einsum("dc,abd->abc", Jm, dJ)
    t2 = np.einsum("ad,dcb->abc", Jm, dJ) - np.einsum("ad,dbc->abc", Jm, dJ)
    return t1 - t2


def rel_err(a, b) -> float:
    """``||a - b||_F / max(1, ||b||_F)``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))
