"""Extrinsic and intrinsic curvature of the tangent sphere bundle S^r M in TM.

Conventions: the unit normal is ``N = f (U - K(xi, xi)^h)`` with
``f = (r^2 + ||K(xi, xi)||^2)^{-1/2}`` and ``U`` the canonical vertical
field; the second fundamental form is ``h(A, B) = -g~(nabla_A N, B)``, the
shape operator ``S = -(nabla N)^T`` and ``H = tr h``.  With these signs a
round fiber (K = 0) has ``H = -(n-1)/r``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm as _gauss
from scipy.stats import qmc

from . import sasaki as sa
from . import tmoracle as tm
from .errors import ConfigError, SlotConditionError
from .sasaki import H, V, SplitVector, TangentPoint
from .statmanifold import CurvatureBundle, StatisticalStructure, bundle
from .tensorcore import gram_schmidt

TH, TV = "th", "tv"
KXX_ZERO = 1e-9
_PERP_TOL = 1e-9


@dataclass(frozen=True)
class SpherePoint:
    tp: TangentPoint
    r: float

    @classmethod
    def on(cls, s: StatisticalStructure, x, xi, r: float) -> SpherePoint:
        """Project ``xi`` radially onto the g-sphere of radius ``r`` at ``x``."""
        if not r > 0:
            raise ConfigError(f"radius must be positive, got {r}")
        b = bundle(s, x)
        xi = np.asarray(xi, dtype=float)
        nrm = np.sqrt(b.norm_sq(xi))
        if nrm == 0:
            raise ValueError("cannot project the zero vector onto a sphere")
        return cls(TangentPoint(x, xi * (r / nrm)), float(r))

    @property
    def x(self):
        return self.tp.x

    @property
    def xi(self):
        return self.tp.xi

    def scaled(self, lam: float) -> SpherePoint:
        """The point ``lam * xi`` on the sphere of radius ``lam * r``."""
        if not lam > 0:
            raise ConfigError(f"scale factor must be positive, got {lam}")
        return SpherePoint(TangentPoint(self.x, lam * self.xi), lam * self.r)


@dataclass(frozen=True)
class _Local:
    """Shorthands at a sphere point."""

    b: CurvatureBundle
    xi: np.ndarray
    r: float
    k: np.ndarray       # K(xi, xi)
    k2: float           # ||K(xi, xi)||^2
    f: float

    def ip(self, a, c):
        return self.b.ip(a, c)


def _local(s: StatisticalStructure, sp: SpherePoint) -> _Local:
    b = bundle(s, sp.x)
    xi = sp.xi
    if abs(np.sqrt(b.norm_sq(xi)) - sp.r) > 1e-10 * max(1.0, sp.r):
        raise ValueError("sphere point is off the sphere; build it with SpherePoint.on")
    k = b.K(xi, xi)
    k2 = b.norm_sq(k)
    return _Local(b, xi, sp.r, k, k2, 1.0 / np.sqrt(sp.r ** 2 + k2))


def canonical_vertical(sp: SpherePoint) -> SplitVector:
    return SplitVector.lift(V, sp.xi)


def tangent_lifts(s: StatisticalStructure, sp: SpherePoint, X) -> tuple[SplitVector, SplitVector]:
    """``(X^tv, X^th)``."""
    L = _local(s, sp)
    X = np.asarray(X, dtype=float)
    U = canonical_vertical(sp)
    Xtv = SplitVector.lift(V, X) - (L.ip(L.xi, X) / L.r ** 2) * U
    Xth = SplitVector.lift(H, X) + (L.ip(L.k, X) / L.r ** 2) * U
    return Xtv, Xth


def normal(s: StatisticalStructure, sp: SpherePoint) -> SplitVector:
    L = _local(s, sp)
    return SplitVector(-L.f * L.k, L.f * L.xi)


def _tangent_vector(s, sp, L, kind, X) -> SplitVector:
    if kind == TH:
        return tangent_lifts(s, sp, X)[1]
    if kind == TV:
        return tangent_lifts(s, sp, X)[0]
    if kind == V:
        _require_perp(L, X)
        return SplitVector.lift(V, X)
    raise ValueError(f"slot kind must be 'th', 'tv' or 'v', got {kind!r}")


def _require_perp(L: _Local, X):
    if abs(L.ip(L.xi, X)) > _PERP_TOL * max(1.0, L.r * np.sqrt(L.ip(X, X))):
        raise SlotConditionError("a plain vertical slot needs X orthogonal to xi")


def _h_thth(L: _Local, X, Y) -> float:
    b, xi, k, r = L.b, L.xi, L.k, L.r
    sym = 0.5 * (L.ip(b.ngK(X, xi, xi), Y) + L.ip(b.ngK(Y, xi, xi), X))
    curv = (L.ip(k, Y) * L.ip(b.R(X, k, xi), xi)
            + L.ip(k, X) * L.ip(b.R(Y, k, xi), xi)) / (2.0 * r ** 2)
    kk = 2.0 * L.ip(b.K(xi, X), b.K(xi, Y))
    last = L.ip(k, X) * L.ip(k, Y) * (1.0 - L.k2 / r ** 2) / r ** 2
    return L.f * (sym - curv - kk + last)


def _h_th_v(L: _Local, X, Y) -> float:
    """``h(X^th, Y^v)`` for ``Y`` orthogonal to xi."""
    b, xi, k, r = L.b, L.xi, L.k, L.r
    return L.f * (L.ip(b.K(X, Y), xi) - 0.5 * L.ip(b.R(X, k, xi), Y)
                  - L.ip(k, X) * L.ip(b.K(xi, Y), k) / r ** 2)


def _h_v_th(L: _Local, X, Y) -> float:
    """``h(X^v, Y^th)`` for ``X`` orthogonal to xi (the mirrored closed form)."""
    b, xi, k, r = L.b, L.xi, L.k, L.r
    return L.f * (L.ip(b.K(X, Y), xi) - 0.5 * L.ip(b.R(Y, k, xi), X)
                  - L.ip(k, Y) * L.ip(b.K(xi, X), k) / r ** 2)


def _h_vv(L: _Local, X, Y) -> float:
    return L.f * (-L.ip(X, Y) - L.ip(L.b.K(X, Y), L.k))


def _perp_part(L: _Local, X):
    return X - (L.ip(L.xi, X) / L.r ** 2) * L.xi


def second_fundamental_form(s: StatisticalStructure, sp: SpherePoint, A, B) -> float:
    """``h`` on slots ``(kind, X)`` with kind ``'th'``, ``'tv'`` or ``'v'``.

    ``'v'`` needs ``X`` orthogonal to xi; ``'tv'`` accepts any X since
    ``X^tv`` is the vertical lift of the part of X orthogonal to xi.
    """
    L = _local(s, sp)
    (a, X), (c, Y) = A, B
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    if a == V:
        _require_perp(L, X)
    if c == V:
        _require_perp(L, Y)
    if a in (V, TV):
        X = _perp_part(L, X)
    if c in (V, TV):
        Y = _perp_part(L, Y)
    va, vc = a in (V, TV), c in (V, TV)
    if a not in (TH, TV, V) or c not in (TH, TV, V):
        raise ValueError(f"slot kinds must be 'th', 'tv' or 'v', got {a!r}, {c!r}")
    if not va and not vc:
        return _h_thth(L, X, Y)
    if not va and vc:
        return _h_th_v(L, X, Y)
    if va and not vc:
        return _h_v_th(L, X, Y)
    return _h_vv(L, X, Y)


# --------------------------------------------------------------------------
# shape-operator oracle
# --------------------------------------------------------------------------

def _normal_field(s: StatisticalStructure, r: float):
    """Coordinate components of ``f (U - K(xi, xi)^h)`` at fixed r, as a field on TM."""
    n = s.n

    def field(z):
        x, xi = z[:n], z[n:]
        g = np.asarray(s.g(x))
        K = np.asarray(s.K(x))
        k = np.einsum("aij,i,j->a", K, xi, xi)
        f = 1.0 / np.sqrt(r * r + k @ g @ k)
        adapted = np.concatenate([-f * k, f * xi])
        return tm.frame_change_inverse(s, z) @ adapted

    return field


def shape_operator_oracle(s: StatisticalStructure, sp: SpherePoint, T: SplitVector) -> SplitVector:
    """Tangential part of ``-nabla_T N`` from coordinate derivatives on TM."""
    L = _local(s, sp)
    Nv = normal(s, sp)
    if abs(sa.inner(L.b, T, Nv)) > 1e-8 * max(1.0, np.linalg.norm(T.as_array())):
        raise SlotConditionError("shape operator needs a vector tangent to the sphere bundle")
    z = sp.tp.z
    D = _normal_derivative(s, sp)
    F = np.asarray(tm.frame_change(s, z), dtype=float)
    Finv = np.linalg.inv(F)
    w = SplitVector.from_array(-(F @ (D @ (Finv @ T.as_array()))))
    return w - sa.inner(L.b, w, Nv) * Nv


_DN_CACHE: dict = {}


def _normal_derivative(s, sp):
    key = (id(s), sp.r, tuple(sp.tp.z))
    hit = _DN_CACHE.get(key)
    if hit is None or hit[0] is not s:
        if len(_DN_CACHE) > 256:
            _DN_CACHE.clear()
        hit = (s, tm.covariant_derivative_of_field(s, sp.tp.z, _normal_field(s, sp.r)))
        _DN_CACHE[key] = hit
    return hit[1]


# --------------------------------------------------------------------------
# frames, mean curvature, norm of h
# --------------------------------------------------------------------------

def _complement(b: CurvatureBundle, u) -> list[np.ndarray]:
    """Orthonormal basis of the g-orthogonal complement of ``u`` (n - 1 vectors)."""
    u = np.asarray(u, dtype=float)
    basis = [u / np.sqrt(b.norm_sq(u))]
    for e in np.eye(b.n):
        w = e - sum(b.ip(q, e) * q for q in basis)
        nw = np.sqrt(b.norm_sq(w))
        if nw > 1e-6:
            basis.append(w / nw)
        if len(basis) == b.n:
            break
    return basis[1:]


@dataclass(frozen=True)
class SphereFrame:
    """Orthonormal frame of ``T_xi S^r M``: ``e~_i^v``, ``e_i^h`` and ``e*_n`` when defined."""

    tilde: list          # e~_i, base vectors orthogonal to xi
    hor: list            # e_i, orthogonal to K(xi, xi) (all n when it vanishes)
    k_unit: np.ndarray | None
    star: SplitVector | None
    normal: SplitVector

    def vectors(self) -> list[SplitVector]:
        out = [SplitVector.lift(V, e) for e in self.tilde]
        out += [SplitVector.lift(H, e) for e in self.hor]
        if self.star is not None:
            out.append(self.star)
        return out


def sphere_frame(s: StatisticalStructure, sp: SpherePoint) -> SphereFrame:
    L = _local(s, sp)
    tilde = _complement(L.b, L.xi)
    if np.sqrt(L.k2) < KXX_ZERO:
        hor = [L.b.frame[:, i] for i in range(s.n)]
        ku = None
        star = None
    else:
        hor = _complement(L.b, L.k)
        ku = L.k / np.sqrt(L.k2)
        kth = tangent_lifts(s, sp, L.k)[1]
        star = kth * (L.f * L.r / np.sqrt(L.k2))
    return SphereFrame(tilde, hor, ku, star, normal(s, sp))


def _frame_slots(fr: SphereFrame, L: _Local):
    """Frame vectors as ``(kind, X, scale)`` slots for :func:`second_fundamental_form`."""
    slots = [(V, e, 1.0) for e in fr.tilde] + [(TH, e, 1.0) for e in fr.hor]
    if fr.star is not None:
        slots.append((TH, L.k, L.f * L.r / np.sqrt(L.k2)))
    return slots


def mean_curvature(s: StatisticalStructure, sp: SpherePoint) -> float:
    """Closed-form mean curvature (valid whether or not K(xi, xi) vanishes)."""
    L = _local(s, sp)
    b, xi, k, r, k2 = L.b, L.xi, L.k, L.r, L.k2
    n = s.n
    F = b.frame
    tr_ngK = sum(b.ip(b.ngK(F[:, i], xi, xi), F[:, i]) for i in range(n))
    Kxi = np.einsum("aij,i->aj", b.Kt, xi)
    tr_K2 = float(np.trace(Kxi @ Kxi))
    f2 = L.f ** 2
    val = (-(n - 1) - float(b.tau @ k) + k2 / r ** 2 + tr_ngK
           - f2 * b.ip(b.ngK(k, xi, xi), k)
           - 2.0 * tr_K2 + 2.0 * f2 * b.norm_sq(b.K(xi, k))
           + f2 * k2 * (1.0 - k2 / r ** 2))
    return L.f * val


def mean_curvature_frame(s: StatisticalStructure, sp: SpherePoint) -> float:
    """``H`` as the trace of ``h`` over :func:`sphere_frame`."""
    L = _local(s, sp)
    fr = sphere_frame(s, sp)
    return sum(c * c * second_fundamental_form(s, sp, (kind, X), (kind, X))
               for kind, X, c in _frame_slots(fr, L))


def h_matrix(s: StatisticalStructure, sp: SpherePoint) -> np.ndarray:
    """Matrix of ``h`` over the sphere frame via closed forms (naive double loop)."""
    L = _local(s, sp)
    slots = _frame_slots(sphere_frame(s, sp), L)
    m = len(slots)
    out = np.zeros((m, m))
    for i, (ka, X, ca) in enumerate(slots):
        for j, (kb, Y, cb) in enumerate(slots):
            out[i, j] = ca * cb * second_fundamental_form(s, sp, (ka, X), (kb, Y))
    return out


def shape_matrix_oracle(s: StatisticalStructure, sp: SpherePoint) -> np.ndarray:
    """``g~(S(E_i), E_j)`` over the sphere frame from the oracle."""
    b = bundle(s, sp.x)
    vecs = sphere_frame(s, sp).vectors()
    images = [shape_operator_oracle(s, sp, E) for E in vecs]
    return np.array([[sa.inner(b, SE, E) for E in vecs] for SE in images])


def norm_h_squared(s: StatisticalStructure, sp: SpherePoint) -> float:
    """``||h||^2`` assembled block by block from frame closed forms."""
    L = _local(s, sp)
    b, xi, k, r, k2, f = L.b, L.xi, L.k, L.r, L.k2, L.f
    fr = sphere_frame(s, sp)
    T, E = fr.tilde, fr.hor
    f2 = f * f
    # vertical block: sum (h(e~_i, e~_j))^2
    a = np.array([[b.ip(b.K(ti, tj), k) for tj in T] for ti in T])
    total = f2 * (len(T) + 2.0 * np.trace(a) + float(np.sum(a * a)))
    # e~_i^v against e_j^h
    for ti in T:
        for ej in E:
            v = f * (b.ip(b.K(ti, ej), xi) - b.ip(k, ej) * b.ip(k, b.K(xi, ti)) / r ** 2
                     - 0.5 * b.ip(b.R(ej, k, xi), ti))
            total += 2.0 * v * v
    # e_i^h against e_j^h
    for ei in E:
        for ej in E:
            v = f * (0.5 * (b.ip(b.ngK(ei, xi, xi), ej) + b.ip(b.ngK(ej, xi, xi), ei))
                     - 2.0 * b.ip(b.K(xi, ei), b.K(xi, ej)))
            total += v * v
    if fr.star is not None:
        kn = np.sqrt(k2)
        c = r / (kn * (r ** 2 + k2))
        h_nn = (r ** 2 / (k2 * (r ** 2 + k2) ** 1.5)) * (
            b.ip(b.ngK(k, xi, xi), k) - 2.0 * b.norm_sq(b.K(xi, k))
            + k2 * k2 * (1.0 - k2 / r ** 2) / r ** 2)
        total += h_nn * h_nn
        for ei in E:
            v = c * (0.5 * (b.ip(b.ngK(ei, xi, xi), k) + b.ip(b.ngK(k, xi, xi), ei))
                     - 0.5 * k2 * b.ip(b.R(ei, k, xi), xi) / r ** 2
                     - 2.0 * b.ip(b.K(xi, ei), b.K(xi, k)))
            total += 2.0 * v * v
        for ti in T:
            v = c * b.ip(b.K(ti, xi), k) * (1.0 - k2 / r ** 2)
            total += 2.0 * v * v
    return float(total)


def norm_h_squared_naive(s: StatisticalStructure, sp: SpherePoint) -> float:
    return float(np.sum(h_matrix(s, sp) ** 2))


# --------------------------------------------------------------------------
# intrinsic scalar curvature via the Gauss equation
# --------------------------------------------------------------------------

def ricci_NN(s: StatisticalStructure, sp: SpherePoint) -> float:
    L = _local(s, sp)
    xi, k = L.xi, L.k
    return L.f ** 2 * (sa.ricci_tg(s, sp.tp, (V, xi), (V, xi))
                       - 2.0 * sa.ricci_tg(s, sp.tp, (V, xi), (H, k))
                       + sa.ricci_tg(s, sp.tp, (H, k), (H, k)))


@dataclass(frozen=True)
class GaussTerms:
    rho_tg: float
    ric_NN: float
    H: float
    norm_h_sq: float

    @property
    def rho_tilde(self) -> float:
        return self.rho_tg - 2.0 * self.ric_NN + self.H ** 2 - self.norm_h_sq


def gauss_terms(s: StatisticalStructure, sp: SpherePoint) -> GaussTerms:
    return GaussTerms(sa.scalar_tg(s, sp.tp), ricci_NN(s, sp), mean_curvature(s, sp),
                      norm_h_squared(s, sp))


def gauss_terms_oracle(s: StatisticalStructure, sp: SpherePoint) -> GaussTerms:
    """Every Gauss-equation ingredient taken from the coordinate oracle."""
    z = sp.tp.z
    Nv = normal(s, sp).as_array()
    S = shape_matrix_oracle(s, sp)
    return GaussTerms(tm.tm_scalar(s, z), float(Nv @ tm.adapted_ricci(s, z) @ Nv),
                      float(np.trace(S)), float(np.sum(S * S)))


def scalar_sphere(s: StatisticalStructure, sp: SpherePoint) -> float:
    return gauss_terms(s, sp).rho_tilde


# --------------------------------------------------------------------------
# radius sweeps
# --------------------------------------------------------------------------

def fiber_directions(n: int, count: int, seed: int) -> np.ndarray:
    """Seeded scrambled-Halton directions on the unit sphere of R^n (rows)."""
    u = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    w = _gauss.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def sample_sphere_points(s: StatisticalStructure, r: float, n_base: int, n_fiber: int,
                         seed: int) -> list[SpherePoint]:
    """Seeded base points times a low-discrepancy set of fiber directions."""
    pts = []
    for x in s.sample(n_base, seed):
        for d in fiber_directions(s.n, n_fiber, seed):
            pts.append(SpherePoint.on(s, x, d, r))
    return pts


def halving_grid(halvings: int) -> list[float]:
    """``1, 1/2, ..., 2^-halvings``."""
    if halvings < 0:
        raise ConfigError("number of halvings must be non-negative")
    return [2.0 ** -i for i in range(halvings + 1)]


@dataclass(frozen=True)
class SweepRow:
    point_index: int
    lam: float
    r_eff: float
    xi: tuple
    k_norm_sq: float
    H: float
    norm_h_sq: float
    H2_minus_h2: float
    rho_tilde: float
    rho_tg: float
    ric_NN: float


def _row(s, idx, sp, lam) -> SweepRow:
    q = sp.scaled(lam)
    t = gauss_terms(s, q)
    L = _local(s, q)
    return SweepRow(idx, lam, q.r, tuple(float(v) for v in q.xi), L.k2, t.H, t.norm_h_sq,
                    t.H ** 2 - t.norm_h_sq, t.rho_tilde, t.rho_tg, t.ric_NN)


def radius_sweep(s: StatisticalStructure, points, lambdas, workers: int = 1) -> list[SweepRow]:
    """Rows for every (point, lambda), ordered by point index then decreasing lambda."""
    lambdas = [float(l) for l in lambdas]
    if any(not (0.0 < l <= 1.0) for l in lambdas):
        raise ConfigError("sweep factors must lie in (0, 1]")
    jobs = [(i, sp, lam) for i, sp in enumerate(points) for lam in lambdas]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda j: _row(s, *j), jobs))
    else:
        rows = [_row(s, *j) for j in jobs]
    return sorted(rows, key=lambda row: (row.point_index, -row.lam))
