"""Statistical structures (g, K) on a chart and their base curvatures.

Everything here is computed from coordinate formulas: Christoffel symbols
from ``dg``, curvature from ``Gamma`` and ``dGamma``, covariant derivatives
from dual-number partials of component fields.  The raw-array helpers
(prefixed ``_``) accept dual-number points so that they can themselves be
differentiated, which is how ``nabla R`` and ``nabla R_1`` are obtained.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import diffengine as de
from .diffengine import Box, DerivativeConfig, FieldProvider
from .errors import CollinearError, MetricDegenerateError, StructureError
from .tensorcore import LOW, UP, DenseTensor, Frame, check_spd, ev, gram_schmidt, metric_norm_sq


class ConnectionKind(enum.Enum):
    LEVI_CIVITA = "LeviCivita"
    STATISTICAL = "Statistical"
    CONJUGATE = "Conjugate"


class SectionalKind(enum.Enum):
    RIEMANNIAN = "Riemannian"
    KCURV = "Kcurv"
    FRAK = "frak"


@dataclass(frozen=True, eq=False)
class StatisticalStructure:
    """A statistical structure given by a metric provider and a difference tensor provider.

    ``g(x)`` returns the (n, n) metric components, ``K(x)`` the (n, n, n)
    array ``K[a, i, j] = K(e_i, e_j)^a``.  Construction validates SPD-ness
    and the symmetries of K on a deterministic sample of the domain box.
    """

    n: int
    domain: Box
    g: FieldProvider
    K: FieldProvider
    deriv: DerivativeConfig = field(default=de.DUAL)
    name: str = "structure"
    validate: bool = True

    def __post_init__(self):
        if self.domain.n != self.n:
            raise StructureError(f"domain has dimension {self.domain.n}, expected {self.n}")
        if self.validate:
            for x in validation_points(self.domain):
                _validate_at(self, x)

    def with_deriv(self, deriv: DerivativeConfig) -> StatisticalStructure:
        return StatisticalStructure(self.n, self.domain, self.g, self.K, deriv,
                                    self.name, validate=False)

    def sample(self, count: int, seed: int, margin: float = 0.1) -> list[np.ndarray]:
        """Seeded uniform points in the box, kept a relative ``margin`` away from the walls."""
        rng = np.random.default_rng(seed)
        lo, hi = np.asarray(self.domain.lo), np.asarray(self.domain.hi)
        span = hi - lo
        return [lo + span * (margin + (1 - 2 * margin) * rng.random(self.n))
                for _ in range(count)]


def validation_points(domain: Box, seed: int = 20240601) -> list[np.ndarray]:
    """Eight corner-adjacent points plus eight seeded random points of the box."""
    lo, hi = np.asarray(domain.lo), np.asarray(domain.hi)
    span = hi - lo
    corners = list(itertools.product((0.1, 0.9), repeat=domain.n))
    pts = [lo + span * np.array(corners[i % len(corners)]) for i in range(8)]
    rng = np.random.default_rng(seed)
    pts += [lo + span * (0.05 + 0.9 * rng.random(domain.n)) for _ in range(8)]
    return pts


def _validate_at(s: StatisticalStructure, x):
    g = np.asarray(s.g(x), dtype=float)
    K = np.asarray(s.K(x), dtype=float)
    if g.shape != (s.n, s.n) or K.shape != (s.n,) * 3:
        raise StructureError(f"{s.name}: provider shapes {g.shape}, {K.shape} at {x}")
    try:
        check_spd(g)
    except MetricDegenerateError as exc:
        raise StructureError(f"{s.name}: metric not SPD at {x}") from exc
    scale = max(1.0, float(np.abs(K).max()))
    if np.abs(K - np.swapaxes(K, 1, 2)).max() > 1e-12 * scale:
        raise StructureError(f"{s.name}: K(X,Y) != K(Y,X) at {x}")
    C = np.einsum("al,lij->aij", g, K)  # C[z, x, y] = g(K(x, y), z)
    scale = max(1.0, float(np.abs(C).max()))
    for perm in itertools.permutations(range(3)):
        if np.abs(C - np.transpose(C, perm)).max() > 1e-10 * scale:
            raise StructureError(f"{s.name}: g(K(X,Y),Z) not totally symmetric at {x}")


# --------------------------------------------------------------------------
# coordinate formulas on raw (possibly dual) arrays
# --------------------------------------------------------------------------

def levi_civita_symbols(g, dg, ginv=None):
    """``Gamma[a, i, j]`` of the Levi-Civita connection from ``dg[i, j, m] = d_m g_ij``."""
    ginv = de.inv(g) if ginv is None else ginv
    S = dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)  # S[l,i,j]
    return 0.5 * np.einsum("al,lij->aij", ginv, S)


def levi_civita_symbols_derivative(g, dg, ddg, ginv=None):
    """``dGamma[a, i, j, m] = d_m Gamma[a, i, j]`` from up to second metric partials."""
    ginv = de.inv(g) if ginv is None else ginv
    S = dg.transpose(0, 2, 1) + dg - dg.transpose(2, 0, 1)
    # ddg[i, j, p, q] = d_p d_q g_ij
    dS = (ddg.transpose(0, 2, 1, 3) + ddg - ddg.transpose(2, 0, 1, 3))
    dginv = -np.einsum("ab,bcm,cd->adm", ginv, dg, ginv)
    return 0.5 * (np.einsum("alm,lij->aijm", dginv, S) + np.einsum("al,lijm->aijm", ginv, dS))


def curvature_from_symbols(G, dG):
    """``R[a, i, j, k] = (R(e_i, e_j) e_k)^a`` for a connection with symbols ``G``."""
    return (dG.transpose(0, 3, 1, 2) - dG.transpose(0, 1, 3, 2)
            + np.einsum("ail,ljk->aijk", G, G) - np.einsum("ajl,lik->aijk", G, G))


def covariant_derivative(T, dT, G, n_upper: int = 1):
    """Covariant derivative of a tensor field; the derivative slot is appended last.

    ``T`` has ``n_upper`` leading contravariant slots followed by covariant
    ones, ``dT`` its partials (derivative last), ``G`` the connection symbols.
    """
    rank = T.ndim
    out = dT
    for s in range(rank):
        if s < n_upper:
            # + G[a, m, l] T[.. l ..]
            term = np.tensordot(G, T, axes=([2], [s]))            # a, m, rest...
            term = np.moveaxis(term, [0, 1], [s, rank])
            out = out + term
        else:
            # - G[l, m, i] T[.. l ..]
            term = np.tensordot(T, G, axes=([s], [0]))            # rest..., m, i
            term = np.moveaxis(term, [rank - 1, rank], [rank, s])
            out = out - term
    return out


def _metric_jet(s, x):
    return de.jet2(s.g, x, s.deriv, s.domain)


def _k_jet(s, x):
    return np.asarray(s.K(x)), de.partials(s.K, x, s.deriv, s.domain)


def _connection_jet(s, x, kind: ConnectionKind):
    """Symbols and their partials for the requested connection."""
    g, dg, ddg = _metric_jet(s, x)
    ginv = de.inv(g)
    Gg = levi_civita_symbols(g, dg, ginv)
    dGg = levi_civita_symbols_derivative(g, dg, ddg, ginv)
    if kind is ConnectionKind.LEVI_CIVITA:
        return Gg, dGg
    K, dK = _k_jet(s, x)
    sign = 1.0 if kind is ConnectionKind.STATISTICAL else -1.0
    return Gg + sign * K, dGg + sign * dK


def _symbols(s, x, kind: ConnectionKind):
    g = np.asarray(s.g(x))
    dg = de.partials(s.g, x, s.deriv, s.domain)
    Gg = levi_civita_symbols(g, dg)
    if kind is ConnectionKind.LEVI_CIVITA:
        return Gg
    sign = 1.0 if kind is ConnectionKind.STATISTICAL else -1.0
    return Gg + sign * np.asarray(s.K(x))


def _curvature(s, x, kind: ConnectionKind):
    return curvature_from_symbols(*_connection_jet(s, x, kind))


def _r1_field(s, x):
    """``R1[a, x, y, z]`` with ``g(W, R1(X,Y,Z)) = 1/2 g(R(W,X)Y, Z)``."""
    g = np.asarray(s.g(x))
    R = _curvature(s, x, ConnectionKind.STATISTICAL)
    Rlow = np.einsum("cz,cbxy->bxyz", g, R)  # g(R(e_b, X) Y, Z)
    return 0.5 * np.einsum("ab,bxyz->axyz", de.inv(g), Rlow)


def _tau_field(s, x):
    K = np.asarray(s.K(x))
    return np.einsum("aia->i", K)


# --------------------------------------------------------------------------
# float-valued point bundle
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureBundle:
    """Every base tensor needed by the lifted formulas, evaluated at one point.

    Array layouts follow :mod:`statbundle.tensorcore`; covariant derivatives
    carry the derivative slot last (``nablaK[a, i, j, m] = ((nabla_m K)(e_i, e_j))^a``).
    The small methods evaluate the tensors on vectors, so lifted formulas can
    be written in vector notation.
    """

    x: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    Kt: np.ndarray
    Gamma_g: np.ndarray
    Gamma: np.ndarray
    Gamma_star: np.ndarray
    Rt: np.ndarray
    R_star: np.ndarray
    Rg_t: np.ndarray
    KK_t: np.ndarray
    R1_t: np.ndarray
    nablaK_t: np.ndarray
    nablagK_t: np.ndarray
    nablaR_t: np.ndarray
    nablaR1_t: np.ndarray
    tau: np.ndarray
    nabla_tau: np.ndarray  # nabla_tau[i, j] = (nabla_{e_i} tau)(e_j)
    E: np.ndarray
    frame: np.ndarray      # columns: g-orthonormal frame (Gram-Schmidt, index order)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def frak_t(self) -> np.ndarray:
        return 0.5 * (self.Rt + self.R_star)

    def ip(self, a, b) -> float:
        return float(a @ self.g @ b)

    def norm_sq(self, a) -> float:
        return self.ip(a, a)

    def K(self, X, Y):
        return ev(self.Kt, X, Y)

    def KK(self, X, Y, Z):
        """``[K_X, K_Y] Z``."""
        return self.K(X, self.K(Y, Z)) - self.K(Y, self.K(X, Z))

    def R(self, X, Y, Z):
        return ev(self.Rt, X, Y, Z)

    def Rg(self, X, Y, Z):
        return ev(self.Rg_t, X, Y, Z)

    def R1(self, X, Y, Z):
        return ev(self.R1_t, X, Y, Z)

    def nK(self, Y, X, Z):
        """``nabla K(Y, X, Z) = (nabla_Y K)(X, Z)`` for the statistical connection."""
        return ev(self.nablaK_t, X, Z, Y)

    def ngK(self, Y, X, Z):
        """``(nabla^g_Y K)(X, Z)``."""
        return ev(self.nablagK_t, X, Z, Y)

    def nR(self, Z, X, Y, W):
        """``(nabla_Z R)(X, Y) W``."""
        return ev(self.nablaR_t, X, Y, W, Z)

    def nR1(self, Y, A, B, C):
        """``(nabla_Y R1)(A, B, C)``."""
        return ev(self.nablaR1_t, A, B, C, Y)


@functools.lru_cache(maxsize=512)
def _bundle_cached(s: StatisticalStructure, key: tuple) -> CurvatureBundle:
    x = np.array(key, dtype=float)
    s.domain.require(x)
    STAT, LC, CONJ = (ConnectionKind.STATISTICAL, ConnectionKind.LEVI_CIVITA,
                      ConnectionKind.CONJUGATE)
    g, dg, ddg = _metric_jet(s, x)
    ginv = np.linalg.inv(g)
    Gg = levi_civita_symbols(g, dg, ginv)
    dGg = levi_civita_symbols_derivative(g, dg, ddg, ginv)
    K, dK = _k_jet(s, x)
    G, Gs = Gg + K, Gg - K
    R = curvature_from_symbols(G, dGg + dK)
    Rs = curvature_from_symbols(Gs, dGg - dK)
    Rg = curvature_from_symbols(Gg, dGg)
    KK = np.einsum("ail,ljk->aijk", K, K) - np.einsum("ajl,lik->aijk", K, K)
    Rlow = np.einsum("cz,cbxy->bxyz", g, R)
    R1 = 0.5 * np.einsum("ab,bxyz->axyz", ginv, Rlow)
    nablaK = covariant_derivative(K, dK, G)
    nablagK = covariant_derivative(K, dK, Gg)
    dR = de.partials(lambda y: _curvature(s, y, STAT), x, s.deriv, s.domain)
    nablaR = covariant_derivative(R, dR, G)
    dR1 = de.partials(lambda y: _r1_field(s, y), x, s.deriv, s.domain)
    nablaR1 = covariant_derivative(R1, dR1, G)
    tau = np.einsum("aia->i", K)
    dtau = de.partials(lambda y: _tau_field(s, y), x, s.deriv, s.domain)
    nabla_tau = covariant_derivative(tau, dtau, G, n_upper=0).T
    E = np.einsum("ij,kij->k", ginv, K)
    frame = np.column_stack(gram_schmidt(np.eye(s.n), g))
    arrays = [np.asarray(a, dtype=float) for a in
              (x, g, ginv, K, Gg, G, Gs, R, Rs, Rg, KK, R1, nablaK, nablagK, nablaR,
               nablaR1, tau, nabla_tau, E, frame)]
    for a in arrays:
        a.setflags(write=False)
    return CurvatureBundle(*arrays)


def bundle(s: StatisticalStructure, x) -> CurvatureBundle:
    """Base tensors at ``x`` (cached per structure and point)."""
    return _bundle_cached(s, tuple(float(v) for v in np.asarray(x, dtype=float)))


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def _base(s, comp, variance):
    return DenseTensor(comp, Frame.base(s.n), variance)


def metric(s: StatisticalStructure, x) -> DenseTensor:
    return _base(s, bundle(s, x).g, (LOW, LOW))


def christoffel(s: StatisticalStructure, x, kind: ConnectionKind) -> DenseTensor:
    b = bundle(s, x)
    comp = {ConnectionKind.LEVI_CIVITA: b.Gamma_g, ConnectionKind.STATISTICAL: b.Gamma,
            ConnectionKind.CONJUGATE: b.Gamma_star}[kind]
    return _base(s, comp, (UP, LOW, LOW))


def curvature(s: StatisticalStructure, x, kind: ConnectionKind) -> DenseTensor:
    b = bundle(s, x)
    comp = {ConnectionKind.LEVI_CIVITA: b.Rg_t, ConnectionKind.STATISTICAL: b.Rt,
            ConnectionKind.CONJUGATE: b.R_star}[kind]
    return _base(s, comp, (UP, LOW, LOW, LOW))


def curvature_via_difference_tensor(s: StatisticalStructure, x) -> DenseTensor:
    """R assembled as R^g + (nabla^g_X K)_Y - (nabla^g_Y K)_X + [K_X, K_Y]."""
    b = bundle(s, x)
    # nablagK[a, j, k, i] = ((nabla^g_i K)(e_j, e_k))^a
    dK = b.nablagK_t.transpose(0, 3, 1, 2)  # [a, i, j, k] = ((nabla^g_i K)_j e_k)^a
    comp = b.Rg_t + dK - dK.transpose(0, 2, 1, 3) + b.KK_t
    return _base(s, comp, (UP, LOW, LOW, LOW))


def curvature_via_statistical_derivative(s: StatisticalStructure, x) -> DenseTensor:
    """R assembled as R^g + (nabla_X K)_Y - (nabla_Y K)_X - [K_X, K_Y]."""
    b = bundle(s, x)
    dK = b.nablaK_t.transpose(0, 3, 1, 2)
    comp = b.Rg_t + dK - dK.transpose(0, 2, 1, 3) - b.KK_t
    return _base(s, comp, (UP, LOW, LOW, LOW))


def bracket_KK(s: StatisticalStructure, x) -> DenseTensor:
    return _base(s, bundle(s, x).KK_t, (UP, LOW, LOW, LOW))


def frak_R(s: StatisticalStructure, x) -> DenseTensor:
    return _base(s, bundle(s, x).frak_t, (UP, LOW, LOW, LOW))


@dataclass(frozen=True)
class KoszulForms:
    tau: DenseTensor
    nabla_tau: DenseTensor
    E: DenseTensor


def koszul_forms(s: StatisticalStructure, x) -> KoszulForms:
    b = bundle(s, x)
    return KoszulForms(_base(s, b.tau, (LOW,)), _base(s, b.nabla_tau, (LOW, LOW)),
                       _base(s, b.E, (UP,)))


def nabla_tau_from_trace(s: StatisticalStructure, x) -> np.ndarray:
    """Second Koszul form as the trace ``tr nabla K(X, Y, .)``."""
    b = bundle(s, x)
    # nablaK[a, j, c, i] = ((nabla_i K)(e_j, e_c))^a ; trace over a = c
    return np.einsum("ajai->ij", b.nablaK_t)


@dataclass(frozen=True)
class RicciFamily:
    Ric: DenseTensor
    Ric_star: DenseTensor
    Ric_g: DenseTensor
    Ric_K: DenseTensor
    frak_Ric: DenseTensor


def _ricci(Rt):
    return np.einsum("aajk->jk", Rt)


def ricci_family(s: StatisticalStructure, x) -> RicciFamily:
    b = bundle(s, x)
    ric, rics = _ricci(b.Rt), _ricci(b.R_star)
    t = (LOW, LOW)
    return RicciFamily(_base(s, ric, t), _base(s, rics, t), _base(s, _ricci(b.Rg_t), t),
                       _base(s, _ricci(b.KK_t), t), _base(s, 0.5 * (ric + rics), t))


def ricci_K_closed_form(s: StatisticalStructure, x) -> np.ndarray:
    """``Ric^K(X, Y) = tau(K(X, Y)) - g(K_X, K_Y)``."""
    b = bundle(s, x)
    return np.einsum("l,lij->ij", b.tau, b.Kt) - np.einsum("ail,lja->ij", b.Kt, b.Kt)


_COLLINEAR_SIN = 1e-8


def orthonormal_pair(b: CurvatureBundle, X, Y):
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    nx, ny = np.sqrt(b.norm_sq(X)), np.sqrt(b.norm_sq(Y))
    if nx == 0 or ny == 0:
        raise CollinearError("zero vector does not span a plane")
    # sine of the angle as the relative size of Y's component orthogonal to X
    w = Y - (b.ip(X, Y) / (nx * nx)) * X
    if np.sqrt(max(0.0, b.norm_sq(w))) / ny < _COLLINEAR_SIN:
        raise CollinearError("X and Y are collinear")
    e1, e2 = gram_schmidt([X, Y], b.g)
    return e1, e2


def sectional(s: StatisticalStructure, x, plane, kind: SectionalKind = SectionalKind.RIEMANNIAN):
    b = bundle(s, x)
    e1, e2 = orthonormal_pair(b, *plane)
    T = {SectionalKind.RIEMANNIAN: b.Rg_t, SectionalKind.KCURV: b.KK_t,
         SectionalKind.FRAK: b.frak_t}[kind]
    return b.ip(ev(T, e1, e2, e2), e1)


def norms_K_tau(b: CurvatureBundle) -> tuple[float, float]:
    """``(||K||^2, ||tau||^2)`` with every slot measured by g."""
    return (metric_norm_sq(b.Kt, (UP, LOW, LOW), b.g, b.ginv),
            metric_norm_sq(b.tau, (LOW,), b.g, b.ginv))


def scalars(s: StatisticalStructure, x) -> tuple[float, float]:
    """``(rho, rho_g)``: trace of the statistical Ricci tensor and of Ric^g."""
    b = bundle(s, x)
    rho = float(np.einsum("ij,ij->", b.ginv, _ricci(b.Rt)))
    rho_g = float(np.einsum("ij,ij->", b.ginv, _ricci(b.Rg_t)))
    return rho, rho_g


@dataclass(frozen=True)
class Classification:
    trivial: bool
    conjugate_symmetric: bool
    hessian: bool

    def as_tuple(self) -> tuple[bool, bool, bool]:
        return (self.trivial, self.conjugate_symmetric, self.hessian)


def classify(s: StatisticalStructure, sample, tol: float = 1e-7) -> Classification:
    pts = list(sample)
    if not pts:
        raise ValueError("classify needs a nonempty sample")
    k = rs = r = 0.0
    for x in pts:
        b = bundle(s, x)
        k = max(k, float(np.linalg.norm(b.Kt)))
        rs = max(rs, float(np.linalg.norm(b.Rt - b.R_star)))
        r = max(r, float(np.linalg.norm(b.Rt)))
    return Classification(k <= tol, rs <= tol, r <= tol)
