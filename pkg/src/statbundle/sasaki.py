"""Closed-form geometry of the tangent bundle with the Sasaki lift of (g, K).

Tangent vectors of TM at a point xi are :class:`SplitVector` pairs
``(h, v)`` of base vectors: ``A = h^h + v^v``.  Horizontal lifts use the
statistical connection.  Every quantity here is evaluated from base
tensors (see :class:`statbundle.statmanifold.CurvatureBundle`); the
coordinate oracle in :mod:`statbundle.tmoracle` checks them independently.

Adapted-frame arrays order the 2n slots as ``(e_1^h, ..., e_n^h, e_1^v, ..., e_n^v)``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ClassificationError, NormalizationError
from .statmanifold import CurvatureBundle, StatisticalStructure, bundle, classify
from .tensorcore import LOW, DenseTensor, Frame, ev

H, V = "h", "v"


@dataclass(frozen=True)
class TangentPoint:
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        xi = np.array(self.xi, dtype=float)
        if x.shape != xi.shape or x.ndim != 1:
            raise ValueError(f"x and xi must be n-vectors, got {x.shape} and {xi.shape}")
        x.setflags(write=False)
        xi.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def z(self) -> np.ndarray:
        """Point of the induced chart on TM, ``(x, xi)``."""
        return np.concatenate([self.x, self.xi])


@dataclass(frozen=True)
class SplitVector:
    """``h^h + v^v`` with ``h`` and ``v`` base-frame component vectors."""

    h: np.ndarray
    v: np.ndarray

    @classmethod
    def zero(cls, n: int) -> SplitVector:
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def lift(cls, kind: str, X) -> SplitVector:
        X = np.asarray(X, dtype=float)
        z = np.zeros_like(X)
        if kind == H:
            return cls(X, z)
        if kind == V:
            return cls(z, X)
        raise ValueError(f"lift kind must be 'h' or 'v', got {kind!r}")

    @classmethod
    def from_array(cls, a) -> SplitVector:
        a = np.asarray(a, dtype=float)
        n = a.shape[0] // 2
        return cls(a[:n], a[n:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.h, self.v])

    def __add__(self, o: SplitVector) -> SplitVector:
        return SplitVector(self.h + o.h, self.v + o.v)

    def __sub__(self, o: SplitVector) -> SplitVector:
        return SplitVector(self.h - o.h, self.v - o.v)

    def __mul__(self, c: float) -> SplitVector:
        return SplitVector(c * self.h, c * self.v)

    __rmul__ = __mul__

    def __neg__(self) -> SplitVector:
        return SplitVector(-self.h, -self.v)


def inner(b: CurvatureBundle, A: SplitVector, B: SplitVector) -> float:
    """Sasaki inner product ``g(h1, h2) + g(v1, v2)``."""
    return b.ip(A.h, B.h) + b.ip(A.v, B.v)


def adapted_basis(n: int) -> list[tuple[str, np.ndarray]]:
    """Coordinate lifts in adapted-frame order."""
    e = np.eye(n)
    return [(H, e[i]) for i in range(n)] + [(V, e[i]) for i in range(n)]


def lift_metric(s: StatisticalStructure, tp: TangentPoint) -> DenseTensor:
    g = bundle(s, tp.x).g
    z = np.zeros_like(g)
    return DenseTensor(np.block([[g, z], [z, g]]), Frame.adapted(s.n), (LOW, LOW))


# --------------------------------------------------------------------------
# auxiliary tensors
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AuxTensors:
    """``R1`` and the slices ``R2(U, W)``, ``R3(V, W)``, ``R4(V)`` at one point."""

    b: CurvatureBundle

    def R1(self, X, Y, Z):
        return self.b.R1(X, Y, Z)

    def R2(self, U, W) -> np.ndarray:
        """Matrix of ``V -> R(V, U) W`` (columns are images of coordinate vectors)."""
        return np.einsum("aijk,j,k->ai", self.b.Rt, U, W)

    def R3(self, V, W) -> np.ndarray:
        """``(X, Y) -> g(R(X, Y) V, W)`` as a matrix over coordinate vectors."""
        return np.einsum("aijk,k,ab,b->ij", self.b.Rt, V, self.b.g, W)

    def R4(self, V) -> np.ndarray:
        """``(X, Y) -> R(X, Y) V`` as ``[a, i, j]``."""
        return np.tensordot(self.b.Rt, V, axes=([3], [0]))

    def norm_R4_sq(self, V) -> float:
        """``sum_{i,j} ||R(e_i, e_j) V||^2`` over an orthonormal frame (full double sum)."""
        b = self.b
        F = b.frame
        total = 0.0
        for i in range(b.n):
            for j in range(b.n):
                w = b.R(F[:, i], F[:, j], V)
                total += b.norm_sq(w)
        return total


def aux(s: StatisticalStructure, where) -> AuxTensors:
    """Auxiliary tensors at a base point or at the base point of a :class:`TangentPoint`."""
    x = where.x if isinstance(where, TangentPoint) else where
    return AuxTensors(bundle(s, x))


def norm_R4_sq(b: CurvatureBundle, xi) -> float:
    """Vectorised ``||R4(xi)||^2`` (full double sum, every slot measured by g)."""
    R4 = np.tensordot(b.Rt, xi, axes=([3], [0]))            # [a, i, j]
    low = np.einsum("ab,bij->aij", b.g, R4)
    return float(np.einsum("aij,akl,ik,jl->", low, R4, b.ginv, b.ginv))


# --------------------------------------------------------------------------
# Levi-Civita connection on lifted coordinate fields
# --------------------------------------------------------------------------

def tnabla(s: StatisticalStructure, tp: TangentPoint, a: str, X, c: str, Y) -> SplitVector:
    """``nabla^{g~}_{X^a} Y^c`` for lifts of the constant-coefficient fields X, Y."""
    b = bundle(s, tp.x)
    xi = tp.xi
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    LC = ev(b.Gamma_g, X, Y)
    if (a, c) == (H, H):
        return SplitVector(LC, -0.5 * b.R(X, Y, xi))
    if (a, c) == (H, V):
        return SplitVector(-b.R1(X, xi, Y), LC)
    if (a, c) == (V, H):
        return SplitVector(-b.R1(Y, xi, X), -b.K(Y, X))
    if (a, c) == (V, V):
        return SplitVector(b.K(X, Y), np.zeros_like(X))
    raise ValueError(f"bad slot types {a!r}, {c!r}")


def tnabla_adapted(s: StatisticalStructure, tp: TangentPoint) -> np.ndarray:
    """``C[al, be, ga]`` = component al of ``nabla_{E_be} E_ga`` in the adapted frame."""
    basis = adapted_basis(s.n)
    m = 2 * s.n
    out = np.zeros((m, m, m))
    for be, (a, X) in enumerate(basis):
        for ga, (c, Y) in enumerate(basis):
            out[:, be, ga] = tnabla(s, tp, a, X, c, Y).as_array()
    return out


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------

def _general(b: CurvatureBundle, xi, a, X, bb, Y, c, Z) -> SplitVector:
    K, R, R1, Rg, KK = b.K, b.R, b.R1, b.Rg, b.KK
    key = a + bb + c
    if key == "vvv":
        return SplitVector(R1(K(X, Z), xi, Y) - R1(K(Y, Z), xi, X), KK(Y, X, Z))
    if key == "vvh":
        r1y, r1x = R1(Z, xi, Y), R1(Z, xi, X)
        return SplitVector(Rg(X, Y, Z) + R1(r1y, xi, X) - R1(r1x, xi, Y),
                           K(r1y, X) - K(r1x, Y))
    if key == "vhh":
        r1 = R1(Z, xi, X)
        v = -0.5 * R(Y, Z, X) + KK(X, Y, Z) + b.nK(Y, X, Z) - 0.5 * R(Y, r1, xi)
        h = (-0.5 * K(X, R(Y, Z, xi)) + R1(K(Y, Z), xi, X) + b.nR1(Y, Z, xi, X)
             - K(Y, r1) - R1(Y, xi, K(X, Z)))
        return SplitVector(h, v)
    if key == "vhv":
        r1 = R1(Y, xi, Z)
        v = K(r1, X) + 0.5 * R(Y, K(X, Z), xi)
        h = KK(Y, X, Z) + R1(r1, xi, X) - R1(Y, X, Z) - b.nK(Y, X, Z)
        return SplitVector(h, v)
    if key == "hhh":
        h = Rg(X, Y, Z) + 0.5 * (R1(X, xi, R(Y, Z, xi)) - R1(Y, xi, R(X, Z, xi))
                                 - 2.0 * R1(Z, xi, R(X, Y, xi)))
        v = 0.5 * (b.nR(Z, X, Y, xi) - R(Y, K(X, Z), xi) + R(X, K(Y, Z), xi)
                   + K(X, R(Y, Z, xi)) - K(Y, R(X, Z, xi)) - 2.0 * K(Z, R(X, Y, xi)))
        return SplitVector(h, v)
    if key == "hhv":
        v = Rg(X, Y, Z) + 0.5 * (R(X, R1(Y, xi, Z), xi) - R(Y, R1(X, xi, Z), xi))
        h = (b.nR1(Y, X, xi, Z) - b.nR1(X, Y, xi, Z) + K(X, R1(Y, xi, Z))
             - K(Y, R1(X, xi, Z)) + K(R(X, Y, xi), Z) + R1(X, xi, K(Y, Z))
             - R1(Y, xi, K(X, Z)))
        return SplitVector(h, v)
    # first-pair antisymmetry covers hvh and hvv
    if a == H and bb == V:
        return -_general(b, xi, bb, Y, a, X, c, Z)
    raise ValueError(f"bad slot types {key!r}")


def _conjugate_symmetric(b: CurvatureBundle, xi, a, X, bb, Y, c, Z) -> SplitVector:
    """Curvature written through R alone, valid when R = R*."""
    K, R, Rg, KK = b.K, b.R, b.Rg, b.KK
    key = a + bb + c
    if key == "vvv":
        return SplitVector(0.5 * R(Y, xi, K(X, Z)) - 0.5 * R(X, xi, K(Y, Z)), KK(Y, X, Z))
    if key == "vvh":
        v = 0.5 * K(R(Y, xi, Z), X) - 0.5 * K(R(X, xi, Z), Y)
        h = Rg(X, Y, Z) + 0.25 * R(X, xi, R(Y, xi, Z)) - 0.25 * R(Y, xi, R(X, xi, Z))
        return SplitVector(h, v)
    if key == "vhh":
        v = (-0.5 * R(Y, Z, X) + KK(X, Y, Z) + b.nK(Y, X, Z)
             + 0.25 * R(R(X, xi, Z), Y, xi))
        h = (-0.5 * K(X, R(Y, Z, xi)) + 0.5 * R(X, xi, K(Y, Z)) + 0.5 * b.nR(Y, X, xi, Z)
             - 0.5 * K(Y, R(X, xi, Z)) - 0.5 * R(K(X, Z), xi, Y))
        return SplitVector(h, v)
    if key == "vhv":
        v = 0.5 * K(R(Z, xi, Y), X) + 0.5 * R(Y, K(X, Z), xi)
        h = (KK(Y, X, Z) + 0.25 * R(X, xi, R(Z, xi, Y)) - 0.5 * R(Z, X, Y)
             - b.nK(Y, X, Z))
        return SplitVector(h, v)
    if key == "hhh":
        h = (Rg(X, Y, Z) + 0.25 * R(R(Y, Z, xi), xi, X) - 0.25 * R(R(X, Z, xi), xi, Y)
             - 0.5 * R(R(X, Y, xi), xi, Z))
        v = 0.5 * (b.nR(Z, X, Y, xi) - R(Y, K(X, Z), xi) + R(X, K(Y, Z), xi)
                   + K(X, R(Y, Z, xi)) - K(Y, R(X, Z, xi)) - 2.0 * K(Z, R(X, Y, xi)))
        return SplitVector(h, v)
    if key == "hhv":
        v = Rg(X, Y, Z) + 0.25 * (R(X, R(Z, xi, Y), xi) - R(Y, R(Z, xi, X), xi))
        # the last term pairs with R(K(Y,Z), xi)X; see the project notes
        h = 0.5 * (b.nR(Y, Z, xi, X) - b.nR(X, Z, xi, Y) + K(X, R(Z, xi, Y))
                   - K(Y, R(Z, xi, X)) + 2.0 * K(R(X, Y, xi), Z) + R(K(Y, Z), xi, X)
                   - R(K(X, Z), xi, Y))
        return SplitVector(h, v)
    if a == H and bb == V:
        return -_conjugate_symmetric(b, xi, bb, Y, a, X, c, Z)
    raise ValueError(f"bad slot types {key!r}")


def _hessian(b: CurvatureBundle, xi, a, X, bb, Y, c, Z) -> SplitVector:
    """Curvature of a Hessian structure (R = 0): independent of xi."""
    key = a + bb + c
    RgXYZ = b.Rg(X, Y, Z)
    if key in ("vvv", "hhv"):
        return SplitVector.lift(V, RgXYZ)
    if key in ("vvh", "hhh"):
        return SplitVector.lift(H, RgXYZ)
    if key == "vhv":
        return SplitVector.lift(H, -b.nK(Y, X, Z) + RgXYZ)
    if key == "vhh":
        return SplitVector.lift(V, b.nK(Y, X, Z) - RgXYZ)
    if a == H and bb == V:
        return -_hessian(b, xi, bb, Y, a, X, c, Z)
    raise ValueError(f"bad slot types {key!r}")


class SpecialCase(enum.Enum):
    CONJUGATE_SYMMETRIC = "ConjugateSymmetric"
    HESSIAN = "Hessian"


def curvature_tg(s: StatisticalStructure, tp: TangentPoint, A, B, C) -> SplitVector:
    """``R^{g~}(X^a, Y^b) Z^c`` for slots given as ``(kind, vector)`` pairs."""
    (a, X), (bb, Y), (c, Z) = A, B, C
    return _general(bundle(s, tp.x), tp.xi, a, _vec(X), bb, _vec(Y), c, _vec(Z))


def curvature_tg_special(s: StatisticalStructure, tp: TangentPoint, A, B, C,
                         case: SpecialCase, tol: float = 1e-7) -> SplitVector:
    """Specialised curvature formulas; the structure must qualify on a seeded sample."""
    flags = classify(s, s.sample(8, 0) + [tp.x], tol)
    if case is SpecialCase.CONJUGATE_SYMMETRIC:
        if not flags.conjugate_symmetric:
            raise ClassificationError(f"{s.name} is not conjugate symmetric")
        fn = _conjugate_symmetric
    else:
        if not flags.hessian:
            raise ClassificationError(f"{s.name} is not Hessian")
        fn = _hessian
    (a, X), (bb, Y), (c, Z) = A, B, C
    return fn(bundle(s, tp.x), tp.xi, a, _vec(X), bb, _vec(Y), c, _vec(Z))


def _vec(X):
    return np.asarray(X, dtype=float)


def curvature_tg_array(s: StatisticalStructure, tp: TangentPoint,
                       case: SpecialCase | None = None) -> np.ndarray:
    """Full ``[al, be, ga, de]`` array of ``R(E_be, E_ga) E_de`` in the adapted frame."""
    b = bundle(s, tp.x)
    fn = {None: _general, SpecialCase.CONJUGATE_SYMMETRIC: _conjugate_symmetric,
          SpecialCase.HESSIAN: _hessian}[case]
    basis = adapted_basis(s.n)
    m = 2 * s.n
    out = np.zeros((m, m, m, m))
    for (i, (a, X)), (j, (bb, Y)), (k, (c, Z)) in itertools.product(enumerate(basis), repeat=3):
        if i > j:
            out[:, i, j, k] = -out[:, j, i, k]
        elif i < j:
            out[:, i, j, k] = fn(b, tp.xi, a, X, bb, Y, c, Z).as_array()
    return out


# --------------------------------------------------------------------------
# Ricci, scalar, sectional
# --------------------------------------------------------------------------

def ricci_tg(s: StatisticalStructure, tp: TangentPoint, A, B) -> float:
    """``Ric^{g~}(Y^a, Z^b)`` from the closed forms."""
    (a, Y), (bb, Z) = A, B
    Y, Z = _vec(Y), _vec(Z)
    if (a, bb) == (H, V):
        return ricci_tg(s, tp, (bb, Z), (a, Y))
    b = bundle(s, tp.x)
    xi = tp.xi
    if (a, bb) == (H, H):
        frak = 0.5 * (np.einsum("aajk->jk", b.Rt) + np.einsum("aajk->jk", b.R_star))
        R2Y = np.einsum("aijk,j,k->ai", b.Rt, Y, xi)
        R2Z = np.einsum("aijk,j,k->ai", b.Rt, Z, xi)
        return float(Y @ frak @ Z + 0.5 * (Y @ b.nabla_tau @ Z) + 0.5 * (Z @ b.nabla_tau @ Y)
                     - 0.5 * _op_inner(b, R2Y, R2Z))
    if (a, bb) == (V, H):
        # tr_g g((nabla_. R)(., Z) xi, Y)
        div = np.einsum("mi,aizwm,z,w->a", b.ginv, b.nablaR_t, Z, xi)
        R2Z = np.einsum("aijk,j,k->ai", b.Rt, Z, xi)
        KY = np.einsum("aij,i->aj", b.Kt, Y)
        return float(-0.5 * b.ip(div, Y) + _op_inner(b, R2Z, KY))
    if (a, bb) == (V, V):
        ric = np.einsum("aajk->jk", b.Rt)
        rics = np.einsum("aajk->jk", b.R_star)
        R3Y = np.einsum("aijk,k,ab,b->ij", b.Rt, xi, b.g, Y)
        R3Z = np.einsum("aijk,k,ab,b->ij", b.Rt, xi, b.g, Z)
        r3 = float(np.einsum("ij,kl,ik,jl->", R3Y, R3Z, b.ginv, b.ginv))
        return float(0.5 * (Y @ (ric - rics) @ Z) + Y @ b.nabla_tau @ Z + 0.25 * r3)
    raise ValueError(f"bad slot types {a!r}, {bb!r}")


def _op_inner(b: CurvatureBundle, P, Q) -> float:
    """g-inner product of two (1,1) maps given as matrices: ``tr(P^T g Q g^{-1})``."""
    return float(np.einsum("ai,ab,bj,ij->", P, b.g, Q, b.ginv))


def ricci_tg_array(s: StatisticalStructure, tp: TangentPoint) -> np.ndarray:
    basis = adapted_basis(s.n)
    m = 2 * s.n
    out = np.zeros((m, m))
    for i, A in enumerate(basis):
        for j, B in enumerate(basis):
            if j >= i:
                out[i, j] = ricci_tg(s, tp, A, B)
            else:
                out[i, j] = out[j, i]
    return out


def ricci_trace(s: StatisticalStructure, tp: TangentPoint, A, B) -> float:
    """Ricci as the trace of ``curvature_tg`` over the lifted orthonormal 2n-frame."""
    b = bundle(s, tp.x)
    total = 0.0
    for i in range(s.n):
        e = b.frame[:, i]
        for kind in (H, V):
            E = SplitVector.lift(kind, e)
            total += inner(b, curvature_tg(s, tp, (kind, e), A, B), E)
    return total


def scalar_tg(s: StatisticalStructure, tp: TangentPoint) -> float:
    """``rho + 2 tr_g nabla tau - 1/4 ||R4(xi)||^2`` (full double sum)."""
    b = bundle(s, tp.x)
    rho = float(np.einsum("ij,aaij->", b.ginv, b.Rt))
    tr_nt = float(np.einsum("ij,ij->", b.ginv, b.nabla_tau))
    return rho + 2.0 * tr_nt - 0.25 * norm_R4_sq(b, tp.xi)


def scalar_trace(s: StatisticalStructure, tp: TangentPoint) -> float:
    """Scalar curvature as the frame trace of :func:`ricci_tg`."""
    b = bundle(s, tp.x)
    return sum(ricci_tg(s, tp, (kind, b.frame[:, i]), (kind, b.frame[:, i]))
               for i in range(s.n) for kind in (H, V))


_ORTHO_TOL = 1e-9


def sectional_tg(s: StatisticalStructure, tp: TangentPoint, A, B) -> float:
    """Sectional curvature of a g~-orthonormal lifted pair ``(X^a, Y^b)``."""
    (a, X), (bb, Y) = A, B
    X, Y = _vec(X), _vec(Y)
    b = bundle(s, tp.x)
    gram = np.array([[b.norm_sq(X), 0.0], [0.0, b.norm_sq(Y)]])
    if a == bb:
        gram[0, 1] = gram[1, 0] = b.ip(X, Y)
    if np.abs(gram - np.eye(2)).max() > _ORTHO_TOL:
        raise NormalizationError(f"lifted pair is not orthonormal: Gram matrix {gram.tolist()}")
    xi = tp.xi
    if (a, bb) == (V, V):
        return -b.ip(b.KK(X, Y, Y), X)
    if (a, bb) == (H, H):
        return b.ip(b.Rg(X, Y, Y), X) - 0.75 * b.norm_sq(b.R(X, Y, xi))
    if (a, bb) == (H, V):
        X, Y = Y, X
    return b.ip(b.KK(X, Y, Y), X) + b.ip(b.nK(Y, X, Y), X) + b.norm_sq(b.R1(Y, xi, X))


def sectional_from_curvature(s: StatisticalStructure, tp: TangentPoint, A, B) -> float:
    """``g~(R(A, B) B, A)`` from :func:`curvature_tg` (A, B orthonormal)."""
    b = bundle(s, tp.x)
    return inner(b, curvature_tg(s, tp, A, B, B), SplitVector.lift(A[0], A[1]))


def curvature_norm(s: StatisticalStructure, tp: TangentPoint) -> float:
    """Frobenius norm of the closed-form curvature components in the adapted frame."""
    return float(np.linalg.norm(curvature_tg_array(s, tp)))


# --------------------------------------------------------------------------
# almost complex structure and symplectic form
# --------------------------------------------------------------------------

def J(A: SplitVector) -> SplitVector:
    """``J X^v = X^h``, ``J X^h = -X^v``."""
    return SplitVector(A.v, -A.h)


def omega(b: CurvatureBundle, A: SplitVector, B: SplitVector) -> float:
    """``omega(A, B) = g~(J A, B)``, so ``omega(X^v, Y^h) = g(X, Y)``."""
    return inner(b, J(A), B)


def bracket(b: CurvatureBundle, xi, A, B) -> SplitVector:
    """Lie bracket of lifted coordinate fields ``(kind, e_i)``."""
    (a, X), (c, Y) = A, B
    if (a, c) == (V, V):
        return SplitVector.zero(b.n)
    if (a, c) == (H, V):
        return SplitVector.lift(V, ev(b.Gamma, X, Y))
    if (a, c) == (V, H):
        return -bracket(b, xi, B, A)
    return SplitVector.lift(V, -b.R(X, Y, xi))


def _omega_derivative(b: CurvatureBundle, A, B, C) -> float:
    """``A(omega(B, C))``: only horizontal directions differentiate the base metric."""
    (a, X), (bk, Y), (ck, Z) = A, B, C
    if a == V:
        return 0.0
    # omega(Y^v, Z^h) = g(Y, Z), omega(Y^h, Z^v) = -g(Y, Z)
    if (bk, ck) == (V, H):
        sign = 1.0
    elif (bk, ck) == (H, V):
        sign = -1.0
    else:
        return 0.0
    dg_X = np.einsum("ijm,m->ij", _metric_partials(b), X)
    return sign * float(Y @ dg_X @ Z)


def _metric_partials(b: CurvatureBundle) -> np.ndarray:
    """``dg[i, j, m]`` rebuilt from the Levi-Civita symbols: ``d_m g_ij = G_imj + G_jmi``."""
    low = np.einsum("ab,bij->aij", b.g, b.Gamma_g)    # low[a, m, j] = Gamma_{a m j}
    return np.einsum("imj->ijm", low) + np.einsum("jmi->ijm", low)


def d_omega_residual(s: StatisticalStructure, tp: TangentPoint) -> float:
    """Max of ``|d omega|`` over all triples of lifted coordinate fields."""
    b = bundle(s, tp.x)
    xi = tp.xi
    basis = adapted_basis(s.n)
    lift = [SplitVector.lift(k, e) for k, e in basis]
    worst = 0.0
    for i, j, k in itertools.combinations(range(len(basis)), 3):
        A, B, C = basis[i], basis[j], basis[k]
        LA, LB, LC = lift[i], lift[j], lift[k]
        val = (_omega_derivative(b, A, B, C) - _omega_derivative(b, B, A, C)
               + _omega_derivative(b, C, A, B)
               - omega(b, bracket(b, xi, A, B), LC) + omega(b, bracket(b, xi, A, C), LB)
               - omega(b, bracket(b, xi, B, C), LA))
        worst = max(worst, abs(val))
    return worst


def nijenhuis_norm(s: StatisticalStructure, tp: TangentPoint) -> float:
    """Frobenius norm of ``N_J`` on lifted coordinate fields, from the bracket rules."""
    b = bundle(s, tp.x)
    xi = tp.xi
    basis = adapted_basis(s.n)

    def Jfield(A):
        kind, e = A
        # J e^v = e^h, J e^h = -e^v: sign carried separately
        return (H, e, 1.0) if kind == V else (V, e, -1.0)

    total = 0.0
    for A, B in itertools.combinations(basis, 2):
        ka, ea, sa = Jfield(A)
        kb, eb, sb = Jfield(B)
        JA, JB = (ka, ea), (kb, eb)
        N = (sa * sb * bracket(b, xi, JA, JB) - sa * J(bracket(b, xi, JA, B))
             - sb * J(bracket(b, xi, A, JB)) - bracket(b, xi, A, B))
        total += 2.0 * float(np.sum(N.as_array() ** 2))
    return float(np.sqrt(total))


@dataclass(frozen=True)
class ComplexData:
    j_squared_residual: float
    hermitian_residual: float
    d_omega_residual: float


def almost_complex_and_omega(s: StatisticalStructure, tp: TangentPoint) -> ComplexData:
    b = bundle(s, tp.x)
    lifts = [SplitVector.lift(k, e) for k, e in adapted_basis(s.n)]
    jj = max(float(np.abs((J(J(A)) + A).as_array()).max()) for A in lifts)
    herm = max(abs(inner(b, J(A), J(B)) - inner(b, A, B)) for A in lifts for B in lifts)
    return ComplexData(jj, herm, d_omega_residual(s, tp))


def scalar_at_zero(s: StatisticalStructure, x) -> float:
    """``rho + 2 tr_g nabla tau``: the scalar curvature on the zero section."""
    return scalar_tg(s, TangentPoint(x, np.zeros(s.n)))


__all__ = [
    "H", "V", "TangentPoint", "SplitVector", "AuxTensors", "SpecialCase", "ComplexData",
    "inner", "adapted_basis", "lift_metric", "aux", "norm_R4_sq", "tnabla", "tnabla_adapted",
    "curvature_tg", "curvature_tg_special", "curvature_tg_array", "ricci_tg",
    "ricci_tg_array", "ricci_trace", "scalar_tg", "scalar_trace", "sectional_tg",
    "sectional_from_curvature", "curvature_norm", "J", "omega", "bracket",
    "d_omega_residual", "nijenhuis_norm", "almost_complex_and_omega", "scalar_at_zero",
]
