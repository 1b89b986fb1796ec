"""Built-in statistical structures with analytically known behaviour.

Providers are written with plain arithmetic and numpy ufuncs so that they
accept dual-number points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffengine import DUAL, Box, DerivativeConfig
from .errors import ConfigError
from .statmanifold import Classification, StatisticalStructure

IDS = ("euclid_trivial", "paper_hessian", "round_sphere2", "gaussian_fisher", "torus_bump")


@dataclass(frozen=True)
class GalleryEntry:
    id: str
    structure: StatisticalStructure
    known_flags: Classification
    notes: str


def _zeros3(n):
    return lambda x: np.zeros((n, n, n))


def _check_dim(n):
    if n not in (2, 3, 4):
        raise ConfigError(f"dimension must be 2, 3 or 4, got {n}")


def euclid_trivial(n: int = 3, deriv: DerivativeConfig = DUAL) -> GalleryEntry:
    """Flat metric, zero difference tensor."""
    _check_dim(n)
    s = StatisticalStructure(n, Box((-2.0,) * n, (2.0,) * n),
                             lambda x: np.eye(n), _zeros3(n), deriv, f"euclid_trivial{n}")
    return GalleryEntry("euclid_trivial", s, Classification(True, True, True),
                        "identity metric on a cube, K = 0")


def paper_hessian(n: int = 3, deriv: DerivativeConfig = DUAL) -> GalleryEntry:
    """Flat metric with K(e_i, e_i) = -e_i / x_i; the statistical connection is flat."""
    _check_dim(n)

    def K(x):
        out = np.zeros((n, n, n), dtype=np.asarray(x).dtype)
        for i in range(n):
            out[i, i, i] = -1.0 / x[i]
        return out

    s = StatisticalStructure(n, Box((0.5,) * n, (3.0,) * n), lambda x: np.eye(n), K, deriv,
                             f"paper_hessian{n}")
    return GalleryEntry("paper_hessian", s, Classification(False, True, True),
                        "diagonal K with eigenvalues -1/x_i on the positive orthant")


def round_sphere2(deriv: DerivativeConfig = DUAL) -> GalleryEntry:
    """Unit two-sphere in stereographic coordinates, K = 0."""

    def g(x):
        c = 4.0 / (1.0 + x[0] * x[0] + x[1] * x[1]) ** 2
        return np.array([[c, 0.0 * c], [0.0 * c, c]])

    s = StatisticalStructure(2, Box((-2.0, -2.0), (2.0, 2.0)), g, _zeros3(2), deriv,
                             "round_sphere2")
    return GalleryEntry("round_sphere2", s, Classification(True, True, False),
                        "stereographic chart of the unit sphere, curvature +1")


def gaussian_fisher(alpha: float = 1.0, deriv: DerivativeConfig = DUAL) -> GalleryEntry:
    """Univariate normal family in (mu, sigma) with the alpha-connection.

    Fisher metric ``diag(1/s^2, 2/s^2)``; skewness tensor ``T_mms = 2/s^3``,
    ``T_sss = 8/s^3``; ``K = -(alpha/2) g^{-1} T``.
    """
    if not -1.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [-1, 1], got {alpha}")

    def g(x):
        s2 = x[1] * x[1]
        return np.array([[1.0 / s2, 0.0 / s2], [0.0 / s2, 2.0 / s2]])

    def K(x):
        s = x[1]
        c = -0.5 * alpha
        out = np.zeros((2, 2, 2), dtype=np.asarray(x).dtype)
        # raise T with g^{-1} = diag(s^2, s^2/2)
        out[0, 0, 1] = out[0, 1, 0] = c * 2.0 / s
        out[1, 0, 0] = c * 1.0 / s
        out[1, 1, 1] = c * 4.0 / s
        return out

    st = StatisticalStructure(2, Box((-1.0, 0.5), (1.0, 2.0)), g, K, deriv,
                              f"gaussian_fisher(alpha={alpha:g})")
    trivial = alpha == 0.0
    # curvature -(1 - alpha^2)/2: flat exactly at alpha = +-1
    flags = Classification(trivial, True, abs(alpha) == 1.0)
    return GalleryEntry("gaussian_fisher", st, flags,
                        "normal family, Fisher metric with the alpha-connection")


TORUS_AMPLITUDE = 0.1


def torus_bump(n: int = 3, deriv: DerivativeConfig = DUAL,
               c: float = TORUS_AMPLITUDE) -> GalleryEntry:
    """Periodic metric ``e^{2u} I + eps cc^T`` with a periodic cubic-form K on one period box.

    ``u = 0.1 sum sin x_i``, ``c_i = cos x_i``, ``eps = 0.1``; the cubic form
    ``C_ijk = c sin(x_i + x_j + x_k)`` is totally symmetric and ``K = g^{-1} C``.
    """
    _check_dim(n)
    eps = 0.1

    def parts(x):
        u = 0.0
        for i in range(n):
            u = u + 0.1 * np.sin(x[i])
        w = np.exp(2.0 * u)
        cv = np.array([np.cos(x[i]) for i in range(n)])
        return w, cv

    def g(x):
        w, cv = parts(x)
        return w * np.eye(n) + eps * np.outer(cv, cv)

    def ginv(x):
        # Sherman-Morrison keeps the dual-number path cheap
        w, cv = parts(x)
        denom = 1.0 + eps * (cv @ cv) / w
        return (np.eye(n) - (eps / w) * np.outer(cv, cv) / denom) / w

    def K(x):
        C = np.empty((n, n, n), dtype=np.asarray(x).dtype)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    C[i, j, k] = c * np.sin(x[i] + x[j] + x[k])
        return np.einsum("al,lij->aij", ginv(x), C)

    st = StatisticalStructure(n, Box((0.0,) * n, (2 * np.pi,) * n), g, K, deriv,
                              f"torus_bump{n}")
    return GalleryEntry("torus_bump", st, Classification(False, False, False),
                        "periodic bumped metric with a small periodic cubic form")


def make(id: str, n: int = 3, alpha: float = 1.0,
         deriv: DerivativeConfig = DUAL) -> GalleryEntry:
    """Build a gallery entry by id; ``n`` and ``alpha`` are used where they apply."""
    if id == "euclid_trivial":
        return euclid_trivial(n, deriv)
    if id == "paper_hessian":
        return paper_hessian(n, deriv)
    if id == "round_sphere2":
        return round_sphere2(deriv)
    if id == "gaussian_fisher":
        return gaussian_fisher(alpha, deriv)
    if id == "torus_bump":
        return torus_bump(n, deriv)
    raise ConfigError(f"unknown structure {id!r}; choose from {', '.join(IDS)}")


def default_entries(n: int = 3) -> list[GalleryEntry]:
    """One entry per gallery id, as used by the test suites."""
    return [euclid_trivial(n), paper_hessian(n), round_sphere2(), gaussian_fisher(1.0),
            torus_bump(n)]
