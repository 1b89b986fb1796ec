"""Forward-mode derivatives of chart functions.

Providers are plain Python callables ``f(x) -> array`` written with ordinary
arithmetic and numpy ufuncs (``np.sin``, ``np.exp``, ...).  Called with an
object array of :class:`Dual` entries they propagate exact first-order
perturbations; because every seeding pass uses a fresh, larger tag, the
passes nest to any depth without perturbation confusion.  Second
derivatives come from seeding two tags at once (hyper-dual numbers).

A central finite-difference mode with the same interface exists for
cross-checking.
"""

from __future__ import annotations

import contextvars
import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

_tags = itertools.count(1)
# nesting level of finite-difference evaluations in progress
_fd_depth = contextvars.ContextVar("fd_depth", default=0)


class Dual:
    """``re + du * eps`` with ``eps**2 = 0``; ``re`` and ``du`` may be older-tag duals."""

    __slots__ = ("tag", "re", "du")

    def __init__(self, tag: int, re, du):
        self.tag = tag
        self.re = re
        self.du = du

    def __repr__(self):
        return f"Dual[{self.tag}]({self.re!r}, {self.du!r})"

    # arithmetic -----------------------------------------------------------
    def __add__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        t = _top(self, o)
        a, da = _split(self, t)
        b, db = _split(o, t)
        return _make(t, a + b, da + db)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        t = _top(self, o)
        a, da = _split(self, t)
        b, db = _split(o, t)
        return _make(t, a - b, da - db)

    def __rsub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        t = _top(self, o)
        a, da = _split(self, t)
        b, db = _split(o, t)
        return _make(t, b - a, db - da)

    def __mul__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        t = _top(self, o)
        a, da = _split(self, t)
        b, db = _split(o, t)
        return _make(t, a * b, a * db + da * b)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        t = _top(self, o)
        a, da = _split(self, t)
        b, db = _split(o, t)
        q = a / b
        return _make(t, q, (da - q * db) / b)

    def __rtruediv__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        t = _top(self, o)
        a, da = _split(self, t)
        b, db = _split(o, t)
        q = b / a
        return _make(t, q, (db - q * da) / a)

    def __neg__(self):
        return Dual(self.tag, -self.re, -self.du)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if primal(self) < 0 else self

    def __pow__(self, p):
        if isinstance(p, Dual):
            return (p * self.log()).exp()
        if p == 0:
            return 1.0
        if p == 1:
            return self
        if p == 2:
            return self * self
        return Dual(self.tag, self.re ** p, p * self.re ** (p - 1) * self.du)

    def __rpow__(self, base):
        return (self * math.log(base)).exp()

    # elementary functions: numpy ufuncs on object arrays dispatch here ------
    def sin(self):
        return Dual(self.tag, _fn("sin", self.re), _fn("cos", self.re) * self.du)

    def cos(self):
        return Dual(self.tag, _fn("cos", self.re), -_fn("sin", self.re) * self.du)

    def tan(self):
        c = _fn("cos", self.re)
        return Dual(self.tag, _fn("tan", self.re), self.du / (c * c))

    def exp(self):
        e = _fn("exp", self.re)
        return Dual(self.tag, e, e * self.du)

    def log(self):
        return Dual(self.tag, _fn("log", self.re), self.du / self.re)

    def sqrt(self):
        s = _fn("sqrt", self.re)
        return Dual(self.tag, s, self.du / (2.0 * s))

    def tanh(self):
        th = _fn("tanh", self.re)
        return Dual(self.tag, th, (1.0 - th * th) * self.du)

    def sinh(self):
        return Dual(self.tag, _fn("sinh", self.re), _fn("cosh", self.re) * self.du)

    def cosh(self):
        return Dual(self.tag, _fn("cosh", self.re), _fn("sinh", self.re) * self.du)

    def arctan(self):
        return Dual(self.tag, _fn("arctan", self.re), self.du / (1.0 + self.re * self.re))

    def conjugate(self):
        return self

    # comparisons look at the primal value only
    def __lt__(self, o):
        return primal(self) < primal(o)

    def __le__(self, o):
        return primal(self) <= primal(o)

    def __gt__(self, o):
        return primal(self) > primal(o)

    def __ge__(self, o):
        return primal(self) >= primal(o)


def _fn(name, v):
    if isinstance(v, Dual):
        return getattr(v, name)()
    return getattr(math, name if name != "arctan" else "atan")(v)


def _top(a, b):
    ta = a.tag if isinstance(a, Dual) else 0
    tb = b.tag if isinstance(b, Dual) else 0
    return ta if ta > tb else tb


def _split(a, tag):
    if isinstance(a, Dual) and a.tag == tag:
        return a.re, a.du
    return a, 0.0


def _make(tag, re, du):
    return Dual(tag, re, du)


def primal(v):
    """Strip every perturbation layer and return the underlying float."""
    while isinstance(v, Dual):
        v = v.re
    return v


def _tangent(v, tag):
    if isinstance(v, Dual) and v.tag == tag:
        return v.du
    return 0.0


def _value(v, tag):
    if isinstance(v, Dual) and v.tag == tag:
        return v.re
    return v


def _map(fn, arr):
    arr = np.asarray(arr, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = fn(v)
    return tidy(out)


def tidy(arr):
    """Return a float array when no dual entries remain, else an object array."""
    arr = np.asarray(arr)
    if arr.dtype != object:
        return arr.astype(float)
    if all(not isinstance(v, Dual) for v in arr.flat):
        return arr.astype(float)
    return arr


def primal_array(arr) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype != object:
        return arr.astype(float)
    return np.array([primal(v) for v in arr.flat], dtype=float).reshape(arr.shape)


class DerivMode(enum.Enum):
    DUAL = "dual"
    FD = "fd"


@dataclass(frozen=True)
class DerivativeConfig:
    mode: DerivMode = DerivMode.DUAL
    fd_step: float = 1e-5
    fd_order: int = 4

    def __post_init__(self):
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")
        if self.fd_order not in (2, 4):
            raise ValueError("fd_order must be 2 or 4")

    @classmethod
    def parse(cls, mode: str, **kw) -> DerivativeConfig:
        return cls(mode=DerivMode(mode), **kw)


DUAL = DerivativeConfig()

FieldProvider = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Box:
    """Axis-aligned chart domain ``lo <= x <= hi``."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.lo)

    def contains(self, x, margin: float = 0.0) -> bool:
        p = primal_array(x)
        return bool(np.all(p >= np.asarray(self.lo) + margin)
                    and np.all(p <= np.asarray(self.hi) - margin))

    def require(self, x, margin: float = 0.0):
        p = primal_array(x)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        bad = np.nonzero((p < lo + margin) | (p > hi - margin))[0]
        if bad.size:
            i = int(bad[0])
            raise DomainError(
                f"coordinate x[{i}] = {float(p[i])!r} outside [{lo[i] + margin}, {hi[i] - margin}]")


def _as_point(x):
    x = np.asarray(x)
    if x.dtype != object:
        x = x.astype(float)
    return x


def partials(f: FieldProvider, x, config: DerivativeConfig = DUAL, domain: Box | None = None):
    """All first partials of ``f`` at ``x``; the derivative index is the last axis."""
    x = _as_point(x)
    n = x.shape[0]
    if config.mode is DerivMode.DUAL:
        if domain is not None:
            domain.require(x)
        cols = []
        for m in range(n):
            tag = next(_tags)
            xd = x.astype(object)
            xd[m] = Dual(tag, x[m], 1.0)
            cols.append(_map(lambda v: _tangent(v, tag), f(xd)))
        return tidy(np.stack(cols, axis=-1))
    depth = _fd_depth.get()
    h = fd_step_at(config.fd_step, depth)
    if domain is not None:
        domain.require(x, margin=2 * h)
    token = _fd_depth.set(depth + 1)
    try:
        return _fd_columns(f, x, h, config.fd_order)
    finally:
        _fd_depth.reset(token)


def fd_step_at(step: float, depth: int) -> float:
    """Step used by a difference quotient nested ``depth`` levels inside others.

    Rounding noise of nested quotients scales with the product of their steps,
    so inner levels take ``step ** (1 / (depth + 1))``.
    """
    return step ** (1.0 / (depth + 1))


def _fd_columns(f, x, h, order):
    n = x.shape[0]
    cols = []
    for m in range(n):
        e = np.zeros(n)
        e[m] = h
        if order == 2:
            d = (_eval(f, x + e) - _eval(f, x - e)) / (2 * h)
        else:
            d = (-_eval(f, x + 2 * e) + 8 * _eval(f, x + e)
                 - 8 * _eval(f, x - e) + _eval(f, x - 2 * e)) / (12 * h)
        cols.append(d)
    return tidy(np.stack(cols, axis=-1))


def _eval(f, x):
    out = np.asarray(f(x))
    return out if out.dtype == object else out.astype(float)


def jet2(f: FieldProvider, x, config: DerivativeConfig = DUAL, domain: Box | None = None):
    """Value, first partials and second partials of ``f`` at ``x``.

    In dual mode each unordered pair (i, j) costs one hyper-dual pass; the
    Hessian block is symmetric by construction.
    """
    x = _as_point(x)
    n = x.shape[0]
    if config.mode is DerivMode.FD:
        val = _eval(f, x)
        d1 = partials(f, x, config, domain)
        d2 = partials(lambda y: partials(f, y, config), x, config, domain)
        d2 = 0.5 * (d2 + np.swapaxes(d2, -1, -2))
        return tidy(val), d1, tidy(d2)
    if domain is not None:
        domain.require(x)
    val = None
    d1 = [None] * n
    d2 = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            t1 = next(_tags)
            t2 = next(_tags)
            xd = x.astype(object)
            xd[i] = Dual(t1, xd[i], 1.0)
            xd[j] = Dual(t2, xd[j], 1.0)
            # f = a + b e1 + c e2 + d e1 e2, with e2 the outermost perturbation
            out = np.asarray(f(xd), dtype=object)
            lo = _map(lambda v: _value(v, t2), out)
            hi = _map(lambda v: _tangent(v, t2), out)
            if i == j:
                val = _map(lambda v: _value(v, t1), lo)
                d1[i] = _map(lambda v: _tangent(v, t1), lo)
            dij = _map(lambda v: _tangent(v, t1), hi)
            d2[i][j] = dij
            d2[j][i] = dij
    d1 = tidy(np.stack(d1, axis=-1))
    d2 = tidy(np.stack([np.stack(row, axis=-1) for row in d2], axis=-2))
    return tidy(val), d1, d2


def second_partials(f: FieldProvider, x, config: DerivativeConfig = DUAL,
                    domain: Box | None = None):
    """Second partials, the two derivative indices appended last (symmetric)."""
    return jet2(f, x, config, domain)[2]


def inv(a):
    """Matrix inverse that also works on object arrays of duals (Gauss-Jordan)."""
    a = np.asarray(a)
    if a.dtype != object:
        return np.linalg.inv(a.astype(float))
    n = a.shape[0]
    m = np.concatenate([a.astype(object), np.eye(n, dtype=object) * 1.0], axis=1)
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(primal(m[r, c])))
        if piv != c:
            m[[c, piv]] = m[[piv, c]]
        m[c] = m[c] / m[c, c]
        for r in range(n):
            if r != c:
                m[r] = m[r] - m[r, c] * m[c]
    return tidy(m[:, n:])
