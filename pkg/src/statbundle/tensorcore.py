"""Dense multi-index tensors with frame and variance tags.

Index layout used throughout the package
----------------------------------------
* metric ``g[i, j] = g(e_i, e_j)``
* a (1,k) tensor ``T[a, i1, ..., ik]`` is the ``a``-th component of
  ``T(e_i1, ..., e_ik)``; in particular the curvature array
  ``R[a, i, j, k]`` holds ``(R(e_i, e_j) e_k)^a``
* derivatives are appended as the *last* slot: ``dT[..., m] = d_m T[...]``

Components are stored as an ndarray of shape ``dims`` (row-major), which is
the flat row-major layout reshaped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import permutations
from math import factorial

import numpy as np

from .errors import FrameMismatchError, MetricDegenerateError


class FrameKind(enum.Enum):
    BASE_COORD = "BaseCoord"
    ADAPTED_TM = "AdaptedTM"
    COORD_TM = "CoordTM"


UP = "upper"
LOW = "lower"


@dataclass(frozen=True)
class Frame:
    kind: FrameKind
    n: int

    @property
    def extent(self) -> int:
        """Extent of every slot: ``n`` on the base, ``2n`` on TM."""
        return self.n if self.kind is FrameKind.BASE_COORD else 2 * self.n

    @classmethod
    def base(cls, n: int) -> Frame:
        return cls(FrameKind.BASE_COORD, n)

    @classmethod
    def adapted(cls, n: int) -> Frame:
        return cls(FrameKind.ADAPTED_TM, n)

    @classmethod
    def coord_tm(cls, n: int) -> Frame:
        return cls(FrameKind.COORD_TM, n)


@dataclass(frozen=True)
class DenseTensor:
    """Immutable component array tagged with its frame and slot variances."""

    components: np.ndarray
    frame: Frame
    variance: tuple[str, ...]
    dims: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        comp = np.array(self.components, dtype=float)
        if comp.ndim != len(self.variance):
            raise FrameMismatchError(
                f"rank {comp.ndim} does not match variance {self.variance}")
        if any(d != self.frame.extent for d in comp.shape):
            raise FrameMismatchError(
                f"extents {comp.shape} do not match frame extent {self.frame.extent}")
        bad = [v for v in self.variance if v not in (UP, LOW)]
        if bad:
            raise ValueError(f"unknown variance tags {bad}")
        comp.setflags(write=False)
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "variance", tuple(self.variance))
        object.__setattr__(self, "dims", comp.shape)

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def flat(self) -> np.ndarray:
        return self.components.reshape(-1)

    def _same_frame(self, other: DenseTensor):
        if self.frame != other.frame or self.variance != other.variance:
            raise FrameMismatchError(
                f"cannot combine {self.frame}/{self.variance} with "
                f"{other.frame}/{other.variance}")

    def __add__(self, other: DenseTensor) -> DenseTensor:
        self._same_frame(other)
        return DenseTensor(self.components + other.components, self.frame, self.variance)

    def __sub__(self, other: DenseTensor) -> DenseTensor:
        self._same_frame(other)
        return DenseTensor(self.components - other.components, self.frame, self.variance)

    def __mul__(self, c: float) -> DenseTensor:
        return DenseTensor(c * self.components, self.frame, self.variance)

    __rmul__ = __mul__

    def __neg__(self) -> DenseTensor:
        return DenseTensor(-self.components, self.frame, self.variance)

    def norm(self) -> float:
        """Frobenius norm of the raw components."""
        return float(np.linalg.norm(self.flat))

    def allclose(self, other: DenseTensor, atol: float = 1e-12) -> bool:
        self._same_frame(other)
        return bool(np.allclose(self.components, other.components, rtol=0.0, atol=atol))


def contract(t: DenseTensor, slot_a: int, slot_b: int):
    """Trace over an (upper, lower) slot pair; rank drops by two.

    A full contraction to rank 0 returns a plain ``float``.
    """
    if slot_a == slot_b:
        raise FrameMismatchError("cannot contract a slot with itself")
    va, vb = t.variance[slot_a], t.variance[slot_b]
    if {va, vb} != {UP, LOW}:
        raise FrameMismatchError(
            f"contraction needs one upper and one lower slot, got {va}/{vb}")
    comp = np.trace(t.components, axis1=slot_a, axis2=slot_b)
    keep = tuple(v for i, v in enumerate(t.variance) if i not in (slot_a, slot_b))
    if not keep:
        return float(comp)
    return DenseTensor(comp, t.frame, keep)


def check_spd(metric: np.ndarray) -> np.ndarray:
    """Return the Cholesky factor of ``metric`` or raise MetricDegenerateError."""
    m = np.asarray(metric, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MetricDegenerateError(f"metric must be square, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise MetricDegenerateError("metric is not symmetric")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise MetricDegenerateError("metric is not positive definite") from exc


def raise_lower(t: DenseTensor, slot: int, metric: DenseTensor) -> DenseTensor:
    """Flip the variance of ``slot`` using ``metric`` (lowering) or its inverse (raising)."""
    if metric.frame != t.frame or metric.variance != (LOW, LOW):
        raise FrameMismatchError("metric must be a (0,2) tensor in the same frame")
    check_spd(metric.components)
    if t.variance[slot] == UP:
        mat, new = metric.components, LOW
    else:
        mat, new = np.linalg.inv(metric.components), UP
    comp = np.moveaxis(np.tensordot(mat, t.components, axes=([1], [slot])), 0, slot)
    var = list(t.variance)
    var[slot] = new
    return DenseTensor(comp, t.frame, tuple(var))


def symmetrize(t: DenseTensor, slots=None) -> DenseTensor:
    """Average over all permutations of ``slots`` (default: every slot)."""
    slots = tuple(range(t.rank)) if slots is None else tuple(slots)
    _check_same_variance(t, slots)
    acc = np.zeros_like(t.components)
    for perm in permutations(slots):
        axes = list(range(t.rank))
        for src, dst in zip(slots, perm):
            axes[src] = dst
        acc = acc + np.transpose(t.components, axes)
    return DenseTensor(acc / factorial(len(slots)), t.frame, t.variance)


def antisymmetrize(t: DenseTensor, slot_a: int, slot_b: int) -> DenseTensor:
    _check_same_variance(t, (slot_a, slot_b))
    comp = 0.5 * (t.components - np.swapaxes(t.components, slot_a, slot_b))
    return DenseTensor(comp, t.frame, t.variance)


def _check_same_variance(t, slots):
    if len({t.variance[s] for s in slots}) > 1:
        raise FrameMismatchError("(anti)symmetrization mixes upper and lower slots")


def metric_norm_sq(comp: np.ndarray, variance, g: np.ndarray, ginv: np.ndarray) -> float:
    """Squared norm of a tensor relative to a metric (each slot contracted with g or g^-1)."""
    other = np.asarray(comp, dtype=float)
    for slot, var in enumerate(variance):
        mat = g if var == UP else ginv
        other = np.moveaxis(np.tensordot(mat, other, axes=([1], [slot])), 0, slot)
    return float(np.sum(np.asarray(comp) * other))


def ev(t, *vectors):
    """Feed vectors into the trailing lower slots of a (1,k) component array, in order.

    ``ev(R, X, Y, Z)`` is ``R(X, Y) Z`` for the curvature layout above.  Works
    on float and object (dual-number) arrays alike.
    """
    out = t
    for v in vectors:
        out = np.tensordot(out, v, axes=([1], [0]))
    return out


def gram_schmidt(vectors, g: np.ndarray) -> list[np.ndarray]:
    """Orthonormalise ``vectors`` in order with respect to ``g``; drops nothing."""
    basis = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for e in basis:
            w = w - (e @ g @ w) * e
        nrm = np.sqrt(w @ g @ w)
        basis.append(w / nrm)
    return basis


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns are a g-orthonormal frame from Gram-Schmidt on the coordinate frame."""
    n = g.shape[0]
    return np.column_stack(gram_schmidt(np.eye(n), g))
