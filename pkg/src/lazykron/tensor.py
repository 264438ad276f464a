"""Dense order-k tensors with equal mode size n, stored flat in row-major order.

Mode 1 is the most significant axis, so element ``(p_1, ..., p_k)`` lives at
flat offset ``sum_j p_j * n**(k - j)``.  Indices are 0-based; modes are
numbered 1..k.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityExceeded,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidSplit,
    ModeOutOfRange,
    ShapeMismatch,
)
from .semiring import REAL

_MAX_ELEMENTS = np.iinfo(np.intp).max


@dataclass(frozen=True)
class Shape:
    """``k`` modes of extent ``n``.  ``k == 0`` denotes a scalar (one element)."""

    k: int
    n: int

    def __post_init__(self):
        if self.k < 0 or self.n < 1:
            raise DimensionMismatch(f"invalid shape k={self.k}, n={self.n}")
        if self.n ** self.k > _MAX_ELEMENTS:
            raise CapacityExceeded(f"n**k = {self.n}**{self.k} elements is not addressable")

    @property
    def size(self):
        return self.n ** self.k

    @property
    def dims(self):
        return (self.n,) * self.k


@dataclass(frozen=True)
class QuerySpec:
    """Fix mode ``modes[t]`` (1-based) at index ``indices[t]`` (0-based).

    Modes are stored strictly increasing; pairs given out of order are sorted
    together.  Index values may repeat.
    """

    modes: tuple
    indices: tuple

    def __post_init__(self):
        modes = tuple(int(m) for m in self.modes)
        indices = tuple(int(i) for i in self.indices)
        if len(modes) != len(indices):
            raise DimensionMismatch("modes and indices must have equal length")
        if not modes:
            raise DimensionMismatch("a query must fix at least one mode")
        if len(set(modes)) != len(modes):
            raise ModeOutOfRange(f"repeated mode in {modes}")
        pairs = sorted(zip(modes, indices))
        object.__setattr__(self, "modes", tuple(m for m, _ in pairs))
        object.__setattr__(self, "indices", tuple(i for _, i in pairs))

    @classmethod
    def of(cls, q):
        """Coerce a ``(modes, indices)`` pair."""
        if isinstance(q, cls):
            return q
        modes, indices = q
        return cls(tuple(modes), tuple(indices))

    @property
    def s(self):
        return len(self.modes)

    def validate(self, k, n):
        if self.s > k:
            raise ModeOutOfRange(f"query fixes {self.s} modes of an order-{k} tensor")
        for m in self.modes:
            if not 1 <= m <= k:
                raise ModeOutOfRange(f"mode {m} not in 1..{k}")
        for i in self.indices:
            if not 0 <= i < n:
                raise IndexOutOfRange(f"index {i} not in 0..{n - 1}")

    def free_modes(self, k):
        """Modes left unfixed, in original order."""
        fixed = set(self.modes)
        return [m for m in range(1, k + 1) if m not in fixed]


class DenseTensor:
    """Flat row-major storage over a semiring.

    ``data`` is the 1-d buffer of length ``n**k``; ``array`` is a k-d view of
    the same memory.
    """

    def __init__(self, shape, data=None, semiring=REAL):
        self.shape = shape
        self.semiring = semiring
        if data is None:
            data = semiring.zeros(shape.size)
        else:
            data = semiring.asarray(data).reshape(-1)
            if data.size != shape.size:
                raise ShapeMismatch(f"{data.size} values for a tensor of {shape.size} elements")
        self.data = data

    @classmethod
    def from_array(cls, arr, semiring=REAL):
        arr = semiring.asarray(arr)
        if arr.ndim == 0:
            return cls(Shape(0, 1), arr.reshape(1), semiring)
        n = arr.shape[0]
        if any(d != n for d in arr.shape):
            raise ShapeMismatch(f"all modes must have equal extent, got {arr.shape}")
        return cls(Shape(arr.ndim, n), np.ascontiguousarray(arr).reshape(-1), semiring)

    @property
    def k(self):
        return self.shape.k

    @property
    def n(self):
        return self.shape.n

    @property
    def array(self):
        return self.data.reshape(self.shape.dims)

    def item(self):
        if self.shape.k != 0:
            raise ShapeMismatch("item() needs an order-0 tensor")
        return self.data[0]

    def copy(self):
        return DenseTensor(self.shape, self.data.copy(), self.semiring)

    def __repr__(self):
        return f"DenseTensor(k={self.k}, n={self.n}, {self.array!r})"


def tensor_new(shape, semiring=REAL):
    """All-zero tensor (semiring zero)."""
    return DenseTensor(shape, semiring=semiring)


def tensor_slice(A, q):
    """Sub-tensor with mode ``q.modes[t]`` fixed at ``q.indices[t]``.

    Remaining modes keep their relative order.  Reads exactly ``n**(k-s)``
    elements and performs no semiring arithmetic.
    """
    q.validate(A.k, A.n)
    fixed = dict(zip(q.modes, q.indices))
    key = tuple(fixed.get(m, slice(None)) for m in range(1, A.k + 1))
    sub = np.array(A.array[key], dtype=A.semiring.dtype)
    return DenseTensor(Shape(A.k - q.s, A.n), sub.reshape(-1), A.semiring)


def tensor_add_assign(A, B):
    if A.shape != B.shape:
        raise ShapeMismatch(f"cannot add {B.shape} into {A.shape}")
    A.data[...] = A.semiring.add(A.data, B.data)


def _outer_product(vectors, semiring):
    # every factor is broadcast to the full shape first, so each of the
    # k-1 multiplications touches all n**k entries
    k = len(vectors)
    n = vectors[0].shape[0]
    full = (n,) * k
    expanded = []
    for j, v in enumerate(vectors):
        view = v.reshape((1,) * j + (n,) + (1,) * (k - j - 1))
        expanded.append(np.broadcast_to(view, full))
    prod = np.array(expanded[0])
    for e in expanded[1:]:
        prod = semiring.mul(prod, e)
    return prod.reshape(-1)


def outer_accumulate(A, vectors):
    """``A[p_1..p_k] += prod_j vectors[j][p_j]`` for every index tuple.

    Costs ``n**k * (k-1)`` multiplications and ``n**k`` additions.
    """
    if len(vectors) != A.k:
        raise ShapeMismatch(f"need {A.k} vectors, got {len(vectors)}")
    vs = [A.semiring.asarray(v) for v in vectors]
    for v in vs:
        if v.shape != (A.n,):
            raise ShapeMismatch(f"vector of shape {v.shape}, expected ({A.n},)")
    A.data[...] = A.semiring.add(A.data, _outer_product(vs, A.semiring))


def matricize(A, m):
    """View A as an ``n**m x n**(k-m)`` matrix (rows: modes 1..m, row-major)."""
    if not 1 <= m < A.k:
        raise InvalidSplit(f"split {m} not in 1..{A.k - 1}")
    return A.data.reshape(A.n ** m, A.n ** (A.k - m))


def dematricize(M, shape, m, semiring=REAL):
    """Inverse of :func:`matricize`.

    Accepts the degenerate splits ``m == 0`` and ``m == k`` as well, which
    arise when one side of a product is the empty face-split.
    """
    if not 0 <= m <= shape.k:
        raise InvalidSplit(f"split {m} not in 0..{shape.k}")
    M = semiring.asarray(M)
    expected = (shape.n ** m, shape.n ** (shape.k - m))
    if M.shape != expected:
        raise ShapeMismatch(f"matrix of shape {M.shape}, expected {expected}")
    return DenseTensor(shape, M.reshape(-1).copy(), semiring)
