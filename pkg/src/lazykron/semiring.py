"""Commutative semirings that every tensor and matrix kernel is generic over.

Operations act elementwise on numpy arrays (scalars are 0-d arrays), so a
kernel written once against ``add``/``mul`` runs over reals, booleans, or
the instrumented :class:`CountingSemiring`.  There is no subtraction: the
data structure only ever accumulates.
"""
from __future__ import annotations

import numpy as np


class Semiring:
    """Base interface.  Subclasses fill in ``add``, ``mul`` and ``dot``."""

    name = "abstract"
    dtype = None
    zero = None
    one = None
    counting = False

    def add(self, x, y):
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def dot(self, B, C):
        """Semiring product ``B @ C.T`` for 2-d blocks (used by blocked kernels)."""
        raise NotImplementedError

    def asarray(self, x):
        return np.asarray(x, dtype=self.dtype)

    def zeros(self, shape):
        return np.full(shape, self.zero, dtype=self.dtype)

    def ones(self, shape):
        return np.full(shape, self.one, dtype=self.dtype)

    def random(self, rng, shape, low=-2, high=2):
        """Exactly representable random entries: integers in [low, high] or coin flips."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


class RealSemiring(Semiring):
    name = "real"
    dtype = np.float64
    zero = 0.0
    one = 1.0

    def add(self, x, y):
        return np.add(x, y)

    def mul(self, x, y):
        return np.multiply(x, y)

    def dot(self, B, C):
        return np.asarray(B, dtype=self.dtype) @ np.asarray(C, dtype=self.dtype).T

    def random(self, rng, shape, low=-2, high=2):
        return rng.integers(low, high, size=shape, endpoint=True).astype(self.dtype)


class BoolSemiring(Semiring):
    """OR as addition, AND as multiplication."""

    name = "bool"
    dtype = np.bool_
    zero = False
    one = True

    def add(self, x, y):
        return np.logical_or(x, y)

    def mul(self, x, y):
        return np.logical_and(x, y)

    def dot(self, B, C):
        # numpy's boolean matmul already uses OR/AND
        return np.asarray(B, dtype=bool) @ np.asarray(C, dtype=bool).T

    def random(self, rng, shape, low=-2, high=2):
        return rng.integers(0, 2, size=shape).astype(self.dtype)


class CountingSemiring(Semiring):
    """Wraps another semiring and counts every scalar add and mul.

    A call on arrays counts one operation per element of the broadcast
    result, so ``mul(x, y)`` on two ``(a, b)`` arrays adds ``a*b`` to
    ``mul_count``.  Results are identical to the wrapped semiring.  One
    instance is one measurement scope; call :meth:`reset` between phases
    or diff :meth:`snapshot` values.
    """

    counting = True

    def __init__(self, base=None):
        self.base = REAL if base is None else base
        self.mul_count = 0
        self.add_count = 0

    @property
    def name(self):
        return f"counting[{self.base.name}]"

    @property
    def dtype(self):
        return self.base.dtype

    @property
    def zero(self):
        return self.base.zero

    @property
    def one(self):
        return self.base.one

    def add(self, x, y):
        self.add_count += np.broadcast(x, y).size
        return self.base.add(x, y)

    def mul(self, x, y):
        self.mul_count += np.broadcast(x, y).size
        return self.base.mul(x, y)

    def dot(self, B, C):
        a, c = np.shape(B)
        b = np.shape(C)[0]
        self.mul_count += a * b * c
        self.add_count += a * b * max(c - 1, 0)
        return self.base.dot(B, C)

    def random(self, rng, shape, low=-2, high=2):
        return self.base.random(rng, shape, low, high)

    def reset(self):
        self.mul_count = 0
        self.add_count = 0

    def snapshot(self):
        return self.mul_count, self.add_count

    def __repr__(self):
        return f"CountingSemiring({self.base!r})"


REAL = RealSemiring()
BOOL = BoolSemiring()


def get_semiring(name):
    """Look up a semiring by CLI name; ``counting`` returns a fresh counting scope."""
    if isinstance(name, Semiring):
        return name
    if name == "real":
        return REAL
    if name == "bool":
        return BOOL
    if name == "counting":
        return CountingSemiring(REAL)
    raise ValueError(f"unknown semiring {name!r}")
