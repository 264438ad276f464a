"""Eager reference: materialize the running sum after every update.

Uses only tensor primitives (no face-split or matrix kernels), so it checks
the index conventions of the lazy path independently.
"""
from __future__ import annotations

from .semiring import REAL
from .tensor import QuerySpec, Shape, outer_accumulate, tensor_new, tensor_slice


class EagerKron:
    """Brute-force state: ``A_full`` always equals the whole sum."""

    def __init__(self, n, k, semiring=REAL):
        self.n = n
        self.k = k
        self.semiring = semiring
        self.A_full = tensor_new(Shape(k, n), semiring)
        self.t = 0

    def update(self, vectors):
        outer_accumulate(self.A_full, list(vectors))
        self.t += 1

    def query(self, q):
        return tensor_slice(self.A_full, QuerySpec.of(q))


def eager_update_mul_formula(n, k):
    return n ** k * (k - 1)
