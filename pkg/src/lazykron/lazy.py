"""Dynamic sum of Kronecker products with buffered rank-1 updates.

The state holds a dense tensor ``A`` plus ``k`` factor buffers of capacity
``K``.  Updates append one column to each buffer; when ``K`` columns have
accumulated they are folded into ``A`` with one batched product.  A query
reads the slice of ``A`` and adds the contribution of the buffered columns,
which is computed in factored form without materializing anything of
order ``k``.
"""
from __future__ import annotations

import math
from collections import defaultdict
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass

from .errors import DimensionMismatch, ShapeMismatch
from .kron_ops import face_split, hadamard_rows, matmul_bt, scale_columns
from .semiring import REAL
from .tensor import (
    QuerySpec,
    Shape,
    dematricize,
    outer_accumulate,
    tensor_add_assign,
    tensor_new,
    tensor_slice,
)

_UNMETERED = nullcontext()


@dataclass(frozen=True)
class LazyParams:
    n: int
    k: int
    K: int
    a: float | None = None

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"buffer capacity K must be >= 1, got {self.K}")
        Shape(self.k, self.n)
        if self.k < 1:
            raise DimensionMismatch("order k must be >= 1")

    @classmethod
    def from_exponent(cls, n, k, a):
        """``K = ceil(n**a)``."""
        # rounding guards against 3**1.0000000000000002 style noise
        K = max(1, math.ceil(round(n ** a, 9)))
        return cls(n, k, K, a)

    @property
    def shape(self):
        return Shape(self.k, self.n)


class LazyKron:
    """Maintains ``sum_t u_1(t) (x) ... (x) u_k(t)`` under rank-1 updates.

    Parameters
    ----------
    params : LazyParams
    semiring : Semiring
        Scalar system; pass a :class:`~lazykron.semiring.CountingSemiring`
        to have per-step multiplication counts recorded in ``step_counts``.
    kernel : str
        Matrix-multiply kernel name from :data:`lazykron.kron_ops.KERNELS`.
    split : int, optional
        Number of leading modes on the row side of the flush product.
        Defaults to ``ceil(k/2)``.
    """

    def __init__(self, params, semiring=REAL, kernel="naive", split=None):
        self.params = params
        self.semiring = semiring
        self.kernel = kernel
        self.split = math.ceil(params.k / 2) if split is None else split
        if not 0 <= self.split <= params.k:
            raise ValueError(f"split {self.split} not in 0..{params.k}")
        self.A = tensor_new(params.shape, semiring)
        self.buffers = [semiring.zeros((params.n, params.K)) for _ in range(params.k)]
        self.fill = 0
        self.t = 0
        self.n_flushes = 0
        # last measured multiplications per named step (counting semiring only)
        self.step_counts = {}
        self.step_totals = defaultdict(int)

    @classmethod
    def create(cls, n, k, K=None, a=None, **kwargs):
        if K is None:
            if a is None:
                raise ValueError("give either K or a")
            params = LazyParams.from_exponent(n, k, a)
        else:
            params = LazyParams(n, k, K, a)
        return cls(params, **kwargs)

    @property
    def n(self):
        return self.params.n

    @property
    def k(self):
        return self.params.k

    @property
    def K(self):
        return self.params.K

    def _step(self, name):
        if not self.semiring.counting:
            return _UNMETERED
        return self._metered(name)

    @contextmanager
    def _metered(self, name):
        sr = self.semiring
        before = sr.mul_count
        yield
        used = sr.mul_count - before
        self.step_counts[name] = used
        self.step_totals[name] += used

    def update(self, vectors):
        """Absorb the rank-1 term ``vectors[0] (x) ... (x) vectors[k-1]``."""
        if len(vectors) != self.k:
            raise ShapeMismatch(f"need {self.k} vectors, got {len(vectors)}")
        cols = [self.semiring.asarray(v) for v in vectors]
        for v in cols:
            if v.shape != (self.n,):
                raise ShapeMismatch(f"vector of shape {v.shape}, expected ({self.n},)")
        for buf, v in zip(self.buffers, cols):
            buf[:, self.fill] = v
        self.fill += 1
        self.t += 1
        if self.fill == self.K:
            self.flush()

    def flush(self):
        """Fold the buffered columns into ``A`` and empty the buffers."""
        if self.fill == 0:
            return
        sr = self.semiring
        h = self.split
        active = [buf[:, :self.fill] for buf in self.buffers]
        with self._step("flush.face_split"):
            B = face_split(active[:h], sr, cols=self.fill)
            C = face_split(active[h:], sr, cols=self.fill)
        with self._step("flush.matmul"):
            M = matmul_bt(B, C, sr, self.kernel)
        with self._step("flush.accumulate"):
            tensor_add_assign(self.A, dematricize(M, self.params.shape, h, sr))
        self.fill = 0
        self.n_flushes += 1

    def low_rank_part(self, q, scale_factor=0):
        """Contribution of the buffered columns to the query ``q``.

        ``scale_factor`` picks which un-replaced factor (by position among
        the free modes) absorbs the Hadamard row; the answer does not depend
        on it.
        """
        sr = self.semiring
        fill = self.fill
        free = q.free_modes(self.k)
        order = len(free)
        with self._step("query.hadamard"):
            w = hadamard_rows([self.buffers[m - 1][i, :fill] for m, i in zip(q.modes, q.indices)], sr)
        if order == 0:
            h = 0
            with self._step("query.face_split"):
                B = w.reshape(1, fill)
                C = face_split([], sr, cols=fill)
        else:
            V = [self.buffers[m - 1][:, :fill] for m in free]
            with self._step("query.scale"):
                V[scale_factor] = scale_columns(V[scale_factor], w, sr)
            h = math.ceil(order / 2)
            with self._step("query.face_split"):
                B = face_split(V[:h], sr, cols=fill)
                C = face_split(V[h:], sr, cols=fill)
        with self._step("query.matmul"):
            M = matmul_bt(B, C, sr, self.kernel)
        return dematricize(M, Shape(order, self.n), h, sr)

    def query(self, q, scale_factor=0):
        """Sub-tensor of the maintained sum with the modes of ``q`` fixed.

        ``q`` is a :class:`QuerySpec` or a ``(modes, indices)`` pair.  The
        state is not modified; an order-0 answer is a one-element tensor.
        """
        q = QuerySpec.of(q)
        q.validate(self.k, self.n)
        for name in [s for s in self.step_counts if s.startswith("query.")]:
            del self.step_counts[name]
        with self._step("query.slice"):
            full = tensor_slice(self.A, q)
        low = self.low_rank_part(q, scale_factor)
        with self._step("query.combine"):
            tensor_add_assign(full, low)
        return full

    def total_tensor(self):
        """Materialize ``A`` plus all buffered terms without touching the state."""
        total = self.A.copy()
        for q in range(self.fill):
            outer_accumulate(total, [buf[:, q] for buf in self.buffers])
        return total

    def __repr__(self):
        p = self.params
        return f"LazyKron(n={p.n}, k={p.k}, K={p.K}, t={self.t}, fill={self.fill})"


def flush_mul_formula(n, k, K, split=None):
    """Multiplications of one full flush under the naive kernel, by step."""
    h = math.ceil(k / 2) if split is None else split

    def fs(m):
        return n ** m * K * (m - 1) if m >= 1 else 0

    return {"face_split": fs(h) + fs(k - h), "matmul": n ** k * K}


def query_mul_formula(n, k, s, fill):
    """Multiplications of one query under the naive kernel, by step."""
    order = k - s
    h = math.ceil(order / 2)

    def fs(m):
        return n ** m * fill * (m - 1) if m >= 1 else 0

    return {
        "slice": 0,
        "hadamard": (s - 1) * fill,
        "scale": n * fill if order else 0,
        "face_split": fs(h) + fs(order - h),
        "matmul": n ** order * fill,
    }
