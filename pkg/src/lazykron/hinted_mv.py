"""Three-phase Tensor Hinted Mv driven through :class:`LazyKron`.

Phase 1 receives ``k`` factor matrices (each ``n x d``) and builds an empty
lazy structure.  Phase 2 receives a sparse diagonal tensor ``P`` as
``(j, p_j)`` pairs and issues one rank-1 update per pair, using the j-th
columns of the factors.  Phase 3 answers a sub-tensor query.  Phases 2 and
3 are metered with a counting semiring.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionMismatch
from .lazy import LazyKron, LazyParams
from .oracle import EagerKron
from .semiring import REAL, CountingSemiring
from .tensor import QuerySpec


@dataclass
class HintedMvInstance:
    V: list
    P: list
    tau: float = 1.0

    def __post_init__(self):
        if not self.V:
            raise DimensionMismatch("need at least one factor matrix")
        shape = np.shape(self.V[0])
        if len(shape) != 2:
            raise DimensionMismatch(f"factor of shape {shape} is not a matrix")
        for M in self.V:
            if np.shape(M) != shape:
                raise DimensionMismatch(f"factor of shape {np.shape(M)}, expected {shape}")
        js = [j for j, _ in self.P]
        if len(set(js)) != len(js):
            raise DimensionMismatch("diagonal positions of P must be distinct")
        if any(not 0 <= j < shape[1] for j in js):
            raise DimensionMismatch(f"diagonal position outside 0..{shape[1] - 1}")
        if len(self.P) > self.max_nonzeros:
            raise DimensionMismatch(f"|P| = {len(self.P)} exceeds ceil(n**tau) = {self.max_nonzeros}")

    @property
    def k(self):
        return len(self.V)

    @property
    def n(self):
        return np.shape(self.V[0])[0]

    @property
    def d(self):
        return np.shape(self.V[0])[1]

    @property
    def max_nonzeros(self):
        return math.ceil(round(self.n ** self.tau, 9))


@dataclass
class PhaseReport:
    n: int
    k: int
    s: int
    tau: float
    d: int
    m: int
    K: int
    phase2_mul_count: int
    phase3_mul_count: int
    phase2_wall: float
    phase3_wall: float

    def as_dict(self):
        return asdict(self)


def random_instance(rng, n, d, k, tau, semiring=REAL, m=None):
    """Random factors and a random diagonal hint with ``m`` non-zeros."""
    limit = min(d, math.ceil(round(n ** tau, 9)))
    m = limit if m is None else m
    V = [semiring.random(rng, (n, d)) for _ in range(k)]
    js = sorted(rng.choice(d, size=m, replace=False).tolist())
    if semiring.dtype == np.bool_:
        values = [True] * m
    else:
        values = rng.choice([-2.0, -1.0, 1.0, 2.0], size=m).tolist()
    return HintedMvInstance(V, list(zip(js, values)), tau)


def random_query(rng, n, k, s):
    modes = sorted(rng.choice(np.arange(1, k + 1), size=s, replace=False).tolist())
    indices = rng.integers(0, n, size=s).tolist()
    return QuerySpec(tuple(modes), tuple(indices))


def update_vectors(inst, j, p, semiring, fold_mode=1):
    """The j-th columns of the factors, with ``p`` folded into mode ``fold_mode``."""
    vectors = [semiring.asarray(M)[:, j] for M in inst.V]
    t = fold_mode - 1
    vectors[t] = semiring.mul(semiring.asarray(p), vectors[t])
    return vectors


def hmv_run(inst, q, K=None, semiring=REAL, kernel="naive", fold_mode=1):
    """Solve one instance via the lazy structure.

    ``K`` defaults to ``ceil(n**tau)``.  Returns ``(answer, PhaseReport)``.
    """
    q = QuerySpec.of(q)
    q.validate(inst.k, inst.n)
    sr = semiring if semiring.counting else CountingSemiring(semiring)
    K = inst.max_nonzeros if K is None else K

    # phase 1: preprocessing
    lk = LazyKron(LazyParams(inst.n, inst.k, K, inst.tau), sr, kernel)

    sr.reset()
    start = time.perf_counter()
    for j, p in inst.P:
        lk.update(update_vectors(inst, j, p, sr, fold_mode))
    phase2_wall = time.perf_counter() - start
    phase2 = sr.mul_count

    sr.reset()
    start = time.perf_counter()
    answer = lk.query(q)
    phase3_wall = time.perf_counter() - start
    phase3 = sr.mul_count

    report = PhaseReport(
        n=inst.n, k=inst.k, s=q.s, tau=inst.tau, d=inst.d, m=len(inst.P), K=K,
        phase2_mul_count=phase2, phase3_mul_count=phase3,
        phase2_wall=phase2_wall, phase3_wall=phase3_wall,
    )
    return answer, report


def direct_evaluation(inst, q, semiring=REAL):
    """``sum_j p_j (V_1)_{*,j} (x) ... (x) (V_k)_{*,j}`` sliced at ``q``, eagerly."""
    oracle = EagerKron(inst.n, inst.k, semiring)
    for j, p in inst.P:
        oracle.update(update_vectors(inst, j, p, semiring))
    return oracle.query(q)


def hmv_sweep(ns, ks, ss, taus, seed=0, semiring=REAL, kernel="naive", d=None, K=None):
    """One :class:`PhaseReport` per grid point ``(n, k, s, tau)`` with ``s <= k``.

    Each point draws its instance from its own child of ``SeedSequence(seed)``,
    so rows are reproducible independently of grid order.  ``d`` defaults to
    ``max(n, ceil(n**tau))``; the hint always has ``min(d, ceil(n**tau))``
    non-zeros.  ``K`` defaults to ``ceil(n**tau)``, in which case every point
    flushes exactly once during phase 2.
    """
    points = [(n, k, s, tau) for n in ns for k in ks for s in ss for tau in taus if s <= k]
    children = np.random.SeedSequence(seed).spawn(len(points))
    rows = []
    for (n, k, s, tau), child in zip(points, children):
        rng = np.random.default_rng(child)
        dd = max(n, math.ceil(round(n ** tau, 9))) if d is None else d
        inst = random_instance(rng, n, dd, k, tau, semiring)
        q = random_query(rng, n, k, s)
        _, report = hmv_run(inst, q, K=K, semiring=semiring, kernel=kernel)
        rows.append(report)
    return rows
