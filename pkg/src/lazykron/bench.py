"""Verification, count audits and benchmark sweeps behind the CLI."""
from __future__ import annotations

import itertools
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from .lazy import LazyKron, LazyParams, flush_mul_formula, query_mul_formula
from .oracle import EagerKron, eager_update_mul_formula
from .semiring import REAL, CountingSemiring
from .tensor import QuerySpec

INDEX_SAMPLES = 2


def point_rngs(seed, count):
    """Independent generators for ``count`` grid points, split from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def random_stream(rng, n, k, T, semiring=REAL, normal=False):
    if normal and not semiring.dtype == np.bool_:
        return [list(rng.standard_normal((k, n))) for _ in range(T)]
    return [list(semiring.random(rng, (k, n))) for _ in range(T)]


def all_queries(rng, n, k, samples=INDEX_SAMPLES):
    """Every mode subset, each with up to ``samples`` random index tuples.

    When a subset has no more than ``samples`` index tuples, all of them are used.
    """
    for s in range(1, k + 1):
        for modes in itertools.combinations(range(1, k + 1), s):
            if n ** s <= samples:
                tuples = itertools.product(range(n), repeat=s)
            else:
                tuples = (tuple(rng.integers(0, n, size=s).tolist()) for _ in range(samples))
            for idx in tuples:
                yield QuerySpec(modes, idx)


@dataclass
class Counterexample:
    n: int
    k: int
    K: int
    trial: int
    step: int
    stream: list
    query: QuerySpec
    expected: list
    got: list

    def describe(self):
        lines = [
            f"counterexample: n={self.n} k={self.k} K={self.K} trial={self.trial} "
            f"after update {self.step}",
            f"query modes={list(self.query.modes)} indices={list(self.query.indices)}",
            "stream:",
        ]
        for t, vs in enumerate(self.stream, 1):
            lines.append(f"  u({t}) = " + " ".join(str(np.asarray(v).tolist()) for v in vs))
        lines.append(f"expected {self.expected}")
        lines.append(f"got      {self.got}")
        return "\n".join(lines)


@dataclass
class VerifyResult:
    streams: int = 0
    checks: int = 0
    failure: Counterexample | None = None

    @property
    def ok(self):
        return self.failure is None


def verify_equivalence(ks=(1, 2, 3, 4), ns=(2, 3), Ks=(1, 2, 3, 5), T=25, trials=50,
                       seed=0, semiring=REAL, kernel="naive"):
    """Lazy-vs-eager equivalence over a grid of seeded integer-valued streams.

    Answers are compared exactly after every update, for every mode subset.
    Stops at the first mismatch.
    """
    result = VerifyResult()
    points = [(k, n, K) for k in ks for n in ns for K in Ks]
    for (k, n, K), rng in zip(points, point_rngs(seed, len(points))):
        for trial in range(trials):
            lazy = LazyKron(LazyParams(n, k, K), semiring, kernel)
            eager = EagerKron(n, k, semiring)
            stream = random_stream(rng, n, k, T, semiring)
            result.streams += 1
            for step, vectors in enumerate(stream, 1):
                lazy.update(vectors)
                eager.update(vectors)
                for q in all_queries(rng, n, k):
                    want = eager.query(q).data
                    got = lazy.query(q).data
                    result.checks += 1
                    if not np.array_equal(want, got):
                        result.failure = Counterexample(
                            n, k, K, trial, step, stream[:step], q,
                            want.tolist(), got.tolist())
                        return result
    return result


@dataclass
class CountRow:
    check: str
    n: int
    k: int
    s: int
    K: int
    fill: int
    expected: int
    measured: int
    ok: bool


def audit_counts(n, k, s, K, seed=0, kernel="naive", cycles=3):
    """Measure every metered step against its closed-form count.

    Covers one full flush, a query at each fill level ``0..K-1``, the eager
    baseline, and the amortized update cost over ``cycles * K`` updates.
    """
    rows = []
    rng = np.random.default_rng(seed)
    sr = CountingSemiring(REAL)

    def record(check, expected, measured, fill=0):
        rows.append(CountRow(check, n, k, s, K, fill, expected, measured, expected == measured))

    lazy = LazyKron(LazyParams(n, k, K), sr, kernel)
    for vectors in random_stream(rng, n, k, K, sr):
        lazy.update(vectors)
    flush = flush_mul_formula(n, k, K)
    record("flush_matmul", flush["matmul"], lazy.step_counts["flush.matmul"], K)
    record("flush_face_split", flush["face_split"], lazy.step_counts["flush.face_split"], K)
    record("flush_accumulate", 0, lazy.step_counts["flush.accumulate"], K)

    lazy = LazyKron(LazyParams(n, k, K), sr, kernel)
    for fill in range(K):
        q = QuerySpec(tuple(range(1, s + 1)), tuple(rng.integers(0, n, size=s).tolist()))
        lazy.query(q)
        expected = query_mul_formula(n, k, s, fill)
        for step in ("slice", "hadamard", "scale", "face_split", "matmul"):
            record(f"query_{step}", expected[step], lazy.step_counts.get(f"query.{step}", 0), fill)
        lazy.update(random_stream(rng, n, k, 1, sr)[0])

    eager = EagerKron(n, k, sr)
    sr.reset()
    eager.update(random_stream(rng, n, k, 1, sr)[0])
    record("eager_update", eager_update_mul_formula(n, k), sr.mul_count)

    T = cycles * K
    lazy = LazyKron(LazyParams(n, k, K), sr, kernel)
    sr.reset()
    for vectors in random_stream(rng, n, k, T, sr):
        lazy.update(vectors)
    per_flush = flush["face_split"] + flush["matmul"]
    record("amortized_update_total", cycles * per_flush, sr.mul_count, 0)
    record("amortized_update_per_T", cycles * per_flush // T, sr.mul_count // T, 0)
    return rows


@dataclass
class BenchRow:
    n: int
    k: int
    s: int
    K: int
    T: int
    amortized_update_mul: float
    worst_query_mul: int
    amortized_update_wall: float
    worst_query_wall: float
    baseline_eager_update_mul: int


BENCH_FIELDS = [f.name for f in fields(BenchRow)]


def bench_point(n, k, s, K, T, rng, base=REAL, kernel="naive", integer=False):
    """Drive ``T`` updates, each followed by one random ``s``-mode query.

    Returns the row and the finished :class:`LazyKron` (for flush statistics).
    """
    sr = CountingSemiring(base)
    lazy = LazyKron(LazyParams(n, k, K), sr, kernel)
    stream = random_stream(rng, n, k, T, sr, normal=not integer)
    update_mul = 0
    update_wall = 0.0
    worst_mul = 0
    worst_wall = 0.0
    for vectors in stream:
        before = sr.mul_count
        start = time.perf_counter()
        lazy.update(vectors)
        update_wall += time.perf_counter() - start
        update_mul += sr.mul_count - before

        modes = sorted(rng.choice(np.arange(1, k + 1), size=s, replace=False).tolist())
        q = QuerySpec(tuple(modes), tuple(rng.integers(0, n, size=s).tolist()))
        before = sr.mul_count
        start = time.perf_counter()
        lazy.query(q)
        worst_wall = max(worst_wall, time.perf_counter() - start)
        worst_mul = max(worst_mul, sr.mul_count - before)

    eager = EagerKron(n, k, sr)
    before = sr.mul_count
    eager.update(stream[0])
    row = BenchRow(
        n=n, k=k, s=s, K=K, T=T,
        amortized_update_mul=update_mul / T,
        worst_query_mul=worst_mul,
        amortized_update_wall=update_wall / T,
        worst_query_wall=worst_wall,
        baseline_eager_update_mul=sr.mul_count - before,
    )
    return row, lazy


def bench_sweep(ns, ks, ss, Ks, Ts, seed=0, base=REAL, kernel="naive"):
    """Rows in grid order; points with ``s > k`` are skipped."""
    points = [(n, k, s, K, T) for n in ns for k in ks for s in ss for K in Ks for T in Ts if s <= k]
    rows = []
    for (n, k, s, K, T), rng in zip(points, point_rngs(seed, len(points))):
        row, _ = bench_point(n, k, s, K, T, rng, base, kernel)
        rows.append(row)
    return rows


def flush_vs_eager(n=32, k=2, K=256, seed=0, kernel="blocked"):
    """Wall time of one batched flush against ``K`` eager rank-1 accumulations."""
    rng = np.random.default_rng(seed)
    stream = random_stream(rng, n, k, K, REAL, normal=True)
    lazy = LazyKron(LazyParams(n, k, K + 1), REAL, kernel)
    for vectors in stream:
        lazy.update(vectors)
    start = time.perf_counter()
    lazy.flush()
    flush_wall = time.perf_counter() - start

    eager = EagerKron(n, k, REAL)
    start = time.perf_counter()
    for vectors in stream:
        eager.update(vectors)
    eager_wall = time.perf_counter() - start
    return {
        "flush_wall": flush_wall,
        "eager_wall": eager_wall,
        "max_abs_diff": float(np.max(np.abs(lazy.A.data - eager.A_full.data))),
    }


def row_dicts(rows):
    return [asdict(r) for r in rows]
