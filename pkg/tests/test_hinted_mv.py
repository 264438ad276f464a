import math

import numpy as np
import pytest

from lazykron import errors
from lazykron.hinted_mv import (
    HintedMvInstance,
    direct_evaluation,
    hmv_run,
    hmv_sweep,
    random_instance,
    random_query,
)
from lazykron.lazy import flush_mul_formula, query_mul_formula
from lazykron.semiring import BOOL, REAL

from brute import brute_outer_sum, brute_slice


def brute_answer(inst, q, boolean=False):
    terms = []
    for j, p in inst.P:
        cols = [np.asarray(M)[:, j].tolist() for M in inst.V]
        if boolean:
            cols[0] = [bool(p) and x for x in cols[0]]
        else:
            cols[0] = [p * x for x in cols[0]]
        terms.append(cols)
    if boolean:
        full = brute_outer_sum(terms, inst.n, inst.k, add=lambda x, y: bool(x or y),
                               mul=lambda x, y: bool(x and y), zero=False)
    else:
        full = brute_outer_sum(terms, inst.n, inst.k)
    return np.asarray(brute_slice(full, q.modes, q.indices), dtype=object)


def test_identity_example():
    inst = HintedMvInstance([np.eye(2), np.eye(2)], [(0, 1.0)], tau=1.0)
    answer, report = hmv_run(inst, ([1], [0]))
    assert answer.array.tolist() == [1.0, 0.0]
    assert report.m == 1


def test_identity_example_boolean():
    I = np.eye(2, dtype=bool)
    inst = HintedMvInstance([I, I], [(0, True)], tau=1.0)
    answer, _ = hmv_run(inst, ([1], [0]), semiring=BOOL)
    assert answer.array.tolist() == [True, False]


def test_random_instance_against_brute_force():
    rng = np.random.default_rng(7)
    inst = random_instance(rng, n=3, d=4, k=3, tau=1.0, m=2)
    q = random_query(rng, 3, 3, 1)
    answer, _ = hmv_run(inst, q)
    assert np.array_equal(answer.array, brute_answer(inst, q).astype(float))
    assert np.array_equal(answer.data, direct_evaluation(inst, q).data)


@pytest.mark.parametrize("semiring", [REAL, BOOL])
def test_reduction_correctness_grid(semiring):
    rng = np.random.default_rng(11)
    boolean = semiring is BOOL
    for _ in range(40):
        n, d, k = int(rng.integers(2, 4)), int(rng.integers(1, 5)), int(rng.integers(1, 4))
        tau = float(rng.choice([0.5, 1.0, 1.5]))
        m = int(rng.integers(0, min(d, math.ceil(n ** tau)) + 1))
        inst = random_instance(rng, n, d, k, tau, semiring, m=m)
        q = random_query(rng, n, k, int(rng.integers(1, k + 1)))
        K = int(rng.integers(1, 4))
        answer, _ = hmv_run(inst, q, K=K, semiring=semiring)
        expected = brute_answer(inst, q, boolean).astype(semiring.dtype)
        assert np.array_equal(answer.array, expected)


def test_fold_mode_indifference():
    rng = np.random.default_rng(3)
    for _ in range(20):
        inst = random_instance(rng, 3, 4, 3, 1.0)
        q = random_query(rng, 3, 3, 1)
        a1, _ = hmv_run(inst, q, fold_mode=1)
        a2, _ = hmv_run(inst, q, fold_mode=2)
        assert np.array_equal(a1.data, a2.data)


def test_aligned_capacity_flushes_at_most_once():
    rng = np.random.default_rng(5)
    for tau in (0.5, 1.0, 1.3):
        inst = random_instance(rng, 3, 6, 2, tau)
        K = inst.max_nonzeros
        assert len(inst.P) <= K
        _, report = hmv_run(inst, random_query(rng, 3, 2, 1))
        flush = flush_mul_formula(3, 2, K)
        flushes = len(inst.P) // K
        assert flushes <= 1
        assert report.phase2_mul_count == len(inst.P) * 3 + flushes * (flush["face_split"] + flush["matmul"])


def test_phase_counts_match_formulas():
    rng = np.random.default_rng(9)
    n, d, k, s, tau = 3, 5, 3, 1, 1.0
    inst = random_instance(rng, n, d, k, tau, m=2)
    q = random_query(rng, n, k, s)
    _, report = hmv_run(inst, q)
    # two updates, no flush (K = 3): only the folding multiplications
    assert report.phase2_mul_count == 2 * n
    assert report.phase3_mul_count == sum(query_mul_formula(n, k, s, 2).values())


def test_instance_validation():
    with pytest.raises(errors.DimensionMismatch):
        HintedMvInstance([np.ones((2, 3)), np.ones((2, 2))], [])
    with pytest.raises(errors.DimensionMismatch):
        HintedMvInstance([np.ones((2, 3))], [(0, 1.0), (0, 2.0)])
    with pytest.raises(errors.DimensionMismatch):
        HintedMvInstance([np.ones((2, 3))], [(3, 1.0)])
    with pytest.raises(errors.DimensionMismatch):
        HintedMvInstance([np.ones((2, 3))], [(0, 1.0), (1, 1.0)], tau=0.0)


def test_invalid_query():
    inst = HintedMvInstance([np.eye(2), np.eye(2)], [(0, 1.0)])
    with pytest.raises(errors.ModeOutOfRange):
        hmv_run(inst, ([3], [0]))


def test_sweep_single_point_reproduces_run():
    rows = hmv_sweep([3], [3], [1], [1.0], seed=4)
    assert len(rows) == 1
    child = np.random.SeedSequence(4).spawn(1)[0]
    rng = np.random.default_rng(child)
    inst = random_instance(rng, 3, 3, 3, 1.0)
    q = random_query(rng, 3, 3, 1)
    _, report = hmv_run(inst, q)
    assert (rows[0].phase2_mul_count, rows[0].phase3_mul_count) == (
        report.phase2_mul_count, report.phase3_mul_count)


def test_sweep_deterministic():
    grid = ([2, 3], [2, 3], [1, 2], [0.5, 1.0])
    a = hmv_sweep(*grid, seed=1)
    b = hmv_sweep(*grid, seed=1)
    assert [(r.phase2_mul_count, r.phase3_mul_count) for r in a] == [
        (r.phase2_mul_count, r.phase3_mul_count) for r in b]
    assert all(r.s <= r.k for r in a)


def test_sweep_phase2_count_formula():
    for r in hmv_sweep([2, 3], [2, 3, 4], [1], [0.5, 1.0, 1.5], seed=2):
        flush = flush_mul_formula(r.n, r.k, r.K)
        flushes = r.m // r.K
        assert r.phase2_mul_count == r.m * r.n + flushes * (flush["face_split"] + flush["matmul"])
