"""Loop-based reference computations, independent of the library."""
import itertools

import numpy as np


def brute_outer_sum(terms, n, k, add=lambda x, y: x + y, mul=lambda x, y: x * y, zero=0):
    """Entry-by-entry evaluation of sum_t prod_j terms[t][j][p_j] as an object array."""
    out = np.empty((n,) * k, dtype=object)
    for idx in itertools.product(range(n), repeat=k):
        acc = zero
        for vectors in terms:
            prod = vectors[0][idx[0]]
            for j in range(1, k):
                prod = mul(prod, vectors[j][idx[j]])
            acc = add(acc, prod)
        out[idx] = acc
    return out


def brute_slice(full, modes, indices):
    k = full.ndim
    fixed = dict(zip(modes, indices))
    key = tuple(fixed.get(m, slice(None)) for m in range(1, k + 1))
    return full[key]


def brute_face_split(mats):
    n, c = len(mats[0]), len(mats[0][0])
    rows = []
    for idx in itertools.product(range(n), repeat=len(mats)):
        row = []
        for q in range(c):
            prod = 1
            for M, p in zip(mats, idx):
                prod *= M[p][q]
            row.append(prod)
        rows.append(row)
    return rows
