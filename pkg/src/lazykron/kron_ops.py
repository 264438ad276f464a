"""Product kernels behind the batched flush and the low-rank query.

Factor matrices are plain 2-d numpy arrays.  Every routine takes the
semiring explicitly so the counting semiring sees each scalar operation.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .semiring import REAL

TILE = 32


def face_split(mats, semiring=REAL, cols=None):
    """Face-splitting (row-wise Kronecker) product of ``n x c`` matrices.

    Row ``(p_1, ..., p_m)`` (row-major, ``p_1`` most significant) of the
    ``n**m x c`` result holds ``prod_j mats[j][p_j, :]``.  With no factors
    the result is the ``1 x cols`` row of ones.  Costs ``n**m * c * (m-1)``
    multiplications for ``m >= 1``.
    """
    mats = [semiring.asarray(M) for M in mats]
    if not mats:
        if cols is None:
            raise DimensionMismatch("cols is required for an empty face-split")
        return semiring.ones((1, cols))
    n, c = mats[0].shape
    if cols is not None and cols != c:
        raise DimensionMismatch(f"expected {cols} columns, got {c}")
    for M in mats:
        if M.shape != (n, c):
            raise DimensionMismatch(f"factor of shape {M.shape}, expected {(n, c)}")
    m = len(mats)
    if m == 1:
        return mats[0].copy()
    full = (n,) * m + (c,)
    prod = None
    for j, M in enumerate(mats):
        view = M.reshape((1,) * j + (n,) + (1,) * (m - j - 1) + (c,))
        expanded = np.broadcast_to(view, full)
        prod = np.array(expanded) if prod is None else semiring.mul(prod, expanded)
    return prod.reshape(n ** m, c)


def hadamard_rows(rows, semiring=REAL):
    """Entrywise product of equal-length vectors."""
    rows = [semiring.asarray(r) for r in rows]
    if not rows:
        raise DimensionMismatch("hadamard_rows needs at least one row")
    out = rows[0].copy()
    for r in rows[1:]:
        if r.shape != out.shape:
            raise DimensionMismatch(f"row of shape {r.shape}, expected {out.shape}")
        out = semiring.mul(out, r)
    return out


def scale_columns(W, w, semiring=REAL):
    """``W @ diag(w)``: column q of W multiplied by ``w[q]``."""
    W = semiring.asarray(W)
    w = semiring.asarray(w)
    if W.ndim != 2 or w.shape != (W.shape[1],):
        raise DimensionMismatch(f"cannot scale {W.shape} columns by {w.shape}")
    return semiring.mul(W, np.broadcast_to(w, W.shape))


def naive_matmul_bt(B, C, semiring=REAL):
    """Reference ``B @ C.T`` as ``c`` rank-1 accumulations: exactly ``a*b*c`` mults."""
    a, c = B.shape
    b = C.shape[0]
    out = semiring.zeros((a, b))
    for q in range(c):
        col = np.broadcast_to(B[:, q, None], (a, b))
        row = np.broadcast_to(C[None, :, q], (a, b))
        out = semiring.add(out, semiring.mul(col, row))
    return out


def blocked_matmul_bt(B, C, semiring=REAL, tile=TILE):
    """Tiled ``B @ C.T``; each tile pair goes through ``semiring.dot``."""
    a, c = B.shape
    b = C.shape[0]
    out = semiring.zeros((a, b))
    for i in range(0, a, tile):
        for j in range(0, b, tile):
            acc = out[i:i + tile, j:j + tile]
            for p in range(0, c, tile):
                block = semiring.dot(B[i:i + tile, p:p + tile], C[j:j + tile, p:p + tile])
                acc = semiring.add(acc, block)
            out[i:i + tile, j:j + tile] = acc
    return out


KERNELS = {
    "naive": naive_matmul_bt,
    "blocked": blocked_matmul_bt,
}


def matmul_bt(B, C, semiring=REAL, kernel="naive"):
    """``B @ C.T`` over the semiring using a registered kernel."""
    B = semiring.asarray(B)
    C = semiring.asarray(C)
    if B.ndim != 2 or C.ndim != 2 or B.shape[1] != C.shape[1]:
        raise DimensionMismatch(f"inner dimensions differ: {B.shape} vs {C.shape}")
    fn = KERNELS[kernel] if isinstance(kernel, str) else kernel
    return fn(B, C, semiring)
