"""Lazy-update maintenance of a dynamic sum of Kronecker products."""
from .errors import (
    CapacityExceeded,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidSplit,
    LazyKronError,
    ModeOutOfRange,
    ShapeMismatch,
)
from .hinted_mv import HintedMvInstance, PhaseReport, direct_evaluation, hmv_run, hmv_sweep
from .kron_ops import face_split, hadamard_rows, matmul_bt, scale_columns
from .lazy import LazyKron, LazyParams
from .oracle import EagerKron
from .semiring import BOOL, REAL, BoolSemiring, CountingSemiring, RealSemiring, Semiring
from .tensor import (
    DenseTensor,
    QuerySpec,
    Shape,
    dematricize,
    matricize,
    outer_accumulate,
    tensor_add_assign,
    tensor_new,
    tensor_slice,
)

__version__ = "0.1.0"
