"""Streaming combine kernels.

``combine_into(dst, src, op, dtype)`` folds ``src`` into ``dst`` elementwise
over equal-length contiguous byte buffers. Two interchangeable backends: a
compiled extension (built from ``_accel.pyx``) and a numpy fallback. The
extension is preferred when importable; set ``COSTORE_KERNELS=numpy`` or
``COSTORE_KERNELS=accel`` to force one.
"""

from __future__ import annotations

import os
from typing import Final

from . import numpy_backend

__all__ = [
    "OP_SUM",
    "OP_MIN",
    "OP_MAX",
    "DTYPE_F32",
    "DTYPE_F64",
    "DTYPE_I32",
    "DTYPE_I64",
    "OPS",
    "DTYPES",
    "dtype_itemsize",
    "combine_into",
    "combine_with_backend",
    "active_backend",
    "available_backends",
]

OP_SUM: Final = 1
OP_MIN: Final = 2
OP_MAX: Final = 3

DTYPE_F32: Final = 1
DTYPE_F64: Final = 2
DTYPE_I32: Final = 3
DTYPE_I64: Final = 4

OPS: Final = {"sum": OP_SUM, "min": OP_MIN, "max": OP_MAX}
DTYPES: Final = {"f32": DTYPE_F32, "f64": DTYPE_F64, "i32": DTYPE_I32, "i64": DTYPE_I64}

_ITEMSIZE = {DTYPE_F32: 4, DTYPE_F64: 8, DTYPE_I32: 4, DTYPE_I64: 8}
_CAST_CODE = {DTYPE_F32: "f", DTYPE_F64: "d", DTYPE_I32: "i", DTYPE_I64: "q"}

try:
    from . import _accel
except ImportError:
    _accel = None

_FORCED = os.environ.get("COSTORE_KERNELS", "").strip().lower()
if _FORCED == "numpy":
    _BACKEND = "numpy"
elif _FORCED == "accel":
    if _accel is None:
        raise ImportError("COSTORE_KERNELS=accel but the extension is not built")
    _BACKEND = "accel"
else:
    _BACKEND = "accel" if _accel is not None else "numpy"


def dtype_itemsize(dtype: int) -> int:
    return _ITEMSIZE[dtype]


def active_backend() -> str:
    return _BACKEND


def available_backends() -> tuple[str, ...]:
    return ("accel", "numpy") if _accel is not None else ("numpy",)


def _accel_combine(dst, src, op: int, dtype: int) -> None:
    code = _CAST_CODE[dtype]
    d = memoryview(dst).cast(code)
    s = memoryview(src).cast(code)
    if dtype == DTYPE_F32:
        _accel.combine_f32(d, s, op)
    elif dtype == DTYPE_F64:
        _accel.combine_f64(d, s, op)
    elif dtype == DTYPE_I32:
        _accel.combine_i32(d, s, op)
    else:
        _accel.combine_i64(d, s, op)


def combine_with_backend(backend: str, dst, src, op: int, dtype: int) -> None:
    if len(dst) != len(src):
        raise ValueError("length mismatch")
    if len(dst) % _ITEMSIZE[dtype]:
        raise ValueError("buffer length not a multiple of the element size")
    if backend == "accel":
        if _accel is None:
            raise RuntimeError("accel backend not built")
        _accel_combine(dst, src, op, dtype)
    elif backend == "numpy":
        numpy_backend.combine_into(dst, src, op, dtype)
    else:
        raise ValueError(f"unknown backend {backend!r}")


def combine_into(dst, src, op: int, dtype: int) -> None:
    """Fold ``src`` into ``dst`` in place: dst[i] = op(dst[i], src[i])."""
    combine_with_backend(_BACKEND, dst, src, op, dtype)
