"""Numpy implementation of the combine kernels."""

from __future__ import annotations

import numpy as np

_NP_DTYPE = {1: np.float32, 2: np.float64, 3: np.int32, 4: np.int64}
_UFUNC = {1: np.add, 2: np.minimum, 3: np.maximum}


def combine_into(dst, src, op: int, dtype: int) -> None:
    d = np.frombuffer(dst, dtype=_NP_DTYPE[dtype])
    s = np.frombuffer(src, dtype=_NP_DTYPE[dtype])
    if d.shape != s.shape:
        raise ValueError("length mismatch")
    _UFUNC[op](d, s, out=d)
