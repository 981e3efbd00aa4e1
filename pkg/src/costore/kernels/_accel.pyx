# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Elementwise combine loops over contiguous buffers.

Compiled twin of the numpy fallback in costore.kernels.numpy_backend; the
package selects one at import time.
"""

from libc.stdint cimport int32_t, int64_t

ctypedef fused num_t:
    float
    double
    int32_t
    int64_t

OP_SUM = 1
OP_MIN = 2
OP_MAX = 3


cdef void _loop(num_t[::1] dst, const num_t[::1] src, int op) noexcept nogil:
    cdef Py_ssize_t i, n = dst.shape[0]
    if op == 1:
        for i in range(n):
            dst[i] = dst[i] + src[i]
    elif op == 2:
        for i in range(n):
            if src[i] < dst[i]:
                dst[i] = src[i]
    else:
        for i in range(n):
            if src[i] > dst[i]:
                dst[i] = src[i]


def combine_f32(float[::1] dst, const float[::1] src, int op):
    if dst.shape[0] != src.shape[0]:
        raise ValueError("length mismatch")
    with nogil:
        _loop[float](dst, src, op)


def combine_f64(double[::1] dst, const double[::1] src, int op):
    if dst.shape[0] != src.shape[0]:
        raise ValueError("length mismatch")
    with nogil:
        _loop[double](dst, src, op)


def combine_i32(int32_t[::1] dst, const int32_t[::1] src, int op):
    if dst.shape[0] != src.shape[0]:
        raise ValueError("length mismatch")
    with nogil:
        _loop[int32_t](dst, src, op)


def combine_i64(int64_t[::1] dst, const int64_t[::1] src, int op):
    if dst.shape[0] != src.shape[0]:
        raise ValueError("length mismatch")
    with nogil:
        _loop[int64_t](dst, src, op)
