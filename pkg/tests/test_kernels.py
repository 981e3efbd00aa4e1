import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from costore import kernels

NP_DTYPE = {"f32": np.float32, "f64": np.float64, "i32": np.int32, "i64": np.int64}
ORACLE = {"sum": np.add, "min": np.minimum, "max": np.maximum}

BACKENDS = kernels.available_backends()


def test_accel_extension_is_built_and_active_by_default():
    # the compiled twin must be importable in this environment
    assert "accel" in BACKENDS
    assert kernels.active_backend() in BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("op", ["sum", "min", "max"])
@pytest.mark.parametrize("dtype", ["f32", "f64", "i32", "i64"])
def test_combine_matches_numpy_oracle(backend, op, dtype):
    rng = np.random.default_rng(hash((backend, op, dtype)) % 2**32)
    np_dt = NP_DTYPE[dtype]
    if np.issubdtype(np_dt, np.integer):
        a = rng.integers(-10**6, 10**6, size=4097, dtype=np_dt)
        b = rng.integers(-10**6, 10**6, size=4097, dtype=np_dt)
    else:
        a = rng.standard_normal(4097).astype(np_dt)
        b = rng.standard_normal(4097).astype(np_dt)
    want = ORACLE[op](a, b)
    dst = bytearray(a.tobytes())
    kernels.combine_with_backend(
        backend, dst, b.tobytes(), kernels.OPS[op], kernels.DTYPES[dtype]
    )
    got = np.frombuffer(dst, dtype=np_dt)
    assert np.array_equal(got, want)


@given(
    arrays(np.int64, st.integers(0, 200), elements=st.integers(-(2**40), 2**40)),
    st.sampled_from(["sum", "min", "max"]),
)
def test_backends_agree_i64(a, op):
    rng = np.random.default_rng(1)
    b = rng.integers(-(2**40), 2**40, size=len(a), dtype=np.int64)
    results = []
    for backend in BACKENDS:
        dst = bytearray(a.tobytes())
        kernels.combine_with_backend(
            backend, dst, b.tobytes(), kernels.OPS[op], kernels.DTYPE_I64
        )
        results.append(bytes(dst))
    assert all(r == results[0] for r in results)


@given(
    arrays(
        np.float64,
        st.integers(0, 200),
        elements=st.floats(-1e12, 1e12, allow_nan=False, width=64),
    ),
    st.sampled_from(["sum", "min", "max"]),
)
def test_backends_agree_f64(a, op):
    rng = np.random.default_rng(2)
    b = rng.standard_normal(len(a))
    results = []
    for backend in BACKENDS:
        dst = bytearray(a.tobytes())
        kernels.combine_with_backend(
            backend, dst, b.tobytes(), kernels.OPS[op], kernels.DTYPE_F64
        )
        results.append(np.frombuffer(bytes(dst), dtype=np.float64))
    for r in results[1:]:
        assert np.array_equal(r, results[0])


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        kernels.combine_into(bytearray(8), bytes(16), kernels.OP_SUM, kernels.DTYPE_I64)


def test_ragged_buffer_rejected():
    with pytest.raises(ValueError):
        kernels.combine_into(bytearray(7), bytes(7), kernels.OP_SUM, kernels.DTYPE_I64)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.combine_with_backend(
            "fortran", bytearray(8), bytes(8), kernels.OP_SUM, kernels.DTYPE_I64
        )


def test_dtype_itemsize():
    assert kernels.dtype_itemsize(kernels.DTYPE_F32) == 4
    assert kernels.dtype_itemsize(kernels.DTYPE_F64) == 8
    assert kernels.dtype_itemsize(kernels.DTYPE_I32) == 4
    assert kernels.dtype_itemsize(kernels.DTYPE_I64) == 8


def test_combine_into_accumulates_in_place():
    acc = np.zeros(16, dtype=np.int64)
    buf = bytearray(acc.tobytes())
    for k in range(1, 5):
        src = np.full(16, k, dtype=np.int64)
        kernels.combine_into(buf, src.tobytes(), kernels.OP_SUM, kernels.DTYPE_I64)
    assert np.array_equal(np.frombuffer(buf, dtype=np.int64), np.full(16, 10))
