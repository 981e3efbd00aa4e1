import hashlib
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from costore.ids import ID_LEN, ObjectID


def test_id_len_is_twenty():
    assert ID_LEN == 20


def test_from_name_is_sha1():
    # independent oracle: hashlib directly
    for name in ("", "a", "grad-42", "x" * 1000):
        assert ObjectID.from_name(name).raw == hashlib.sha1(name.encode()).digest()


def test_from_name_deterministic_and_distinct():
    a = ObjectID.from_name("alpha")
    assert a == ObjectID.from_name("alpha")
    assert a != ObjectID.from_name("beta")


def test_wrong_length_rejected():
    with pytest.raises(ValueError):
        ObjectID(b"short")
    with pytest.raises(ValueError):
        ObjectID(b"x" * 21)


def test_random_uses_supplied_rng_deterministically():
    a = ObjectID.random(random.Random(7))
    b = ObjectID.random(random.Random(7))
    c = ObjectID.random(random.Random(8))
    assert a == b != c
    assert len(a.raw) == ID_LEN


def test_hex_and_str():
    oid = ObjectID(bytes(range(20)))
    assert oid.hex == bytes(range(20)).hex()
    # short display form: first 12 hex chars
    assert str(oid) == oid.hex[:12]


def test_hashable_and_usable_as_dict_key():
    d = {ObjectID.from_name("k"): 1}
    assert d[ObjectID.from_name("k")] == 1


@given(st.binary(min_size=20, max_size=20))
def test_shard_of_matches_le_u64_of_first_8_bytes(raw):
    oid = ObjectID(raw)
    expect = int.from_bytes(raw[:8], "little")
    for count in (1, 2, 7, 8, 64):
        assert oid.shard_of(count) == expect % count


@given(st.binary(min_size=20, max_size=20), st.integers(1, 1024))
def test_shard_of_in_range(raw, count):
    assert 0 <= ObjectID(raw).shard_of(count) < count
