import pytest

from costore.errors import (
    CapacityExceeded,
    ObjectDeleted,
    ObjectExists,
    ObjectNotFound,
    SizeMismatch,
)
from costore.ids import ObjectID
from costore.store import LocalStore

A = ObjectID.from_name("a")
B = ObjectID.from_name("b")
C = ObjectID.from_name("c")


def test_put_and_get_roundtrip():
    s = LocalStore()
    s.put(A, b"hello")
    entry = s.get(A)
    assert entry.complete
    assert bytes(entry.view(0, entry.size)) == b"hello"
    assert s.used_bytes == 5
    assert A in s and len(s) == 1


def test_duplicate_put_rejected():
    s = LocalStore()
    s.put(A, b"x")
    with pytest.raises(ObjectExists):
        s.put(A, b"y")
    with pytest.raises(ObjectExists):
        s.create_for_write(A, 4)


def test_missing_get_raises():
    s = LocalStore()
    with pytest.raises(ObjectNotFound):
        s.get(A)
    assert s.peek(A) is None


def test_streamed_write_watermark_progression():
    s = LocalStore()
    entry = s.create_for_write(A, 8 * 1024 * 1024)
    assert entry.watermark == 0 and not entry.complete
    entry.write_block(0, b"\x01" * (4 * 1024 * 1024))
    assert entry.watermark == 4 * 1024 * 1024 and not entry.complete
    # readers may consume everything below the watermark while data streams
    assert len(entry.view(0, entry.watermark)) == 4 * 1024 * 1024
    entry.write_block(4 * 1024 * 1024, b"\x02" * (4 * 1024 * 1024))
    assert entry.watermark == 8 * 1024 * 1024 and entry.complete


def test_non_sequential_write_rejected():
    s = LocalStore()
    entry = s.create_for_write(A, 16)
    entry.write_block(0, b"12345678")
    with pytest.raises(ValueError):
        entry.write_block(4, b"xxxx")  # duplicate range
    with pytest.raises(ValueError):
        entry.write_block(12, b"xxxx")  # gap


def test_write_past_declared_size_rejected():
    s = LocalStore()
    entry = s.create_for_write(A, 4)
    with pytest.raises(SizeMismatch):
        entry.write_block(0, b"12345")


def test_read_past_watermark_rejected():
    s = LocalStore()
    entry = s.create_for_write(A, 8)
    entry.write_block(0, b"1234")
    with pytest.raises(ValueError):
        entry.view(0, 6)


def test_view_is_readonly():
    s = LocalStore()
    s.put(A, b"abcd")
    view = s.get(A).view(0, 4)
    with pytest.raises(TypeError):
        view[0] = 0


def test_lru_eviction_order_and_pinned_survival():
    s = LocalStore(capacity_bytes=30)
    s.put(A, b"a" * 10)
    s.put(B, b"b" * 10, pin=True)
    s.put(C, b"c" * 10)
    s.get(A)  # A now more recently used than C
    s.put(ObjectID.from_name("d"), b"d" * 10)  # needs 10 bytes: evict LRU=C
    assert s.pending_evictions == [C]
    assert A in s and B in s and C not in s


def test_all_pinned_raises_capacity():
    s = LocalStore(capacity_bytes=10)
    s.put(A, b"a" * 10, pin=True)
    with pytest.raises(CapacityExceeded):
        s.put(B, b"b" * 5)


def test_oversized_entry_rejected_outright():
    s = LocalStore(capacity_bytes=10)
    with pytest.raises(CapacityExceeded):
        s.create_for_write(A, 11)


def test_partial_entries_are_not_evictable():
    s = LocalStore(capacity_bytes=10)
    s.create_for_write(A, 6)  # incomplete; must not be evicted
    with pytest.raises(CapacityExceeded):
        s.put(B, b"b" * 6)


def test_discard_and_delete_semantics():
    s = LocalStore()
    entry = s.put(A, b"abc")
    assert s.discard(A) is True
    assert entry.discarded
    assert s.discard(A) is False
    # discard is local: the id may come back
    s.put(A, b"abc")

    s.delete(A)
    assert s.is_tombstoned(A)
    with pytest.raises(ObjectDeleted):
        s.get(A)
    with pytest.raises(ObjectDeleted):
        s.put(A, b"new")
    with pytest.raises(ObjectDeleted):
        s.create_for_write(A, 3)


def test_discarded_entry_rejects_writes():
    s = LocalStore()
    entry = s.create_for_write(A, 8)
    s.discard(A)
    with pytest.raises(ObjectNotFound):
        entry.write_block(0, b"1234")


def test_pin_unpin_counting():
    s = LocalStore()
    s.put(A, b"x")
    s.pin(A)
    s.pin(A)
    s.unpin(A)
    s.unpin(A)
    with pytest.raises(ValueError):
        s.unpin(A)


def test_evict_unpinned_to_target():
    s = LocalStore(capacity_bytes=100)
    s.put(A, b"a" * 30)
    s.put(B, b"b" * 30)
    s.put(C, b"c" * 30, pin=True)
    evicted = s.evict_unpinned(60)
    assert evicted == [A]  # oldest unpinned first, stop at the target
    assert s.used_bytes == 60
    assert s.evict_unpinned(40) == [B]  # pinned C survives
    assert s.used_bytes == 30


def test_used_bytes_accounting():
    s = LocalStore()
    s.put(A, b"a" * 7)
    e = s.create_for_write(B, 9)
    assert s.used_bytes == 16  # reserved at declared size, not watermark
    e.write_block(0, b"123456789")
    assert s.used_bytes == 16
    s.discard(A)
    assert s.used_bytes == 9
