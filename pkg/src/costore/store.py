"""Per-node object store.

Entries are immutable once complete. An entry under construction grows a
contiguous prefix; ``watermark`` is the number of valid leading bytes and
readers may consume anything below it while the rest is still arriving.
Completed, unpinned entries are evictable in LRU order (logical clock, no
wall time).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CapacityExceeded,
    ObjectDeleted,
    ObjectExists,
    ObjectNotFound,
    SizeMismatch,
)
from .ids import ObjectID

__all__ = ["ObjectEntry", "LocalStore"]


@dataclass(slots=True, eq=False)
class ObjectEntry:
    object_id: ObjectID
    size: int
    buf: bytearray = field(repr=False)
    watermark: int = 0
    pin_count: int = 0
    last_use: int = 0
    discarded: bool = False

    @property
    def complete(self) -> bool:
        return self.watermark == self.size

    @property
    def pinned(self) -> bool:
        return self.pin_count > 0

    def write_block(self, offset: int, data) -> None:
        """Append one block; writes must be sequential at the watermark."""
        if self.discarded:
            raise ObjectNotFound(f"{self.object_id} was discarded")
        if offset != self.watermark:
            raise ValueError(
                f"non-sequential write at {offset}, watermark {self.watermark}"
            )
        end = offset + len(data)
        if end > self.size:
            raise SizeMismatch(f"write past declared size {self.size}")
        self.buf[offset:end] = data
        self.watermark = end

    def view(self, start: int = 0, end: int | None = None) -> memoryview:
        """Read-only view of bytes below the watermark."""
        stop = self.watermark if end is None else end
        if stop > self.watermark:
            raise ValueError("read past watermark")
        return memoryview(self.buf)[start:stop].toreadonly()


class LocalStore:
    """Object entries of one node. Not thread-safe; callers serialize."""

    def __init__(self, capacity_bytes: int = 0):
        self.capacity_bytes = capacity_bytes  # 0 disables the limit
        self._entries: dict[ObjectID, ObjectEntry] = {}
        self._tombstones: set[ObjectID] = set()
        self._clock = 0
        self._used = 0
        self.pending_evictions: list[ObjectID] = []

    def __contains__(self, object_id: ObjectID) -> bool:
        return object_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def used_bytes(self) -> int:
        return self._used

    def _tick(self) -> int:
        self._clock += 1
        return self._clock

    def _make_room(self, need: int) -> None:
        if self.capacity_bytes <= 0:
            return
        if need > self.capacity_bytes:
            raise CapacityExceeded(f"entry of {need} bytes exceeds store capacity")
        if self._used + need <= self.capacity_bytes:
            return
        victims = sorted(
            (e for e in self._entries.values() if e.complete and not e.pinned),
            key=lambda e: e.last_use,
        )
        for entry in victims:
            self._drop(entry.object_id)
            self.pending_evictions.append(entry.object_id)
            if self._used + need <= self.capacity_bytes:
                return
        raise CapacityExceeded(
            f"cannot free {need} bytes: {self._used} in use, all pinned or partial"
        )

    def _drop(self, object_id: ObjectID) -> None:
        entry = self._entries.pop(object_id)
        self._used -= entry.size
        entry.discarded = True

    def put(self, object_id: ObjectID, data, pin: bool = False) -> ObjectEntry:
        """Insert a complete object in one shot."""
        if object_id in self._tombstones:
            raise ObjectDeleted(f"{object_id} is tombstoned")
        if object_id in self._entries:
            raise ObjectExists(f"{object_id} already present")
        self._make_room(len(data))
        entry = ObjectEntry(
            object_id=object_id,
            size=len(data),
            buf=bytearray(data),
            watermark=len(data),
            pin_count=1 if pin else 0,
            last_use=self._tick(),
        )
        self._entries[object_id] = entry
        self._used += entry.size
        return entry

    def create_for_write(self, object_id: ObjectID, size: int) -> ObjectEntry:
        """Preallocate an entry to be filled sequentially."""
        if object_id in self._tombstones:
            raise ObjectDeleted(f"{object_id} is tombstoned")
        if object_id in self._entries:
            raise ObjectExists(f"{object_id} already present")
        self._make_room(size)
        entry = ObjectEntry(
            object_id=object_id,
            size=size,
            buf=bytearray(size),
            last_use=self._tick(),
        )
        self._entries[object_id] = entry
        self._used += size
        return entry

    def get(self, object_id: ObjectID) -> ObjectEntry:
        if object_id in self._tombstones:
            raise ObjectDeleted(f"{object_id} is tombstoned")
        entry = self._entries.get(object_id)
        if entry is None:
            raise ObjectNotFound(f"{object_id} not in store")
        entry.last_use = self._tick()
        return entry

    def peek(self, object_id: ObjectID) -> ObjectEntry | None:
        """Like get, but no LRU touch and None when absent."""
        return self._entries.get(object_id)

    def discard(self, object_id: ObjectID) -> bool:
        """Drop a local copy (not a cluster-wide delete)."""
        if object_id in self._entries:
            self._drop(object_id)
            return True
        return False

    def delete(self, object_id: ObjectID) -> None:
        """Cluster-wide delete arrived: drop bytes and tombstone the id."""
        if object_id in self._entries:
            self._drop(object_id)
        self._tombstones.add(object_id)

    def is_tombstoned(self, object_id: ObjectID) -> bool:
        return object_id in self._tombstones

    def pin(self, object_id: ObjectID) -> None:
        self.get(object_id).pin_count += 1

    def unpin(self, object_id: ObjectID) -> None:
        entry = self.get(object_id)
        if entry.pin_count <= 0:
            raise ValueError(f"{object_id} is not pinned")
        entry.pin_count -= 1

    def evict_unpinned(self, max_bytes: int | None = None) -> list[ObjectID]:
        """Evict complete unpinned entries (LRU first) until the store uses
        at most ``max_bytes`` (default: the capacity limit)."""
        limit = self.capacity_bytes if max_bytes is None else max_bytes
        if limit <= 0:
            return []
        evicted: list[ObjectID] = []
        victims = sorted(
            (e for e in self._entries.values() if e.complete and not e.pinned),
            key=lambda e: e.last_use,
        )
        for entry in victims:
            if self._used <= limit:
                break
            self._drop(entry.object_id)
            evicted.append(entry.object_id)
        return evicted

    def ids(self) -> list[ObjectID]:
        return list(self._entries.keys())
