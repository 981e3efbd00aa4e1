"""Object identifiers.

An :class:`ObjectID` is an opaque 20-byte value. Ids derived from names use
SHA-1 so that independently started nodes agree on the id of a shared name.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Final

__all__ = ["ID_LEN", "ObjectID"]

ID_LEN: Final = 20


@dataclass(frozen=True, slots=True)
class ObjectID:
    raw: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.raw, bytes) or len(self.raw) != ID_LEN:
            raise ValueError(f"ObjectID requires exactly {ID_LEN} bytes")

    @classmethod
    def from_name(cls, name: str) -> "ObjectID":
        return cls(hashlib.sha1(name.encode("utf-8")).digest())

    @classmethod
    def random(cls, rng: random.Random) -> "ObjectID":
        return cls(rng.getrandbits(8 * ID_LEN).to_bytes(ID_LEN, "little"))

    def shard_of(self, shard_count: int) -> int:
        """Deterministic shard index in ``[0, shard_count)``."""
        return int.from_bytes(self.raw[:8], "little") % shard_count

    @property
    def hex(self) -> str:
        return self.raw.hex()

    def __str__(self) -> str:
        return self.raw.hex()[:12]

    def __repr__(self) -> str:
        return f"ObjectID({self.raw.hex()[:12]})"
