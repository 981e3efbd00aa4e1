"""Framed wire protocol.

Every frame is ``magic(4) | msg_type(u8) | body_len(u64 LE) | body``. The
magic is fixed to ``48 4F 50 4C``. Bodies use little-endian integers, 20-byte
raw object ids, ``u16``-length-prefixed UTF-8 strings and ``u32``-length-
prefixed byte blobs.

The same message objects travel over both backends: the TCP transport
serializes them with :func:`encode_frame`, while the simulator passes the
objects directly and charges :func:`wire_length` bytes to the link. Chunk
payloads may be ``memoryview`` slices; they are only copied when a real
socket needs contiguous bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Final, Iterator, Union

from .errors import WireError
from .ids import ID_LEN, ObjectID

__all__ = [
    "MAGIC",
    "HEADER_LEN",
    "MSG_PULL",
    "MSG_CHUNK",
    "MSG_TRANSFER_COMPLETE",
    "MSG_ABORT",
    "MSG_DIR_PUBLISH_PARTIAL",
    "MSG_DIR_PUBLISH_COMPLETE",
    "MSG_DIR_CHECKOUT",
    "MSG_DIR_REPLY",
    "MSG_DIR_LOCATION_OP",
    "MSG_DIR_SUBSCRIBE",
    "MSG_DIR_EVENT",
    "MSG_REDUCE_CTL",
    "MSG_REDUCE_CHUNK",
    "MSG_REDUCE_INVALIDATE",
    "ABORT_BUSY",
    "ABORT_GONE",
    "ABORT_DELETED",
    "ABORT_RESTARTED",
    "ST_ACK",
    "ST_GRANT",
    "ST_INLINE",
    "ST_DELETED",
    "ST_SIZE_MISMATCH",
    "ST_UNKNOWN_OP",
    "ST_COMMITTED",
    "LOC_RETURN",
    "LOC_REMOVE",
    "LOC_DELETE",
    "LOC_PURGE_NODE",
    "LOC_INVALIDATE_PARTIALS",
    "EVT_PARTIAL",
    "EVT_COMPLETE",
    "EVT_REMOVED",
    "EVT_DELETED",
    "EVT_DROP_PARTIAL",
    "Pull",
    "Chunk",
    "TransferComplete",
    "Abort",
    "DirPublishPartial",
    "DirPublishComplete",
    "DirCheckout",
    "DirReply",
    "DirLocationOp",
    "DirSubscribe",
    "DirEvent",
    "ReduceAssign",
    "ParentBind",
    "ChildBind",
    "FetchHint",
    "Release",
    "RestartNotice",
    "ReduceChunk",
    "ReduceInvalidate",
    "Message",
    "encode_frame",
    "decode_frame",
    "wire_length",
    "FrameReader",
]

MAGIC: Final = bytes((0x48, 0x4F, 0x50, 0x4C))
_HEADER = struct.Struct("<4sBQ")
HEADER_LEN: Final = _HEADER.size  # 13

MSG_PULL: Final = 0x01
MSG_CHUNK: Final = 0x02
MSG_TRANSFER_COMPLETE: Final = 0x03
MSG_ABORT: Final = 0x04
MSG_DIR_PUBLISH_PARTIAL: Final = 0x10
MSG_DIR_PUBLISH_COMPLETE: Final = 0x11
MSG_DIR_CHECKOUT: Final = 0x12
MSG_DIR_REPLY: Final = 0x13
MSG_DIR_LOCATION_OP: Final = 0x14
MSG_DIR_SUBSCRIBE: Final = 0x15
MSG_DIR_EVENT: Final = 0x16
MSG_REDUCE_CTL: Final = 0x20
MSG_REDUCE_CHUNK: Final = 0x21
MSG_REDUCE_INVALIDATE: Final = 0x22

# Abort reasons.
ABORT_BUSY: Final = 1
ABORT_GONE: Final = 2
ABORT_DELETED: Final = 3
ABORT_RESTARTED: Final = 4

# DirReply statuses.
ST_ACK: Final = 0
ST_GRANT: Final = 1
ST_INLINE: Final = 2
ST_DELETED: Final = 4
ST_SIZE_MISMATCH: Final = 5
ST_UNKNOWN_OP: Final = 6
ST_COMMITTED: Final = 7

# DirLocationOp modes.
LOC_RETURN: Final = 0
LOC_REMOVE: Final = 1
LOC_DELETE: Final = 2
LOC_PURGE_NODE: Final = 3
LOC_INVALIDATE_PARTIALS: Final = 4

# DirEvent kinds.
EVT_PARTIAL: Final = 1
EVT_COMPLETE: Final = 2
EVT_REMOVED: Final = 3
EVT_DELETED: Final = 4
EVT_DROP_PARTIAL: Final = 5

# Reduce control sub-kinds.
_SUB_ASSIGN: Final = 0
_SUB_PARENT_BIND: Final = 1
_SUB_CHILD_BIND: Final = 2
_SUB_FETCH_HINT: Final = 3
_SUB_RELEASE: Final = 4
_SUB_RESTART_NOTICE: Final = 5

Payload = Union[bytes, bytearray, memoryview]

_u8 = struct.Struct("<B")
_u16 = struct.Struct("<H")
_u32 = struct.Struct("<I")
_u64 = struct.Struct("<Q")


def _pack_str(s: str) -> bytes:
    b = s.encode("utf-8")
    if len(b) > 0xFFFF:
        raise WireError("string field too long")
    return _u16.pack(len(b)) + b


def _str_len(s: str) -> int:
    return 2 + len(s.encode("utf-8"))


class _Reader:
    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise WireError("truncated frame body")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self._take(1)[0]

    def u16(self) -> int:
        return _u16.unpack(self._take(2))[0]

    def u32(self) -> int:
        return _u32.unpack(self._take(4))[0]

    def u64(self) -> int:
        return _u64.unpack(self._take(8))[0]

    def oid(self) -> ObjectID:
        return ObjectID(self._take(ID_LEN))

    def str_(self) -> str:
        n = self.u16()
        return self._take(n).decode("utf-8")

    def blob(self) -> bytes:
        n = self.u32()
        return self._take(n)

    def rest(self) -> bytes:
        out = self.buf[self.pos :]
        self.pos = len(self.buf)
        return out

    def expect_end(self) -> None:
        if self.pos != len(self.buf):
            raise WireError("trailing bytes in frame body")


@dataclass(slots=True)
class Pull:
    """Request object bytes starting at ``offset``."""

    TYPE: ClassVar[int] = MSG_PULL
    object_id: ObjectID
    offset: int = 0

    def encode_body(self) -> bytes:
        return self.object_id.raw + _u64.pack(self.offset)

    def body_len(self) -> int:
        return ID_LEN + 8

    @classmethod
    def decode_body(cls, r: _Reader) -> "Pull":
        return cls(object_id=r.oid(), offset=r.u64())


@dataclass(slots=True)
class Chunk:
    """One contiguous range of object bytes."""

    TYPE: ClassVar[int] = MSG_CHUNK
    object_id: ObjectID
    offset: int
    payload: Payload

    def encode_body(self) -> bytes:
        return b"".join(
            (self.object_id.raw, _u64.pack(self.offset), bytes(self.payload))
        )

    def body_len(self) -> int:
        return ID_LEN + 8 + len(self.payload)

    @classmethod
    def decode_body(cls, r: _Reader) -> "Chunk":
        return cls(object_id=r.oid(), offset=r.u64(), payload=r.rest())


@dataclass(slots=True)
class TransferComplete:
    """Sender-side end of stream marker for an object transfer."""

    TYPE: ClassVar[int] = MSG_TRANSFER_COMPLETE
    object_id: ObjectID

    def encode_body(self) -> bytes:
        return self.object_id.raw

    def body_len(self) -> int:
        return ID_LEN

    @classmethod
    def decode_body(cls, r: _Reader) -> "TransferComplete":
        return cls(object_id=r.oid())


@dataclass(slots=True)
class Abort:
    TYPE: ClassVar[int] = MSG_ABORT
    object_id: ObjectID
    reason: int

    def encode_body(self) -> bytes:
        return self.object_id.raw + _u8.pack(self.reason)

    def body_len(self) -> int:
        return ID_LEN + 1

    @classmethod
    def decode_body(cls, r: _Reader) -> "Abort":
        return cls(object_id=r.oid(), reason=r.u8())


@dataclass(slots=True)
class DirPublishPartial:
    """Register ``node_id`` as a (possibly growing) copy of the object.

    Small objects ride along in ``inline`` and are cached shard-side.
    """

    TYPE: ClassVar[int] = MSG_DIR_PUBLISH_PARTIAL
    token: int
    object_id: ObjectID
    node_id: str
    size: int
    inline: bytes | None = None

    def encode_body(self) -> bytes:
        parts = [
            _u64.pack(self.token),
            self.object_id.raw,
            _pack_str(self.node_id),
            _u64.pack(self.size),
        ]
        if self.inline is None:
            parts.append(_u8.pack(0))
        else:
            parts.append(_u8.pack(1))
            parts.append(_u32.pack(len(self.inline)))
            parts.append(bytes(self.inline))
        return b"".join(parts)

    def body_len(self) -> int:
        n = 8 + ID_LEN + _str_len(self.node_id) + 8 + 1
        if self.inline is not None:
            n += 4 + len(self.inline)
        return n

    @classmethod
    def decode_body(cls, r: _Reader) -> "DirPublishPartial":
        token = r.u64()
        oid = r.oid()
        node = r.str_()
        size = r.u64()
        inline = r.blob() if r.u8() else None
        return cls(token=token, object_id=oid, node_id=node, size=size, inline=inline)


@dataclass(slots=True)
class DirPublishComplete:
    TYPE: ClassVar[int] = MSG_DIR_PUBLISH_COMPLETE
    token: int
    object_id: ObjectID
    node_id: str

    def encode_body(self) -> bytes:
        return _u64.pack(self.token) + self.object_id.raw + _pack_str(self.node_id)

    def body_len(self) -> int:
        return 8 + ID_LEN + _str_len(self.node_id)

    @classmethod
    def decode_body(cls, r: _Reader) -> "DirPublishComplete":
        return cls(token=r.u64(), object_id=r.oid(), node_id=r.str_())


@dataclass(slots=True)
class DirCheckout:
    """Ask the shard to loan out one sender location for a fetch."""

    TYPE: ClassVar[int] = MSG_DIR_CHECKOUT
    token: int
    object_id: ObjectID
    requester: str
    exclude: tuple[str, ...] = ()

    def encode_body(self) -> bytes:
        parts = [
            _u64.pack(self.token),
            self.object_id.raw,
            _pack_str(self.requester),
            _u16.pack(len(self.exclude)),
        ]
        parts.extend(_pack_str(x) for x in self.exclude)
        return b"".join(parts)

    def body_len(self) -> int:
        return (
            8
            + ID_LEN
            + _str_len(self.requester)
            + 2
            + sum(_str_len(x) for x in self.exclude)
        )

    @classmethod
    def decode_body(cls, r: _Reader) -> "DirCheckout":
        token = r.u64()
        oid = r.oid()
        requester = r.str_()
        exclude = tuple(r.str_() for _ in range(r.u16()))
        return cls(token=token, object_id=oid, requester=requester, exclude=exclude)


@dataclass(slots=True)
class DirReply:
    """Correlated reply to a directory request (matched by ``token``)."""

    TYPE: ClassVar[int] = MSG_DIR_REPLY
    token: int
    status: int
    sender: str = ""
    size: int = 0
    chain: tuple[str, ...] = ()
    inline: bytes | None = None

    def encode_body(self) -> bytes:
        parts = [_u64.pack(self.token), _u8.pack(self.status)]
        if self.status == ST_GRANT:
            parts.append(_pack_str(self.sender))
            parts.append(_u64.pack(self.size))
            parts.append(_u16.pack(len(self.chain)))
            parts.extend(_pack_str(x) for x in self.chain)
        elif self.status == ST_INLINE:
            payload = self.inline if self.inline is not None else b""
            parts.append(_u32.pack(len(payload)))
            parts.append(bytes(payload))
        return b"".join(parts)

    def body_len(self) -> int:
        n = 8 + 1
        if self.status == ST_GRANT:
            n += _str_len(self.sender) + 8 + 2 + sum(_str_len(x) for x in self.chain)
        elif self.status == ST_INLINE:
            n += 4 + (len(self.inline) if self.inline is not None else 0)
        return n

    @classmethod
    def decode_body(cls, r: _Reader) -> "DirReply":
        token = r.u64()
        status = r.u8()
        if status == ST_GRANT:
            sender = r.str_()
            size = r.u64()
            chain = tuple(r.str_() for _ in range(r.u16()))
            return cls(token=token, status=status, sender=sender, size=size, chain=chain)
        if status == ST_INLINE:
            return cls(token=token, status=status, inline=r.blob())
        return cls(token=token, status=status)


@dataclass(slots=True)
class DirLocationOp:
    """Location maintenance: return, remove, delete, purge, invalidate."""

    TYPE: ClassVar[int] = MSG_DIR_LOCATION_OP
    token: int
    mode: int
    object_id: ObjectID
    node_id: str = ""
    flag: bool = False

    def encode_body(self) -> bytes:
        return b"".join(
            (
                _u64.pack(self.token),
                _u8.pack(self.mode),
                self.object_id.raw,
                _pack_str(self.node_id),
                _u8.pack(1 if self.flag else 0),
            )
        )

    def body_len(self) -> int:
        return 8 + 1 + ID_LEN + _str_len(self.node_id) + 1

    @classmethod
    def decode_body(cls, r: _Reader) -> "DirLocationOp":
        return cls(
            token=r.u64(),
            mode=r.u8(),
            object_id=r.oid(),
            node_id=r.str_(),
            flag=bool(r.u8()),
        )


@dataclass(slots=True)
class DirSubscribe:
    TYPE: ClassVar[int] = MSG_DIR_SUBSCRIBE
    token: int
    object_id: ObjectID
    subscriber: str

    def encode_body(self) -> bytes:
        return _u64.pack(self.token) + self.object_id.raw + _pack_str(self.subscriber)

    def body_len(self) -> int:
        return 8 + ID_LEN + _str_len(self.subscriber)

    @classmethod
    def decode_body(cls, r: _Reader) -> "DirSubscribe":
        return cls(token=r.u64(), object_id=r.oid(), subscriber=r.str_())


@dataclass(slots=True)
class DirEvent:
    """Push notification to subscribers about a location change."""

    TYPE: ClassVar[int] = MSG_DIR_EVENT
    object_id: ObjectID
    kind: int
    node_id: str = ""
    size: int = 0

    def encode_body(self) -> bytes:
        return b"".join(
            (
                self.object_id.raw,
                _u8.pack(self.kind),
                _pack_str(self.node_id),
                _u64.pack(self.size),
            )
        )

    def body_len(self) -> int:
        return ID_LEN + 1 + _str_len(self.node_id) + 8

    @classmethod
    def decode_body(cls, r: _Reader) -> "DirEvent":
        return cls(object_id=r.oid(), kind=r.u8(), node_id=r.str_(), size=r.u64())


@dataclass(slots=True)
class ReduceAssign:
    """Bind a tree slot to a host: which source to stream, tree geometry."""

    TYPE: ClassVar[int] = MSG_REDUCE_CTL
    SUB: ClassVar[int] = _SUB_ASSIGN
    target: ObjectID
    slot: int
    epoch: int
    op: int
    dtype: int
    element_count: int
    num_sources: int
    degree: int
    block_bytes: int
    source_id: ObjectID
    coordinator: str

    def encode_body(self) -> bytes:
        return b"".join(
            (
                _u8.pack(self.SUB),
                self.target.raw,
                _u32.pack(self.slot),
                _u32.pack(self.epoch),
                _u8.pack(self.op),
                _u8.pack(self.dtype),
                _u64.pack(self.element_count),
                _u32.pack(self.num_sources),
                _u32.pack(self.degree),
                _u64.pack(self.block_bytes),
                self.source_id.raw,
                _pack_str(self.coordinator),
            )
        )

    def body_len(self) -> int:
        return 1 + ID_LEN + 4 + 4 + 1 + 1 + 8 + 4 + 4 + 8 + ID_LEN + _str_len(
            self.coordinator
        )

    @classmethod
    def decode_body(cls, r: _Reader) -> "ReduceAssign":
        return cls(
            target=r.oid(),
            slot=r.u32(),
            epoch=r.u32(),
            op=r.u8(),
            dtype=r.u8(),
            element_count=r.u64(),
            num_sources=r.u32(),
            degree=r.u32(),
            block_bytes=r.u64(),
            source_id=r.oid(),
            coordinator=r.str_(),
        )


@dataclass(slots=True)
class ParentBind:
    """Tell a slot where its parent lives; triggers (re)send from offset 0."""

    TYPE: ClassVar[int] = MSG_REDUCE_CTL
    SUB: ClassVar[int] = _SUB_PARENT_BIND
    target: ObjectID
    slot: int
    parent_host: str

    def encode_body(self) -> bytes:
        return b"".join(
            (
                _u8.pack(self.SUB),
                self.target.raw,
                _u32.pack(self.slot),
                _pack_str(self.parent_host),
            )
        )

    def body_len(self) -> int:
        return 1 + ID_LEN + 4 + _str_len(self.parent_host)

    @classmethod
    def decode_body(cls, r: _Reader) -> "ParentBind":
        return cls(target=r.oid(), slot=r.u32(), parent_host=r.str_())


@dataclass(slots=True)
class ChildBind:
    """Tell a slot which (slot, epoch, host) feeds one of its child inputs."""

    TYPE: ClassVar[int] = MSG_REDUCE_CTL
    SUB: ClassVar[int] = _SUB_CHILD_BIND
    target: ObjectID
    slot: int
    child_slot: int
    child_epoch: int
    child_host: str

    def encode_body(self) -> bytes:
        return b"".join(
            (
                _u8.pack(self.SUB),
                self.target.raw,
                _u32.pack(self.slot),
                _u32.pack(self.child_slot),
                _u32.pack(self.child_epoch),
                _pack_str(self.child_host),
            )
        )

    def body_len(self) -> int:
        return 1 + ID_LEN + 4 + 4 + 4 + _str_len(self.child_host)

    @classmethod
    def decode_body(cls, r: _Reader) -> "ChildBind":
        return cls(
            target=r.oid(),
            slot=r.u32(),
            child_slot=r.u32(),
            child_epoch=r.u32(),
            child_host=r.str_(),
        )


@dataclass(slots=True)
class FetchHint:
    """Ask a node to start fetching an object (allreduce fan-out)."""

    TYPE: ClassVar[int] = MSG_REDUCE_CTL
    SUB: ClassVar[int] = _SUB_FETCH_HINT
    target: ObjectID

    def encode_body(self) -> bytes:
        return _u8.pack(self.SUB) + self.target.raw

    def body_len(self) -> int:
        return 1 + ID_LEN

    @classmethod
    def decode_body(cls, r: _Reader) -> "FetchHint":
        return cls(target=r.oid())


@dataclass(slots=True)
class Release:
    """Reduce finished: slots may free retained aggregates for the target."""

    TYPE: ClassVar[int] = MSG_REDUCE_CTL
    SUB: ClassVar[int] = _SUB_RELEASE
    target: ObjectID

    def encode_body(self) -> bytes:
        return _u8.pack(self.SUB) + self.target.raw

    def body_len(self) -> int:
        return 1 + ID_LEN

    @classmethod
    def decode_body(cls, r: _Reader) -> "Release":
        return cls(target=r.oid())


@dataclass(slots=True)
class RestartNotice:
    """Slot host reports its own source entry was discarded mid-stream."""

    TYPE: ClassVar[int] = MSG_REDUCE_CTL
    SUB: ClassVar[int] = _SUB_RESTART_NOTICE
    target: ObjectID
    slot: int

    def encode_body(self) -> bytes:
        return _u8.pack(self.SUB) + self.target.raw + _u32.pack(self.slot)

    def body_len(self) -> int:
        return 1 + ID_LEN + 4

    @classmethod
    def decode_body(cls, r: _Reader) -> "RestartNotice":
        return cls(target=r.oid(), slot=r.u32())


@dataclass(slots=True)
class ReduceChunk:
    """Partial aggregate bytes flowing from a slot to its parent."""

    TYPE: ClassVar[int] = MSG_REDUCE_CHUNK
    target: ObjectID
    slot: int
    epoch: int
    offset: int
    payload: Payload = field(repr=False)

    def encode_body(self) -> bytes:
        return b"".join(
            (
                self.target.raw,
                _u32.pack(self.slot),
                _u32.pack(self.epoch),
                _u64.pack(self.offset),
                bytes(self.payload),
            )
        )

    def body_len(self) -> int:
        return ID_LEN + 4 + 4 + 8 + len(self.payload)

    @classmethod
    def decode_body(cls, r: _Reader) -> "ReduceChunk":
        return cls(
            target=r.oid(),
            slot=r.u32(),
            epoch=r.u32(),
            offset=r.u64(),
            payload=r.rest(),
        )


@dataclass(slots=True)
class ReduceInvalidate:
    """Move a slot to a new epoch, discarding its output and child progress."""

    TYPE: ClassVar[int] = MSG_REDUCE_INVALIDATE
    target: ObjectID
    slot: int
    epoch: int

    def encode_body(self) -> bytes:
        return self.target.raw + _u32.pack(self.slot) + _u32.pack(self.epoch)

    def body_len(self) -> int:
        return ID_LEN + 4 + 4

    @classmethod
    def decode_body(cls, r: _Reader) -> "ReduceInvalidate":
        return cls(target=r.oid(), slot=r.u32(), epoch=r.u32())


Message = Union[
    Pull,
    Chunk,
    TransferComplete,
    Abort,
    DirPublishPartial,
    DirPublishComplete,
    DirCheckout,
    DirReply,
    DirLocationOp,
    DirSubscribe,
    DirEvent,
    ReduceAssign,
    ParentBind,
    ChildBind,
    FetchHint,
    Release,
    RestartNotice,
    ReduceChunk,
    ReduceInvalidate,
]

_SIMPLE_DECODERS: dict[int, Callable[[_Reader], Message]] = {
    MSG_PULL: Pull.decode_body,
    MSG_CHUNK: Chunk.decode_body,
    MSG_TRANSFER_COMPLETE: TransferComplete.decode_body,
    MSG_ABORT: Abort.decode_body,
    MSG_DIR_PUBLISH_PARTIAL: DirPublishPartial.decode_body,
    MSG_DIR_PUBLISH_COMPLETE: DirPublishComplete.decode_body,
    MSG_DIR_CHECKOUT: DirCheckout.decode_body,
    MSG_DIR_REPLY: DirReply.decode_body,
    MSG_DIR_LOCATION_OP: DirLocationOp.decode_body,
    MSG_DIR_SUBSCRIBE: DirSubscribe.decode_body,
    MSG_DIR_EVENT: DirEvent.decode_body,
    MSG_REDUCE_CHUNK: ReduceChunk.decode_body,
    MSG_REDUCE_INVALIDATE: ReduceInvalidate.decode_body,
}

_CTL_DECODERS: dict[int, Callable[[_Reader], Message]] = {
    _SUB_ASSIGN: ReduceAssign.decode_body,
    _SUB_PARENT_BIND: ParentBind.decode_body,
    _SUB_CHILD_BIND: ChildBind.decode_body,
    _SUB_FETCH_HINT: FetchHint.decode_body,
    _SUB_RELEASE: Release.decode_body,
    _SUB_RESTART_NOTICE: RestartNotice.decode_body,
}


def wire_length(msg: Message) -> int:
    """Exact frame length in bytes, without serializing the payload."""
    return HEADER_LEN + msg.body_len()


def encode_frame(msg: Message) -> bytes:
    body = msg.encode_body()
    return _HEADER.pack(MAGIC, msg.TYPE, len(body)) + body


def _decode_body(msg_type: int, body: bytes) -> Message:
    r = _Reader(body)
    if msg_type == MSG_REDUCE_CTL:
        sub = r.u8()
        dec = _CTL_DECODERS.get(sub)
        if dec is None:
            raise WireError(f"unknown reduce control sub-kind 0x{sub:02x}")
    else:
        dec = _SIMPLE_DECODERS.get(msg_type)
        if dec is None:
            raise WireError(f"unknown message type 0x{msg_type:02x}")
    msg = dec(r)
    if msg_type not in (MSG_CHUNK, MSG_REDUCE_CHUNK):
        r.expect_end()
    return msg


def decode_frame(buf: bytes | bytearray | memoryview) -> tuple[Message, int]:
    """Decode one frame from the start of ``buf``; returns (message, consumed)."""
    if len(buf) < HEADER_LEN:
        raise WireError("short buffer: no complete header")
    magic, msg_type, body_len = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise WireError(f"bad magic {bytes(magic).hex()}")
    end = HEADER_LEN + body_len
    if len(buf) < end:
        raise WireError("short buffer: truncated body")
    body = bytes(buf[HEADER_LEN:end])
    return _decode_body(msg_type, body), end


class FrameReader:
    """Incremental decoder for a byte stream (TCP receive path)."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> Iterator[Message]:
        self._buf.extend(data)
        while True:
            if len(self._buf) < HEADER_LEN:
                return
            magic, msg_type, body_len = _HEADER.unpack_from(self._buf, 0)
            if magic != MAGIC:
                raise WireError(f"bad magic {bytes(magic).hex()}")
            end = HEADER_LEN + body_len
            if len(self._buf) < end:
                return
            body = bytes(self._buf[HEADER_LEN:end])
            del self._buf[:end]
            yield _decode_body(msg_type, body)
