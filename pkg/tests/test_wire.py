import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from costore import wire
from costore.errors import WireError
from costore.ids import ObjectID
from costore.wire import (
    HEADER_LEN,
    MAGIC,
    ST_ACK,
    ST_GRANT,
    ST_INLINE,
    Abort,
    ChildBind,
    Chunk,
    DirCheckout,
    DirEvent,
    DirLocationOp,
    DirPublishComplete,
    DirPublishPartial,
    DirReply,
    DirSubscribe,
    FetchHint,
    FrameReader,
    ParentBind,
    Pull,
    ReduceAssign,
    ReduceChunk,
    ReduceInvalidate,
    Release,
    RestartNotice,
    TransferComplete,
    decode_frame,
    encode_frame,
    wire_length,
)

OID = ObjectID(bytes(range(20)))
OID2 = ObjectID(bytes(range(1, 21)))


# -- golden frames (expectations built with struct, not the library) --------


def test_magic_and_header_layout():
    assert MAGIC == bytes((0x48, 0x4F, 0x50, 0x4C))
    assert HEADER_LEN == 13


def test_pull_golden_frame():
    frame = encode_frame(Pull(OID, offset=0x0102030405060708))
    want = (
        MAGIC
        + struct.pack("<B", 0x01)
        + struct.pack("<Q", 28)
        + bytes(range(20))
        + struct.pack("<Q", 0x0102030405060708)
    )
    assert frame == want


def test_chunk_golden_frame():
    frame = encode_frame(Chunk(OID, offset=4096, payload=b"\xaa\xbb\xcc"))
    want = (
        MAGIC
        + struct.pack("<B", 0x02)
        + struct.pack("<Q", 31)
        + bytes(range(20))
        + struct.pack("<Q", 4096)
        + b"\xaa\xbb\xcc"
    )
    assert frame == want


def test_transfer_complete_golden_frame():
    frame = encode_frame(TransferComplete(OID))
    want = MAGIC + struct.pack("<B", 0x03) + struct.pack("<Q", 20) + bytes(range(20))
    assert frame == want


def test_dir_reply_grant_golden_frame():
    msg = DirReply(token=7, status=ST_GRANT, sender="n3", size=1024, chain=("n3", "n1"))
    body = (
        struct.pack("<Q", 7)
        + struct.pack("<B", 1)
        + struct.pack("<H", 2)
        + b"n3"
        + struct.pack("<Q", 1024)
        + struct.pack("<H", 2)
        + struct.pack("<H", 2)
        + b"n3"
        + struct.pack("<H", 2)
        + b"n1"
    )
    assert encode_frame(msg) == MAGIC + struct.pack("<B", 0x13, ) + struct.pack(
        "<Q", len(body)
    ) + body


def test_dir_publish_partial_inline_golden_frame():
    msg = DirPublishPartial(token=1, object_id=OID, node_id="n1", size=3, inline=b"abc")
    body = (
        struct.pack("<Q", 1)
        + bytes(range(20))
        + struct.pack("<H", 2)
        + b"n1"
        + struct.pack("<Q", 3)
        + struct.pack("<B", 1)
        + struct.pack("<I", 3)
        + b"abc"
    )
    assert encode_frame(msg) == MAGIC + struct.pack("<B", 0x10) + struct.pack(
        "<Q", len(body)
    ) + body


# -- roundtrips --------------------------------------------------------------

node_ids = st.text(
    alphabet=st.characters(min_codepoint=48, max_codepoint=122), max_size=8
)
oids = st.binary(min_size=20, max_size=20).map(ObjectID)


def _roundtrip(msg):
    frame = encode_frame(msg)
    assert len(frame) == wire_length(msg)
    assert len(frame) == HEADER_LEN + msg.body_len()
    out, consumed = decode_frame(frame)
    assert consumed == len(frame)
    assert type(out) is type(msg)
    return out


@given(oids, st.integers(0, 2**64 - 1))
def test_pull_roundtrip(oid, offset):
    assert _roundtrip(Pull(oid, offset)) == Pull(oid, offset)


@given(oids, st.integers(0, 2**40), st.binary(max_size=300))
def test_chunk_roundtrip(oid, offset, payload):
    out = _roundtrip(Chunk(oid, offset, payload))
    assert (out.object_id, out.offset, bytes(out.payload)) == (oid, offset, payload)


def test_chunk_memoryview_payload():
    buf = bytearray(b"0123456789")
    out = _roundtrip(Chunk(OID, 0, memoryview(buf)[2:6]))
    assert bytes(out.payload) == b"2345"


@given(oids, st.integers(1, 4))
def test_abort_roundtrip(oid, reason):
    assert _roundtrip(Abort(oid, reason)) == Abort(oid, reason)


@given(
    st.integers(0, 2**64 - 1),
    oids,
    node_ids,
    st.integers(0, 2**50),
    st.none() | st.binary(max_size=100),
)
def test_publish_partial_roundtrip(token, oid, node, size, inline):
    msg = DirPublishPartial(token, oid, node, size, inline)
    assert _roundtrip(msg) == msg


@given(st.integers(0, 2**64 - 1), oids, node_ids)
def test_publish_complete_roundtrip(token, oid, node):
    msg = DirPublishComplete(token, oid, node)
    assert _roundtrip(msg) == msg


@given(st.integers(0, 2**64 - 1), oids, node_ids, st.lists(node_ids, max_size=4))
def test_checkout_roundtrip(token, oid, node, exclude):
    msg = DirCheckout(token, oid, node, tuple(exclude))
    assert _roundtrip(msg) == msg


@given(
    st.integers(0, 2**64 - 1),
    node_ids,
    st.integers(0, 2**50),
    st.lists(node_ids, max_size=4),
)
def test_dir_reply_grant_roundtrip(token, sender, size, chain):
    msg = DirReply(token=token, status=ST_GRANT, sender=sender, size=size, chain=tuple(chain))
    assert _roundtrip(msg) == msg


@given(st.integers(0, 2**64 - 1), st.binary(max_size=64))
def test_dir_reply_inline_roundtrip(token, inline):
    msg = DirReply(token=token, status=ST_INLINE, inline=inline)
    assert _roundtrip(msg) == msg


def test_dir_reply_plain_statuses_drop_optional_fields():
    msg = DirReply(token=5, status=ST_ACK, sender="ignored", size=77)
    out = _roundtrip(msg)
    assert (out.token, out.status, out.sender, out.size) == (5, ST_ACK, "", 0)


@given(
    st.integers(0, 2**64 - 1),
    st.integers(0, 4),
    oids,
    node_ids,
    st.booleans(),
)
def test_location_op_roundtrip(token, mode, oid, node, flag):
    msg = DirLocationOp(token, mode, oid, node, flag)
    assert _roundtrip(msg) == msg


@given(st.integers(0, 2**64 - 1), oids, node_ids)
def test_subscribe_roundtrip(token, oid, sub):
    msg = DirSubscribe(token, oid, sub)
    assert _roundtrip(msg) == msg


@given(oids, st.integers(1, 5), node_ids, st.integers(0, 2**50))
def test_dir_event_roundtrip(oid, kind, node, size):
    msg = DirEvent(oid, kind, node, size)
    assert _roundtrip(msg) == msg


def test_reduce_ctl_roundtrips():
    assign = ReduceAssign(
        target=OID,
        slot=3,
        epoch=2,
        op=1,
        dtype=4,
        element_count=1 << 20,
        num_sources=16,
        degree=2,
        block_bytes=65536,
        source_id=OID2,
        coordinator="n0",
    )
    assert _roundtrip(assign) == assign
    for msg in (
        ParentBind(OID, 3, "n5"),
        ChildBind(OID, 3, 4, 1, "n6"),
        FetchHint(OID),
        Release(OID),
        RestartNotice(OID2, 4),
    ):
        assert _roundtrip(msg) == msg


@given(oids, st.integers(0, 63), st.integers(0, 7), st.integers(0, 2**40), st.binary(max_size=256))
def test_reduce_chunk_roundtrip(target, slot, epoch, offset, payload):
    msg = ReduceChunk(target, slot, epoch, offset, payload)
    out = _roundtrip(msg)
    assert (out.target, out.slot, out.epoch, out.offset, bytes(out.payload)) == (
        target,
        slot,
        epoch,
        offset,
        payload,
    )


@given(oids, st.integers(0, 63), st.integers(0, 2**32 - 1))
def test_reduce_invalidate_roundtrip(target, slot, epoch):
    msg = ReduceInvalidate(target, slot, epoch)
    assert _roundtrip(msg) == msg


# -- error handling ----------------------------------------------------------


def test_decode_rejects_bad_magic():
    frame = bytearray(encode_frame(Pull(OID)))
    frame[0] ^= 0xFF
    with pytest.raises(WireError):
        decode_frame(bytes(frame))


def test_decode_rejects_unknown_type():
    frame = bytearray(encode_frame(Pull(OID)))
    frame[4] = 0x7F
    with pytest.raises(WireError):
        decode_frame(bytes(frame))


def test_decode_rejects_truncated_body():
    frame = encode_frame(Pull(OID))
    with pytest.raises(WireError):
        decode_frame(frame[:-1])


def test_decode_rejects_trailing_bytes():
    frame = bytearray(encode_frame(Pull(OID)))
    # lie about the body length and append a byte
    body_len = struct.unpack_from("<Q", frame, 5)[0]
    struct.pack_into("<Q", frame, 5, body_len + 1)
    frame.append(0)
    with pytest.raises(WireError):
        decode_frame(bytes(frame))


# -- incremental reader -------------------------------------------------------


def test_frame_reader_single_and_split_feeds():
    msgs = [
        Pull(OID, 8),
        Chunk(OID, 0, b"x" * 100),
        DirReply(token=1, status=ST_ACK),
        TransferComplete(OID2),
    ]
    stream = b"".join(encode_frame(m) for m in msgs)

    # one-shot
    reader = FrameReader()
    out = list(reader.feed(stream))
    assert [type(m) for m in out] == [type(m) for m in msgs]

    # byte-at-a-time
    reader = FrameReader()
    out = []
    for i in range(len(stream)):
        out.extend(reader.feed(stream[i : i + 1]))
    assert len(out) == len(msgs)
    assert isinstance(out[1], Chunk) and bytes(out[1].payload) == b"x" * 100


@given(st.integers(1, 57))
def test_frame_reader_arbitrary_chunking(step):
    msgs = [Pull(OID, i) for i in range(5)] + [Chunk(OID, 7, b"abc")]
    stream = b"".join(encode_frame(m) for m in msgs)
    reader = FrameReader()
    out = []
    for i in range(0, len(stream), step):
        out.extend(reader.feed(stream[i : i + step]))
    assert len(out) == len(msgs)
    assert [m.offset for m in out[:5]] == list(range(5))


def test_frame_reader_rejects_bad_magic_midstream():
    good = encode_frame(Pull(OID))
    reader = FrameReader()
    list(reader.feed(good))
    with pytest.raises(WireError):
        list(reader.feed(b"XXXX" + good[4:]))


def test_wire_length_matches_encoding_for_all_types():
    samples = [
        Pull(OID, 1),
        Chunk(OID, 2, b"zz"),
        TransferComplete(OID),
        Abort(OID, 2),
        DirPublishPartial(1, OID, "n1", 10, None),
        DirPublishPartial(1, OID, "n1", 3, b"abc"),
        DirPublishComplete(2, OID, "n1"),
        DirCheckout(3, OID, "n2", ("n1",)),
        DirReply(token=4, status=ST_GRANT, sender="n1", size=5, chain=("n1",)),
        DirReply(token=4, status=ST_INLINE, inline=b"hi"),
        DirReply(token=4, status=ST_ACK),
        DirLocationOp(5, 1, OID, "n1", True),
        DirSubscribe(6, OID, "n2"),
        DirEvent(OID, 2, "n1", 9),
        ReduceAssign(OID, 0, 0, 1, 1, 4, 2, 2, 1024, OID2, "n0"),
        ParentBind(OID, 0, "n1"),
        ChildBind(OID, 0, 1, 0, "n2"),
        FetchHint(OID),
        Release(OID),
        RestartNotice(OID, 3),
        ReduceChunk(OID, 0, 0, 0, b"1234"),
        ReduceInvalidate(OID, 0, 3),
    ]
    seen = set()
    for msg in samples:
        assert wire_length(msg) == len(encode_frame(msg))
        seen.add((type(msg).__name__, getattr(msg, "SUB", None)))
    # every registered frame type is covered
    assert len({type(m).TYPE for m in samples}) == 14
