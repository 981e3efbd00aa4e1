"""Receiver-driven object transfer.

A receiver checks out one sender location from the directory, pulls from
its watermark, and applies block-sized chunks sequentially. The directory
registers the receiver as a new partial location at grant time, so while a
transfer is still in flight the receiver already serves later requesters
from its growing prefix; concurrent fetches of a hot object self-organize
into a pipeline.

The serve side enforces the single-sender rule (one outbound transfer per
object at a time, mirroring the directory loan) and paces block pushes by
egress availability so control frames are never starved.

Failure handling is resume-based: when a sender dies or aborts, the
receiver keeps its partial entry and re-checks out; the next sender streams
from the preserved watermark, so bytes are not re-received.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CostoreError, ObjectDeleted, PeerDown
from .ids import ObjectID
from .store import ObjectEntry
from .transport.base import Ticket
from .wire import (
    ABORT_BUSY,
    ABORT_DELETED,
    ABORT_GONE,
    ABORT_RESTARTED,
    ST_ACK,
    ST_DELETED,
    ST_GRANT,
    ST_INLINE,
    Abort,
    Chunk,
    DirReply,
    Pull,
    TransferComplete,
)

__all__ = ["ServeEngine", "FetchEngine"]


@dataclass(slots=True)
class _Serve:
    receiver: str
    next_offset: int
    entry: ObjectEntry
    sending: bool = False


class ServeEngine:
    """Outbound side: stream local entries to one receiver per object."""

    def __init__(self, node):
        self.node = node
        self.active: dict[ObjectID, _Serve] = {}

    def on_pull(self, src: str, msg: Pull) -> None:
        node = self.node
        oid = msg.object_id
        if node.store.is_tombstoned(oid):
            self._try_send(src, Abort(oid, ABORT_DELETED))
            return
        entry = node.store.peek(oid)
        if entry is None or entry.discarded:
            self._try_send(src, Abort(oid, ABORT_GONE))
            return
        serve = self.active.get(oid)
        if serve is not None and serve.receiver != src:
            self._try_send(src, Abort(oid, ABORT_BUSY))
            return
        if serve is None:
            entry.pin_count += 1
            serve = _Serve(receiver=src, next_offset=msg.offset, entry=entry)
            self.active[oid] = serve
        else:
            serve.next_offset = msg.offset  # idempotent re-pull
        self._pump(oid)

    def _try_send(self, dst: str, msg) -> bool:
        try:
            self.node.transport.send(dst, msg)
            return True
        except PeerDown:
            return False

    def _pump(self, oid: ObjectID) -> None:
        serve = self.active.get(oid)
        if serve is None or serve.sending:
            return
        node = self.node
        entry = serve.entry
        if entry.discarded:
            self._try_send(serve.receiver, Abort(oid, ABORT_GONE))
            self._end(oid)
            return
        if serve.next_offset < entry.watermark:
            end = min(serve.next_offset + node.config.block_bytes, entry.watermark)
            payload = entry.view(serve.next_offset, end)
            if not self._try_send(serve.receiver, Chunk(oid, serve.next_offset, payload)):
                self._end(oid)
                return
            serve.next_offset = end
            serve.sending = True
            node.transport.notify_writable(serve.receiver, lambda: self._resume(oid))
        elif entry.complete:
            self._try_send(serve.receiver, TransferComplete(oid))
            self._end(oid)
        # else: drained the available prefix; on_local_progress will pump again

    def _resume(self, oid: ObjectID) -> None:
        serve = self.active.get(oid)
        if serve is not None:
            serve.sending = False
            self._pump(oid)

    def on_local_progress(self, oid: ObjectID) -> None:
        self._pump(oid)

    def abort(self, oid: ObjectID, reason: int) -> None:
        serve = self.active.get(oid)
        if serve is not None:
            self._try_send(serve.receiver, Abort(oid, reason))
            self._end(oid)

    def on_peer_down(self, node_id: str) -> None:
        for oid in [o for o, s in self.active.items() if s.receiver == node_id]:
            self._end(oid)

    def _end(self, oid: ObjectID) -> None:
        serve = self.active.pop(oid, None)
        if serve is not None:
            serve.entry.pin_count -= 1


@dataclass(slots=True)
class _Fetch:
    tickets: list[Ticket] = field(default_factory=list)
    entry: ObjectEntry | None = None
    sender: str | None = None
    exclude: tuple[str, ...] = ()
    awaiting_grant: bool = False
    re_received: int = 0
    failovers: int = 0


class FetchEngine:
    """Inbound side: checkout, pull, resume, publish on completion."""

    def __init__(self, node):
        self.node = node
        self.fetches: dict[ObjectID, _Fetch] = {}
        self.re_received_total = 0
        self.failovers_total = 0

    def fetch(self, oid: ObjectID) -> Ticket:
        node = self.node
        ticket = Ticket()
        if node.store.is_tombstoned(oid):
            ticket.set_exception(ObjectDeleted(f"{oid} was deleted"))
            return ticket
        entry = node.store.peek(oid)
        if entry is not None and entry.complete:
            ticket.set_result(entry)
            return ticket
        f = self.fetches.get(oid)
        if f is None:
            f = _Fetch()
            if entry is not None:
                f.entry = entry
                entry.pin_count += 1
            self.fetches[oid] = f
            f.tickets.append(ticket)
            self.node.tracer.emit("fetch_start", oid=str(oid), node=node.node_id)
            self._checkout(oid, f)
        else:
            f.tickets.append(ticket)
        return ticket

    def _checkout(self, oid: ObjectID, f: _Fetch) -> None:
        if f.awaiting_grant:
            return
        f.awaiting_grant = True
        ticket = self.node.dir_client.checkout(oid, f.exclude)
        ticket.add_done_callback(lambda t: self._on_checkout_reply(oid, t))

    def _on_checkout_reply(self, oid: ObjectID, ticket: Ticket) -> None:
        f = self.fetches.get(oid)
        if f is None:
            if ticket.exception() is None and ticket.result().status == ST_GRANT:
                # the fetch resolved while this checkout was in flight; free
                # the loan so the granted sender is not blocked forever
                self.node.dir_client.return_location(
                    oid, ticket.result().sender, sender_now_complete=False
                )
            return
        f.awaiting_grant = False
        err = ticket.exception()
        if err is not None:
            self._fail(oid, f, err)
            return
        reply: DirReply = ticket.result()
        if reply.status == ST_INLINE:
            node = self.node
            if node.store.peek(oid) is None:
                node.store.put(oid, reply.inline or b"")
            self._resolve(oid, f)
        elif reply.status == ST_GRANT:
            self._start_pull(oid, f, reply.sender, reply.size)
        elif reply.status == ST_DELETED:
            self.node.store.delete(oid)
            self._fail(oid, f, ObjectDeleted(f"{oid} was deleted"))
        else:
            self._fail(oid, f, CostoreError(f"checkout failed, status={reply.status}"))

    def _start_pull(self, oid: ObjectID, f: _Fetch, sender: str, size: int) -> None:
        node = self.node
        if f.entry is None or f.entry.discarded:
            f.entry = node.store.create_for_write(oid, size)
            f.entry.pin_count += 1
            node.drain_store_evictions()
        f.sender = sender
        f.exclude = ()
        try:
            node.transport.send(sender, Pull(oid, f.entry.watermark))
        except PeerDown:
            f.sender = None
            f.failovers += 1
            self.failovers_total += 1
            self._checkout(oid, f)

    def on_chunk(self, src: str, msg: Chunk) -> None:
        oid = msg.object_id
        f = self.fetches.get(oid)
        if f is None or f.sender != src or f.entry is None:
            self.re_received_total += len(msg.payload)
            return
        if msg.offset != f.entry.watermark:
            f.re_received += len(msg.payload)
            self.re_received_total += len(msg.payload)
            return
        f.entry.write_block(msg.offset, msg.payload)
        self.node.tracer.emit_v(
            "entry_write",
            oid=str(oid),
            node=self.node.node_id,
            offset=msg.offset,
            n=len(msg.payload),
        )
        if f.entry.complete:
            self._finish(oid, f)
        self.node.on_local_progress(oid)

    def on_transfer_complete(self, src: str, msg: TransferComplete) -> None:
        f = self.fetches.get(msg.object_id)
        if f is None or f.sender != src:
            return
        if f.entry is not None and not f.entry.complete:
            # marker outran data: protocol violation; refetch defensively
            f.sender = None
            self._checkout(msg.object_id, f)

    def on_abort(self, src: str, msg: Abort) -> None:
        oid = msg.object_id
        f = self.fetches.get(oid)
        if f is None or f.sender != src:
            return
        node = self.node
        f.sender = None
        if msg.reason == ABORT_DELETED:
            node.store.delete(oid)
            self._fail(oid, f, ObjectDeleted(f"{oid} was deleted"))
            return
        if msg.reason == ABORT_RESTARTED:
            self._drop_partial_entry(oid, f)
        elif msg.reason == ABORT_BUSY:
            f.exclude = (src,)
        self.node.tracer.emit(
            "fetch_retry", oid=str(oid), node=node.node_id, reason=msg.reason
        )
        self._checkout(oid, f)

    def _drop_partial_entry(self, oid: ObjectID, f: _Fetch | None) -> None:
        """Local bytes were invalidated: drop them and cascade to our own
        pullers. The directory only sends this for uncommitted ids, so even a
        locally complete copy is not the final result and must go."""
        node = self.node
        entry = node.store.peek(oid)
        if entry is not None:
            node.serve.abort(oid, ABORT_RESTARTED)
            node.store.discard(oid)
        if f is not None:
            f.entry = None
            f.sender = None

    def on_drop_partial(self, oid: ObjectID) -> None:
        f = self.fetches.get(oid)
        self._drop_partial_entry(oid, f)
        if f is not None and f.tickets:
            self._checkout(oid, f)

    def on_deleted_event(self, oid: ObjectID) -> None:
        node = self.node
        node.serve.abort(oid, ABORT_DELETED)
        node.store.delete(oid)
        f = self.fetches.get(oid)
        if f is not None:
            self._fail(oid, f, ObjectDeleted(f"{oid} was deleted"))

    def on_peer_down(self, node_id: str) -> None:
        for oid in [o for o, f in self.fetches.items() if f.sender == node_id]:
            f = self.fetches[oid]
            f.sender = None
            f.failovers += 1
            self.failovers_total += 1
            self.node.tracer.emit(
                "fetch_failover", oid=str(oid), node=self.node.node_id, dead=node_id
            )
            self._checkout(oid, f)

    def _finish(self, oid: ObjectID, f: _Fetch) -> None:
        node = self.node
        node.dir_client.return_location(oid, f.sender, sender_now_complete=True)
        f.sender = None
        ticket = node.dir_client.publish_complete(oid)
        ticket.add_done_callback(lambda t: self._on_publish_reply(oid, t))

    def _on_publish_reply(self, oid: ObjectID, ticket: Ticket) -> None:
        """Resolve only once the directory has registered our complete copy,
        so callers never observe bytes the directory has invalidated."""
        f = self.fetches.get(oid)
        if f is None:
            return
        if ticket.exception() is not None:
            self._checkout(oid, f)
            return
        status = ticket.result().status
        if status == ST_ACK:
            self._resolve(oid, f)
        elif status == ST_DELETED:
            self.node.store.delete(oid)
            self._fail(oid, f, ObjectDeleted(f"{oid} was deleted"))
        else:
            # our location was purged while the publish was in flight: the
            # bytes we assembled belong to an invalidated attempt
            self._drop_partial_entry(oid, f)
            self._checkout(oid, f)

    def _resolve(self, oid: ObjectID, f: _Fetch) -> None:
        node = self.node
        entry = node.store.peek(oid)
        if f.entry is not None:
            f.entry.pin_count -= 1
        del self.fetches[oid]
        node.tracer.emit(
            "fetch_done",
            oid=str(oid),
            node=node.node_id,
            re_received=f.re_received,
            failovers=f.failovers,
        )
        for t in f.tickets:
            t.set_result(entry)

    def _fail(self, oid: ObjectID, f: _Fetch, err: BaseException) -> None:
        if f.entry is not None:
            f.entry.pin_count -= 1
        del self.fetches[oid]
        for t in f.tickets:
            t.set_exception(err)
