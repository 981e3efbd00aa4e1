"""Sharded object directory.

Each object id hashes to a shard; a shard is owned by one directory node
and serialises all location state for its objects. The key invariant is the
loan: ``checkout`` hands a sender location to exactly one requester at a
time and registers the requester as a new (initially empty) partial
location, so concurrent fetches of a hot object fan out into a distribution
tree instead of a star. ``return_location`` closes the loan.

Cycle safety: a grant walks ``current_sender`` pointers (who is pulling
from whom right now) and refuses senders whose upstream chain contains the
requester. Chains are computed at grant time from live loans, never from
stale snapshots.

Small objects (below the configured threshold) are cached inline on the
shard at publish time and served straight from the checkout reply; no
store-to-store transfer happens for them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .config import ClusterConfig
from .errors import PeerDown
from .ids import ObjectID
from .trace import Tracer
from .transport.base import Ticket
from .wire import (
    EVT_COMPLETE,
    EVT_DELETED,
    EVT_DROP_PARTIAL,
    EVT_PARTIAL,
    EVT_REMOVED,
    LOC_DELETE,
    LOC_INVALIDATE_PARTIALS,
    LOC_PURGE_NODE,
    LOC_REMOVE,
    LOC_RETURN,
    ST_ACK,
    ST_COMMITTED,
    ST_DELETED,
    ST_GRANT,
    ST_INLINE,
    ST_SIZE_MISMATCH,
    ST_UNKNOWN_OP,
    DirCheckout,
    DirEvent,
    DirLocationOp,
    DirPublishComplete,
    DirPublishPartial,
    DirReply,
    DirSubscribe,
    Message,
)

__all__ = ["DirectoryService", "DirectoryClient"]

SendFn = Callable[[str, Message], None]


@dataclass(slots=True)
class _Loc:
    complete: bool = False
    on_loan_to: str | None = None  # receiver currently pulling from this copy
    current_sender: str | None = None  # copy this holder is pulling from


@dataclass(slots=True)
class _Record:
    size: int | None = None
    locations: dict[str, _Loc] = field(default_factory=dict)
    inline: bytes | None = None
    tombstoned: bool = False
    parked: deque = field(default_factory=deque)  # (token, requester, exclude)
    subscribers: set[str] = field(default_factory=set)


class DirectoryService:
    """Shard-side state machine for every shard homed on this node."""

    def __init__(
        self, node_id: str, config: ClusterConfig, send: SendFn, tracer: Tracer
    ):
        self.node_id = node_id
        self.config = config
        self._send = send
        self.tracer = tracer
        self._records: dict[ObjectID, _Record] = {}

    def handles(self, object_id: ObjectID) -> bool:
        shard = object_id.shard_of(self.config.shard_count)
        return self.config.shard_home(shard) == self.node_id

    def on_message(self, src: str, msg: Message) -> None:
        if isinstance(msg, DirPublishPartial):
            self._publish_partial(src, msg)
        elif isinstance(msg, DirPublishComplete):
            self._publish_complete(src, msg)
        elif isinstance(msg, DirCheckout):
            self._checkout(src, msg)
        elif isinstance(msg, DirSubscribe):
            self._subscribe(src, msg)
        elif isinstance(msg, DirLocationOp):
            if msg.mode == LOC_RETURN:
                self._return(src, msg)
            elif msg.mode == LOC_REMOVE:
                self._remove(src, msg)
            elif msg.mode == LOC_DELETE:
                self._delete(src, msg)
            elif msg.mode == LOC_PURGE_NODE:
                self._purge_node(msg.node_id)
            elif msg.mode == LOC_INVALIDATE_PARTIALS:
                self._invalidate_partials(src, msg)
            else:
                self._send(src, DirReply(token=msg.token, status=ST_UNKNOWN_OP))
        else:
            raise TypeError(f"directory cannot handle {type(msg).__name__}")

    def on_peer_down(self, node_id: str) -> None:
        self._purge_node(node_id)

    # -- helpers -----------------------------------------------------------

    def _rec(self, object_id: ObjectID) -> _Record:
        rec = self._records.get(object_id)
        if rec is None:
            rec = _Record()
            self._records[object_id] = rec
        return rec

    def _ack(self, dst: str, token: int, status: int = ST_ACK) -> None:
        if token:
            self._send(dst, DirReply(token=token, status=status))

    def _notify(
        self, object_id: ObjectID, rec: _Record, kind: int, node_id: str, size: int
    ) -> None:
        ev = DirEvent(object_id=object_id, kind=kind, node_id=node_id, size=size)
        for sub in sorted(rec.subscribers):
            self._send(sub, ev)

    def _upstream_chain(self, rec: _Record, start: str) -> tuple[str, ...]:
        chain = [start]
        seen = {start}
        cur = rec.locations.get(start)
        while cur is not None and cur.current_sender is not None:
            nxt = cur.current_sender
            if nxt in seen:
                raise AssertionError(f"pull cycle through {nxt}")
            chain.append(nxt)
            seen.add(nxt)
            cur = rec.locations.get(nxt)
        return tuple(chain)

    # -- publish -----------------------------------------------------------

    def _publish_partial(self, src: str, msg: DirPublishPartial) -> None:
        rec = self._rec(msg.object_id)
        if rec.tombstoned:
            self._ack(src, msg.token, ST_DELETED)
            return
        if rec.size is not None and rec.size != msg.size:
            self._ack(src, msg.token, ST_SIZE_MISMATCH)
            return
        rec.size = msg.size
        loc = rec.locations.get(msg.node_id)
        if loc is None:
            loc = _Loc()
            rec.locations[msg.node_id] = loc
        kind = EVT_PARTIAL
        if msg.inline is not None:
            rec.inline = bytes(msg.inline)
            loc.complete = True  # an inline payload is the whole object
            kind = EVT_COMPLETE
        self.tracer.emit(
            "publish_partial",
            oid=str(msg.object_id),
            node=msg.node_id,
            size=msg.size,
            inline=msg.inline is not None,
        )
        self._notify(msg.object_id, rec, kind, msg.node_id, msg.size)
        self._service_parked(msg.object_id, rec)
        self._ack(src, msg.token)

    def _publish_complete(self, src: str, msg: DirPublishComplete) -> None:
        rec = self._records.get(msg.object_id)
        if rec is None or rec.size is None:
            self._ack(src, msg.token, ST_UNKNOWN_OP)
            return
        if rec.tombstoned:
            self._ack(src, msg.token, ST_DELETED)
            return
        loc = rec.locations.get(msg.node_id)
        if loc is None:
            # The node's location was dropped (purged or invalidated) after
            # it sent this: registering it now would resurrect stale bytes.
            self._ack(src, msg.token, ST_UNKNOWN_OP)
            return
        if not loc.complete:
            loc.complete = True
            self._notify(msg.object_id, rec, EVT_COMPLETE, msg.node_id, rec.size)
        self.tracer.emit(
            "publish_complete", oid=str(msg.object_id), node=msg.node_id
        )
        self._service_parked(msg.object_id, rec)
        self._ack(src, msg.token)

    # -- checkout / return ---------------------------------------------------

    def _checkout(self, src: str, msg: DirCheckout) -> None:
        rec = self._rec(msg.object_id)
        if rec.tombstoned:
            self._send(src, DirReply(token=msg.token, status=ST_DELETED))
            return
        if rec.inline is not None:
            self._send(
                src, DirReply(token=msg.token, status=ST_INLINE, inline=rec.inline)
            )
            return
        if rec.size is not None:
            granted = self._try_grant(
                msg.object_id, rec, msg.requester, msg.exclude, msg.token, src
            )
            if granted:
                return
        rec.parked.append((msg.token, msg.requester, tuple(msg.exclude)))
        self.tracer.emit(
            "checkout_parked", oid=str(msg.object_id), requester=msg.requester
        )

    def _try_grant(
        self,
        object_id: ObjectID,
        rec: _Record,
        requester: str,
        exclude: tuple[str, ...],
        token: int,
        reply_to: str,
    ) -> bool:
        best: str | None = None
        best_key: tuple[bool, str] | None = None
        for nid in rec.locations:
            loc = rec.locations[nid]
            if nid == requester or nid in exclude or loc.on_loan_to is not None:
                continue
            if requester in self._upstream_chain(rec, nid):
                continue
            key = (not loc.complete, nid)  # prefer complete, then lowest id
            if best_key is None or key < best_key:
                best, best_key = nid, key
        if best is None:
            return False
        chain = self._upstream_chain(rec, best)
        rec.locations[best].on_loan_to = requester
        req_loc = rec.locations.get(requester)
        if req_loc is None:
            req_loc = _Loc()
            rec.locations[requester] = req_loc
        req_loc.current_sender = best
        self.tracer.emit(
            "loan_open", oid=str(object_id), sender=best, receiver=requester
        )
        self._notify(object_id, rec, EVT_PARTIAL, requester, rec.size or 0)
        self._send(
            reply_to,
            DirReply(
                token=token,
                status=ST_GRANT,
                sender=best,
                size=rec.size or 0,
                chain=chain,
            ),
        )
        return True

    def _return(self, src: str, msg: DirLocationOp) -> None:
        rec = self._records.get(msg.object_id)
        if rec is None:
            return
        sender_loc = rec.locations.get(msg.node_id)
        if sender_loc is not None and sender_loc.on_loan_to == src:
            sender_loc.on_loan_to = None
            if msg.flag and not sender_loc.complete:
                sender_loc.complete = True
                self._notify(
                    msg.object_id, rec, EVT_COMPLETE, msg.node_id, rec.size or 0
                )
        req_loc = rec.locations.get(src)
        if req_loc is not None and req_loc.current_sender == msg.node_id:
            req_loc.current_sender = None
        self.tracer.emit(
            "loan_close", oid=str(msg.object_id), sender=msg.node_id, receiver=src
        )
        self._service_parked(msg.object_id, rec)
        self._ack(src, msg.token)

    # -- removal and deletion ------------------------------------------------

    def _release_pointers(self, rec: _Record, gone: str) -> None:
        """Clear loan state referencing a location that went away."""
        loc = rec.locations.get(gone)
        if loc is not None and loc.current_sender is not None:
            upstream = rec.locations.get(loc.current_sender)
            if upstream is not None and upstream.on_loan_to == gone:
                upstream.on_loan_to = None
        for other in rec.locations.values():
            if other.on_loan_to == gone:
                other.on_loan_to = None
            if other.current_sender == gone:
                other.current_sender = None

    def _remove(self, src: str, msg: DirLocationOp) -> None:
        rec = self._records.get(msg.object_id)
        if rec is None:
            return
        if msg.node_id in rec.locations:
            self._release_pointers(rec, msg.node_id)
            del rec.locations[msg.node_id]
            self._notify(msg.object_id, rec, EVT_REMOVED, msg.node_id, rec.size or 0)
            self.tracer.emit(
                "location_removed", oid=str(msg.object_id), node=msg.node_id
            )
        self._service_parked(msg.object_id, rec)
        self._ack(src, msg.token)

    def _delete(self, src: str, msg: DirLocationOp) -> None:
        rec = self._rec(msg.object_id)
        rec.tombstoned = True
        rec.inline = None
        holders = sorted(rec.locations)
        rec.locations.clear()
        ev = DirEvent(object_id=msg.object_id, kind=EVT_DELETED)
        for nid in holders:
            self._send(nid, ev)
        for sub in sorted(rec.subscribers - set(holders)):
            self._send(sub, ev)
        while rec.parked:
            token, requester, _ = rec.parked.popleft()
            self._send(requester, DirReply(token=token, status=ST_DELETED))
        self.tracer.emit("deleted", oid=str(msg.object_id))
        self._ack(src, msg.token)

    def _purge_node(self, dead: str) -> None:
        for object_id, rec in self._records.items():
            touched = False
            if dead in rec.locations:
                self._release_pointers(rec, dead)
                del rec.locations[dead]
                self._notify(object_id, rec, EVT_REMOVED, dead, rec.size or 0)
                touched = True
            else:
                for loc in rec.locations.values():
                    if loc.on_loan_to == dead or loc.current_sender == dead:
                        touched = True
                self._release_pointers(rec, dead)
            if rec.parked:
                kept = deque(p for p in rec.parked if p[1] != dead)
                if len(kept) != len(rec.parked):
                    rec.parked = kept
                    touched = True
            rec.subscribers.discard(dead)
            if touched:
                self._service_parked(object_id, rec)
        self.tracer.emit("purge_node", node=dead)

    def _invalidate_partials(self, src: str, msg: DirLocationOp) -> None:
        rec = self._records.get(msg.object_id)
        if rec is not None:
            if any(loc.complete for loc in rec.locations.values()):
                # A complete copy exists: the object is committed and its
                # bytes are final, so a restart must not discard anything.
                self._ack(src, msg.token, ST_COMMITTED)
                return
            dropped = sorted(rec.locations)
            for nid in dropped:
                self._release_pointers(rec, nid)
                del rec.locations[nid]
                self._send(
                    nid,
                    DirEvent(object_id=msg.object_id, kind=EVT_DROP_PARTIAL, node_id=nid),
                )
            if dropped:
                self.tracer.emit(
                    "partials_invalidated", oid=str(msg.object_id), nodes=dropped
                )
        self._ack(src, msg.token)

    # -- subscription ----------------------------------------------------------

    def _subscribe(self, src: str, msg: DirSubscribe) -> None:
        rec = self._rec(msg.object_id)
        rec.subscribers.add(msg.subscriber)
        self._ack(src, msg.token)
        if rec.tombstoned:
            self._send(
                msg.subscriber, DirEvent(object_id=msg.object_id, kind=EVT_DELETED)
            )
            return
        for nid in sorted(rec.locations):
            loc = rec.locations[nid]
            self._send(
                msg.subscriber,
                DirEvent(
                    object_id=msg.object_id,
                    kind=EVT_COMPLETE if loc.complete else EVT_PARTIAL,
                    node_id=nid,
                    size=rec.size or 0,
                ),
            )

    # -- parked checkouts --------------------------------------------------------

    def _service_parked(self, object_id: ObjectID, rec: _Record) -> None:
        while rec.parked:
            token, requester, exclude = rec.parked[0]
            if rec.tombstoned:
                rec.parked.popleft()
                self._send(requester, DirReply(token=token, status=ST_DELETED))
                continue
            if rec.inline is not None:
                rec.parked.popleft()
                self._send(
                    requester,
                    DirReply(token=token, status=ST_INLINE, inline=rec.inline),
                )
                continue
            if rec.size is None:
                return
            if not self._try_grant(object_id, rec, requester, exclude, token, requester):
                return  # FIFO: the head blocks until it can be granted
            rec.parked.popleft()


class DirectoryClient:
    """Node-side requester: correlates replies and routes ops to shard homes."""

    def __init__(self, node_id: str, config: ClusterConfig, send: SendFn):
        self.node_id = node_id
        self.config = config
        self._send = send
        self._next_token = 0
        self._pending: dict[int, tuple] = {}  # token -> (ticket, home)

    def home_of(self, object_id: ObjectID) -> str:
        return self.config.shard_home(object_id.shard_of(self.config.shard_count))

    def _issue(self, object_id: ObjectID, make_msg) -> Ticket:
        self._next_token += 1
        token = self._next_token
        ticket = Ticket()
        home = self.home_of(object_id)
        self._pending[token] = (ticket, home)
        try:
            self._send(home, make_msg(token))
        except PeerDown as err:
            del self._pending[token]
            ticket.set_exception(err)
        return ticket

    def publish_partial(self, object_id: ObjectID, size: int, inline: bytes | None = None):
        return self._issue(
            object_id,
            lambda token: DirPublishPartial(
                token=token,
                object_id=object_id,
                node_id=self.node_id,
                size=size,
                inline=inline,
            ),
        )

    def publish_complete(self, object_id: ObjectID):
        return self._issue(
            object_id,
            lambda token: DirPublishComplete(
                token=token, object_id=object_id, node_id=self.node_id
            ),
        )

    def checkout(self, object_id: ObjectID, exclude: tuple[str, ...] = ()):
        return self._issue(
            object_id,
            lambda token: DirCheckout(
                token=token,
                object_id=object_id,
                requester=self.node_id,
                exclude=exclude,
            ),
        )

    def subscribe(self, object_id: ObjectID):
        return self._issue(
            object_id,
            lambda token: DirSubscribe(
                token=token, object_id=object_id, subscriber=self.node_id
            ),
        )

    def return_location(
        self, object_id: ObjectID, sender: str, sender_now_complete: bool
    ) -> None:
        self._send(
            self.home_of(object_id),
            DirLocationOp(
                token=0,
                mode=LOC_RETURN,
                object_id=object_id,
                node_id=sender,
                flag=sender_now_complete,
            ),
        )

    def remove_location(self, object_id: ObjectID) -> None:
        self._send(
            self.home_of(object_id),
            DirLocationOp(
                token=0,
                mode=LOC_REMOVE,
                object_id=object_id,
                node_id=self.node_id,
            ),
        )

    def delete(self, object_id: ObjectID):
        return self._issue(
            object_id,
            lambda token: DirLocationOp(
                token=token, mode=LOC_DELETE, object_id=object_id
            ),
        )

    def invalidate_partials(self, object_id: ObjectID):
        return self._issue(
            object_id,
            lambda token: DirLocationOp(
                token=token, mode=LOC_INVALIDATE_PARTIALS, object_id=object_id
            ),
        )

    def on_reply(self, msg: DirReply) -> None:
        entry = self._pending.pop(msg.token, None)
        if entry is not None:
            entry[0].set_result(msg)

    def on_peer_down(self, node_id: str) -> None:
        stale = [tok for tok, (_, home) in self._pending.items() if home == node_id]
        for tok in stale:
            ticket, _ = self._pending.pop(tok)
            ticket.set_exception(PeerDown(node_id))
