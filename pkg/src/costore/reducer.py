"""Streaming tree reduction.

A reduction folds ``n`` equally sized source objects into one target object
along a canonical in-order tree (:mod:`costore.planning`). The coordinator
subscribes to the source ids and hands slot ``k`` to the k-th source that
publishes, so stragglers never gate the left part of the tree; with more
candidate sources than required (n of m), the last arrivals are simply
never assigned.

Each assigned slot runs an executor on the node holding its source. A leaf
streams its source; an inner slot folds its own source with its children's
streams block by block and emits the running aggregate to its parent; the
root folds into the target object entry, which is published while still
growing so downstream fetches and further reductions overlap with the
reduce itself. Inner slots keep their aggregate buffers until the
coordinator releases the reduction, which makes repair cheap.

Repair: when the host of slot ``k`` fails, only ``k`` and its ancestors
move to a new epoch. The replacement slot gets the next ready source;
ancestors clear their aggregates; surviving children re-send their retained
aggregates. Stale-epoch chunks are dropped. If the root restarts, the
coordinator first invalidates the target's partial directory locations (and
waits for the ack) so downstream consumers discard stale prefixes before
fresh bytes are published.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import kernels
from .errors import CostoreError, PeerDown, Unsatisfiable
from .ids import ObjectID
from .planning import ReducePlan, choose_degree, invalidation_bound
from .store import ObjectEntry
from .transport.base import Ticket
from .wire import (
    EVT_COMPLETE,
    EVT_PARTIAL,
    ST_COMMITTED,
    ChildBind,
    DirEvent,
    FetchHint,
    ParentBind,
    ReduceAssign,
    ReduceChunk,
    ReduceInvalidate,
    Release,
    RestartNotice,
)

__all__ = ["ReduceExecEngine", "ReduceCoordinator", "ReduceHandle"]


# ---------------------------------------------------------------------------
# Executor side


@dataclass(slots=True)
class _ChildIn:
    epoch: int
    host: str
    received: int = 0
    pending: deque = field(default_factory=deque)  # (offset, payload) ahead of own fold


class _SlotExec:
    __slots__ = (
        "engine",
        "target",
        "slot",
        "epoch",
        "op",
        "dtype",
        "total_bytes",
        "plan",
        "block_bytes",
        "source_id",
        "coordinator",
        "own_entry",
        "own_folded",
        "out",
        "children",
        "parent_host",
        "parent_sent",
        "sending",
        "is_root",
        "is_leaf",
        "target_entry",
        "restart_pending",
        "finished",
    )

    def __init__(self, engine: "ReduceExecEngine", msg: ReduceAssign):
        self.engine = engine
        self.target = msg.target
        self.slot = msg.slot
        self.epoch = msg.epoch
        self.op = msg.op
        self.dtype = msg.dtype
        self.total_bytes = msg.element_count * kernels.dtype_itemsize(msg.dtype)
        self.plan = ReducePlan.build(msg.num_sources, msg.degree)
        self.block_bytes = msg.block_bytes
        self.source_id = msg.source_id
        self.coordinator = msg.coordinator
        self.own_entry: ObjectEntry | None = None
        self.own_folded = 0
        self.out: bytearray | None = None
        self.children: dict[int, _ChildIn] = {}
        self.parent_host: str | None = None
        self.parent_sent = 0
        self.sending = False
        self.is_root = msg.slot == self.plan.root
        self.is_leaf = not self.plan.children[msg.slot]
        self.target_entry: ObjectEntry | None = None
        self.restart_pending = False
        self.finished = False
        self._attach_source()
        self._reset_output()

    # -- buffers ------------------------------------------------------------

    def _attach_source(self) -> None:
        node = self.engine.node
        entry = node.store.peek(self.source_id)
        if entry is None or entry.discarded:
            self._notify_restart()
            return
        self.own_entry = entry
        entry.pin_count += 1

    def _notify_restart(self) -> None:
        if not self.restart_pending:
            self.restart_pending = True
            try:
                self.engine.node.transport.send(
                    self.coordinator, RestartNotice(target=self.target, slot=self.slot)
                )
            except PeerDown:
                pass

    def _reset_output(self) -> None:
        node = self.engine.node
        self.own_folded = 0
        self.parent_sent = 0
        if self.is_leaf:
            self.out = None
        elif self.is_root:
            entry = node.store.peek(self.target)
            if entry is not None and not entry.discarded:
                # stale bytes from a previous epoch: drop and cascade
                node.fetch.on_drop_partial(self.target)
            self.target_entry = node.store.create_for_write(
                self.target, self.total_bytes
            )
            node.drain_store_evictions()
            node.dir_client.publish_partial(self.target, self.total_bytes)
            self.target_entry.pin_count += 1
        else:
            self.out = bytearray(self.total_bytes)
        self._fold_own()

    # -- folding own source ---------------------------------------------------

    def _out_buf(self):
        return self.target_entry.buf if self.is_root else self.out

    def _ready_prefix(self) -> int:
        ready = self.own_folded
        for c in self.plan.children[self.slot]:
            st = self.children.get(c)
            ready = min(ready, st.received if st is not None else 0)
        return ready

    def _fold_own(self) -> None:
        entry = self.own_entry
        if entry is None:
            return
        if entry.discarded:
            self._notify_restart()
            return
        if self.is_leaf:
            self.own_folded = entry.watermark
            return
        mark = entry.watermark
        if mark > self.own_folded:
            buf = self._out_buf()
            buf[self.own_folded : mark] = entry.buf[self.own_folded : mark]
            self.own_folded = mark
            self._drain_pending()

    def _drain_pending(self) -> None:
        for c, st in self.children.items():
            while st.pending and st.pending[0][0] + len(st.pending[0][1]) <= self.own_folded:
                offset, payload = st.pending.popleft()
                self._apply_child(st, offset, payload)

    def _apply_child(self, st: _ChildIn, offset: int, payload) -> None:
        buf = self._out_buf()
        dst = memoryview(buf)[offset : offset + len(payload)]
        kernels.combine_into(dst, payload, self.op, self.dtype)
        st.received = offset + len(payload)

    def on_own_progress(self) -> None:
        self._fold_own()
        self._advance()

    # -- child input -----------------------------------------------------------

    def on_chunk(self, msg: ReduceChunk) -> None:
        if self.finished:
            return
        st = self.children.get(msg.slot)
        if st is None or st.epoch != msg.epoch:
            return  # stale epoch
        if msg.offset != st.received + sum(len(p) for _, p in st.pending):
            return  # out of order or duplicate: drop
        end = msg.offset + len(msg.payload)
        if end > self.own_folded:
            st.pending.append((msg.offset, msg.payload))
        else:
            self._apply_child(st, msg.offset, msg.payload)
        self._advance()

    # -- output -----------------------------------------------------------------

    def _advance(self) -> None:
        ready = self._ready_prefix()
        if self.is_root:
            entry = self.target_entry
            if entry is not None and ready > entry.watermark:
                entry.watermark = ready
                node = self.engine.node
                node.on_local_progress(self.target)
                if entry.complete:
                    self.finished = True
                    node.dir_client.publish_complete(self.target)
                    self.engine.node.tracer.emit(
                        "reduce_root_complete", target=str(self.target)
                    )
            return
        self._emit(ready)

    def _emit(self, ready: int) -> None:
        if self.finished or self.parent_host is None or self.sending:
            return
        if self.parent_sent >= ready:
            return
        node = self.engine.node
        end = min(self.parent_sent + self.block_bytes, ready)
        if self.is_leaf:
            payload = self.own_entry.view(self.parent_sent, end)
        else:
            payload = memoryview(self.out)[self.parent_sent : end].toreadonly()
        try:
            node.transport.send(
                self.parent_host,
                ReduceChunk(
                    target=self.target,
                    slot=self.slot,
                    epoch=self.epoch,
                    offset=self.parent_sent,
                    payload=payload,
                ),
            )
        except PeerDown:
            self.parent_host = None  # coordinator will re-bind after repair
            return
        self.parent_sent = end
        self.sending = True
        node.transport.notify_writable(self.parent_host, self._resume)

    def _resume(self) -> None:
        self.sending = False
        self._advance()

    # -- control ------------------------------------------------------------------

    def on_parent_bind(self, msg: ParentBind) -> None:
        if self.finished:
            return
        self.parent_host = msg.parent_host
        self.parent_sent = 0
        self._advance()

    def on_child_bind(self, msg: ChildBind) -> None:
        if self.finished:
            return
        self.children[msg.child_slot] = _ChildIn(epoch=msg.child_epoch, host=msg.child_host)

    def on_invalidate(self, msg: ReduceInvalidate) -> None:
        if msg.epoch <= self.epoch:
            return
        # An invalidate is only sent when the directory held no complete
        # copy of the target at purge time, so even a locally complete fold
        # is not the committed result: drop it and refold.
        self.epoch = msg.epoch
        self.restart_pending = False
        entry = self.target_entry
        if entry is not None:
            entry.pin_count -= 1
            self.target_entry = None
        self.finished = False
        self.children.clear()
        self.parent_host = None
        self.sending = False
        if self.own_entry is not None and self.own_entry.discarded:
            self.own_entry.pin_count -= 1
            self.own_entry = None
            self._attach_source()
        self._reset_output()

    def release(self) -> None:
        self.finished = True
        if self.own_entry is not None:
            self.own_entry.pin_count -= 1
            self.own_entry = None
        if self.target_entry is not None:
            self.target_entry.pin_count -= 1
            self.target_entry = None
        self.out = None

    def on_peer_down(self, node_id: str) -> None:
        if self.parent_host == node_id:
            self.parent_host = None
            self.sending = False  # no writability callback will come from it


class ReduceExecEngine:
    """All slot executors hosted on one node."""

    def __init__(self, node):
        self.node = node
        self.execs: dict[tuple[ObjectID, int], _SlotExec] = {}
        self._child_route: dict[tuple[ObjectID, int], int] = {}
        self._by_source: dict[ObjectID, list[tuple[ObjectID, int]]] = {}

    def on_assign(self, msg: ReduceAssign) -> None:
        key = (msg.target, msg.slot)
        old = self.execs.get(key)
        if old is not None:
            old.release()
        ex = _SlotExec(self, msg)
        self.execs[key] = ex
        sources = self._by_source.setdefault(msg.source_id, [])
        if key not in sources:
            sources.append(key)
        self.node.tracer.emit(
            "slot_start",
            target=str(msg.target),
            slot=msg.slot,
            epoch=msg.epoch,
            source=str(msg.source_id),
            node=self.node.node_id,
        )
        ex.on_own_progress()

    def on_parent_bind(self, msg: ParentBind) -> None:
        ex = self.execs.get((msg.target, msg.slot))
        if ex is not None:
            ex.on_parent_bind(msg)

    def on_child_bind(self, msg: ChildBind) -> None:
        ex = self.execs.get((msg.target, msg.slot))
        if ex is not None:
            ex.on_child_bind(msg)
            self._child_route[(msg.target, msg.child_slot)] = msg.slot

    def on_chunk(self, msg: ReduceChunk) -> None:
        parent_slot = self._child_route.get((msg.target, msg.slot))
        if parent_slot is None:
            return
        ex = self.execs.get((msg.target, parent_slot))
        if ex is not None:
            ex.on_chunk(msg)

    def on_invalidate(self, msg: ReduceInvalidate) -> None:
        ex = self.execs.get((msg.target, msg.slot))
        if ex is not None:
            ex.on_invalidate(msg)

    def on_release(self, msg: Release) -> None:
        keys = [k for k in self.execs if k[0] == msg.target]
        for k in keys:
            self.execs.pop(k).release()
        self._child_route = {
            k: v for k, v in self._child_route.items() if k[0] != msg.target
        }
        for src, lst in list(self._by_source.items()):
            kept = [k for k in lst if k[0] != msg.target]
            if kept:
                self._by_source[src] = kept
            else:
                del self._by_source[src]

    def on_local_progress(self, oid: ObjectID) -> None:
        for key in self._by_source.get(oid, ()):
            ex = self.execs.get(key)
            if ex is not None:
                ex.on_own_progress()

    def on_peer_down(self, node_id: str) -> None:
        for ex in self.execs.values():
            ex.on_peer_down(node_id)


# ---------------------------------------------------------------------------
# Coordinator side


@dataclass(slots=True)
class _SlotInfo:
    epoch: int = 0
    source: ObjectID | None = None
    host: str | None = None
    assigned: bool = False


@dataclass(slots=True, eq=False)
class ReduceHandle:
    target: ObjectID
    ticket: Ticket
    num_slots: int
    degree: int = 0  # resolved at first source readiness when auto
    invalidations: list[list[int]] = field(default_factory=list)
    included: list[ObjectID] = field(default_factory=list)


class _Reduction:
    __slots__ = (
        "handle",
        "target",
        "op",
        "dtype",
        "sources",
        "num_slots",
        "degree_arg",
        "plan",
        "element_bytes",
        "slots",
        "ready",
        "hosts",
        "sizes",
        "status",
        "next_slot",
        "vacant",
        "busy",
        "pending_repairs",
        "done",
        "fetch_targets",
        "fetch_done",
        "committed_included",
    )

    def __init__(self, handle, target, op, dtype, sources, num_slots, degree_arg):
        self.handle = handle
        self.target = target
        self.op = op
        self.dtype = dtype
        self.sources = list(sources)
        self.num_slots = num_slots
        self.degree_arg = degree_arg
        self.plan: ReducePlan | None = None
        self.element_bytes: int | None = None
        self.slots: list[_SlotInfo] = [_SlotInfo() for _ in range(num_slots)]
        self.ready: deque[ObjectID] = deque()
        self.hosts: dict[ObjectID, str] = {}
        self.sizes: dict[ObjectID, int] = {}
        self.status: dict[ObjectID, str] = {oid: "unpublished" for oid in sources}
        self.next_slot = 0
        self.vacant: deque[int] = deque()
        self.busy = False
        self.pending_repairs: deque = deque()
        self.done = False
        self.fetch_targets: set[str] = set()
        self.fetch_done: set[str] = set()
        self.committed_included: list[ObjectID] | None = None


class ReduceCoordinator:
    """Per-node coordinator for reductions this node initiated."""

    def __init__(self, node):
        self.node = node
        self.reductions: dict[ObjectID, _Reduction] = {}

    # -- public entry ---------------------------------------------------------

    def reduce(
        self,
        target: ObjectID,
        sources: list[ObjectID],
        op: int,
        dtype: int,
        num_required: int | None = None,
        degree: int | None = None,
    ) -> ReduceHandle:
        n = len(sources) if num_required is None else num_required
        if n < 1 or n > len(sources):
            raise ValueError("num_required must be in [1, len(sources)]")
        if self.node.config.block_bytes % kernels.dtype_itemsize(dtype):
            raise ValueError("block_bytes must be a multiple of the element size")
        handle = ReduceHandle(target=target, ticket=Ticket(), num_slots=n)
        red = _Reduction(handle, target, op, dtype, sources, n, degree)
        self.reductions[target] = red
        self.node.tracer.emit(
            "reduce_start",
            target=str(target),
            n=n,
            m=len(sources),
            op=op,
            dtype=dtype,
        )
        for oid in sources:
            self.node.dir_client.subscribe(oid)
        self.node.dir_client.subscribe(target)
        return handle

    def allreduce(
        self,
        target: ObjectID,
        sources: list[ObjectID],
        op: int,
        dtype: int,
        participants: list[str],
        num_required: int | None = None,
        degree: int | None = None,
    ) -> ReduceHandle:
        handle = self.reduce(target, sources, op, dtype, num_required, degree)
        red = self.reductions[target]
        red.fetch_targets = set(participants)
        return handle

    def mark_unrecoverable(self, source: ObjectID) -> None:
        """Scenario-level signal: nobody will ever publish this source."""
        for red in self.reductions.values():
            if red.status.get(source) == "unpublished":
                red.status[source] = "dead"
                self._check_satisfiable(red)

    # -- directory events -------------------------------------------------------

    def on_dir_event(self, msg: DirEvent) -> None:
        for red in list(self.reductions.values()):
            if red.done:
                continue
            if msg.object_id == red.target:
                self._on_target_event(red, msg)
            elif msg.object_id in red.status:
                self._on_source_event(red, msg)

    def _on_source_event(self, red: _Reduction, msg: DirEvent) -> None:
        if msg.kind not in (EVT_PARTIAL, EVT_COMPLETE):
            return
        oid = msg.object_id
        if red.status[oid] != "unpublished":
            return
        red.status[oid] = "ready"
        red.hosts[oid] = msg.node_id
        red.sizes[oid] = msg.size
        if red.element_bytes is None:
            red.element_bytes = msg.size
            if red.degree_arg is None:
                red.handle.degree = choose_degree(
                    msg.size, red.num_slots, self.node.config.profile
                )
            else:
                red.handle.degree = red.degree_arg
            red.plan = ReducePlan.build(red.num_slots, red.handle.degree)
        elif msg.size != red.element_bytes:
            red.done = True
            red.handle.ticket.set_exception(
                Unsatisfiable(
                    f"source {oid} has size {msg.size}, expected {red.element_bytes}"
                )
            )
            return
        red.ready.append(oid)
        self._assign_ready(red)

    def _on_target_event(self, red: _Reduction, msg: DirEvent) -> None:
        if msg.kind != EVT_COMPLETE:
            return
        if not red.fetch_targets:
            self._complete(red)
            return
        first = not red.fetch_done
        red.fetch_done.add(msg.node_id)
        if first:
            # the root finished: fan the result out to the other participants
            for nid in sorted(red.fetch_targets - red.fetch_done):
                self._send_quiet(nid, FetchHint(target=red.target))
        if red.fetch_done.issuperset(red.fetch_targets):
            self._complete(red)

    def _complete(self, red: _Reduction) -> None:
        if red.done:
            return
        red.done = True
        if red.committed_included is not None:
            red.handle.included = list(red.committed_included)
        else:
            red.handle.included = [s.source for s in red.slots if s.assigned]
        hosts = sorted({s.host for s in red.slots if s.assigned and s.host})
        for h in hosts:
            try:
                self.node.transport.send(h, Release(target=red.target))
            except PeerDown:
                pass
        self.node.tracer.emit("reduce_complete", target=str(red.target))
        red.handle.ticket.set_result(red.target)

    # -- assignment ---------------------------------------------------------------

    def _assign_ready(self, red: _Reduction) -> None:
        while red.ready and (red.vacant or red.next_slot < red.num_slots):
            slot = red.vacant.popleft() if red.vacant else None
            if slot is None:
                slot = red.next_slot
                red.next_slot += 1
            oid = red.ready.popleft()
            self._assign(red, slot, oid)

    def _assign(self, red: _Reduction, slot: int, oid: ObjectID) -> None:
        info = red.slots[slot]
        info.source = oid
        info.host = red.hosts[oid]
        info.assigned = True
        red.status[oid] = "assigned"
        itemsize = kernels.dtype_itemsize(red.dtype)
        msg = ReduceAssign(
            target=red.target,
            slot=slot,
            epoch=info.epoch,
            op=red.op,
            dtype=red.dtype,
            element_count=red.element_bytes // itemsize,
            num_sources=red.num_slots,
            degree=red.handle.degree,
            block_bytes=self.node.config.block_bytes,
            source_id=oid,
            coordinator=self.node.node_id,
        )
        try:
            self.node.transport.send(info.host, msg)
        except PeerDown:
            info.assigned = False
            red.status[oid] = "dead"
            red.vacant.append(slot)
            self._check_satisfiable(red)
            return
        self.node.tracer.emit(
            "slot_assign",
            target=str(red.target),
            slot=slot,
            epoch=info.epoch,
            source=str(oid),
            host=info.host,
        )
        self._bind_edges(red, slot)

    def _send_quiet(self, dst: str, msg) -> None:
        try:
            self.node.transport.send(dst, msg)
        except PeerDown:
            pass

    def _bind_edges(self, red: _Reduction, slot: int) -> None:
        """(Re)issue the parent and child bindings around one slot."""
        plan = red.plan
        info = red.slots[slot]
        parent = plan.parents[slot]
        if parent is not None and red.slots[parent].assigned:
            p = red.slots[parent]
            self._send_quiet(info.host, ParentBind(red.target, slot, p.host))
            self._send_quiet(
                p.host, ChildBind(red.target, parent, slot, info.epoch, info.host)
            )
        for child in plan.children[slot]:
            c = red.slots[child]
            if c.assigned:
                self._send_quiet(
                    info.host, ChildBind(red.target, slot, child, c.epoch, c.host)
                )
                self._send_quiet(c.host, ParentBind(red.target, child, info.host))

    # -- failure handling -------------------------------------------------------------

    def on_peer_down(self, dead: str) -> None:
        for red in list(self.reductions.values()):
            if red.done:
                continue
            red.fetch_targets.discard(dead)
            red.fetch_done.discard(dead)
            for oid, st in red.status.items():
                if st == "ready" and red.hosts.get(oid) == dead:
                    red.status[oid] = "dead"
                    try:
                        red.ready.remove(oid)
                    except ValueError:
                        pass
            if red.fetch_done:
                # the target is already committed somewhere: the tree has no
                # work left, only the fan-out accounting can change
                if red.fetch_done.issuperset(red.fetch_targets):
                    self._complete(red)
                continue
            failed = [
                i
                for i, s in enumerate(red.slots)
                if s.assigned and s.host == dead
            ]
            if failed:
                red.pending_repairs.append(failed)
                self._pump_repairs(red)
            self._check_satisfiable(red)

    def on_restart_notice(self, src: str, msg: RestartNotice) -> None:
        red = self.reductions.get(msg.target)
        if red is None or red.done:
            return
        info = red.slots[msg.slot]
        if not info.assigned or info.host != src:
            return
        # The executor lost its input bytes; the source cannot feed this
        # reduction any more, so repair with a replacement source.
        red.pending_repairs.append([msg.slot])
        self._pump_repairs(red)

    def _pump_repairs(self, red: _Reduction) -> None:
        if red.done or red.committed_included is not None:
            # finished, or the target committed mid-repair: the bytes are
            # final and no further tree surgery may touch them
            red.pending_repairs.clear()
            return
        if red.busy or not red.pending_repairs:
            return
        self._repair(red, red.pending_repairs.popleft())

    def _repair(self, red: _Reduction, failed: list[int]) -> None:
        plan = red.plan
        # Snapshot before unassigning: if the purge below reports the target
        # already committed, these are the sources that produced its bytes
        # (a host that died after fully contributing still contributed).
        pre_repair = [s.source for s in red.slots if s.assigned]
        invalidated: set[int] = set()
        for k in failed:
            invalidated.add(k)
            for a in plan.ancestors(k):
                if red.slots[a].assigned:
                    invalidated.add(a)
        for s in invalidated:
            red.slots[s].epoch += 1
        for k in failed:
            info = red.slots[k]
            info.assigned = False
            if info.source is not None:
                red.status[info.source] = "dead"
                info.source = None
                info.host = None
        bound = invalidation_bound(red.num_slots, max(red.handle.degree, 1))
        per_fail = sorted(invalidated)
        red.handle.invalidations.append(per_fail)
        self.node.tracer.emit(
            "repair",
            target=str(red.target),
            failed=sorted(failed),
            invalidated=per_fail,
            bound=bound,
        )
        root_hit = red.slots[plan.root].assigned and plan.root in invalidated
        root_vacated = plan.root in failed

        def continue_repair(committed: bool = False) -> None:
            red.busy = False
            if red.done:
                return
            if committed:
                # a complete copy of the target already exists, so its bytes
                # are final; restarting the tree would fabricate a second
                # result under the same id. Completion arrives via events.
                red.committed_included = list(pre_repair)
                red.pending_repairs.clear()
                return
            for s in sorted(invalidated):
                info = red.slots[s]
                if info.assigned:
                    self._send_quiet(
                        info.host, ReduceInvalidate(red.target, s, info.epoch)
                    )
            for s in sorted(invalidated):
                if red.slots[s].assigned:
                    self._bind_edges(red, s)
            for k in failed:
                red.vacant.append(k)
            self._assign_ready(red)
            self._pump_repairs(red)
            self._check_satisfiable(red)

        def on_purge_ack(t: Ticket) -> None:
            try:
                reply = t.result()
                committed = reply.status == ST_COMMITTED
            except CostoreError:
                committed = False
            continue_repair(committed)

        if root_hit or root_vacated:
            red.busy = True
            ticket = self.node.dir_client.invalidate_partials(red.target)
            ticket.add_done_callback(on_purge_ack)
        else:
            continue_repair()

    def _check_satisfiable(self, red: _Reduction) -> None:
        if red.done or red.committed_included is not None:
            return
        possible = sum(
            1
            for st in red.status.values()
            if st in ("assigned", "ready", "unpublished")
        )
        if possible < red.num_slots:
            red.done = True
            red.handle.ticket.set_exception(
                Unsatisfiable(
                    f"only {possible} of {red.num_slots} required sources remain"
                )
            )
