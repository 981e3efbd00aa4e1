"""One cluster node: store, directory client/shards, transfer and reduce
engines, and the message dispatch that connects them to a transport."""

from __future__ import annotations

from typing import Iterable

from . import kernels
from .broadcast import FetchEngine, ServeEngine
from .config import ClusterConfig
from .directory import DirectoryClient, DirectoryService
from .ids import ObjectID
from .reducer import ReduceCoordinator, ReduceExecEngine, ReduceHandle
from .store import LocalStore, ObjectEntry
from .trace import Tracer
from .transport.base import Ticket, Transport
from .wire import (
    EVT_DELETED,
    EVT_DROP_PARTIAL,
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
    Message,
    ParentBind,
    Pull,
    ReduceAssign,
    ReduceChunk,
    ReduceInvalidate,
    Release,
    RestartNotice,
    TransferComplete,
)

__all__ = ["Node"]


def _op_code(op: int | str) -> int:
    return kernels.OPS[op] if isinstance(op, str) else op


def _dtype_code(dtype: int | str) -> int:
    return kernels.DTYPES[dtype] if isinstance(dtype, str) else dtype


class Node:
    def __init__(
        self,
        node_id: str,
        config: ClusterConfig,
        transport: Transport,
        tracer: Tracer | None = None,
    ):
        self.node_id = node_id
        self.config = config
        self.transport = transport
        self.tracer = tracer if tracer is not None else Tracer(level=0)
        self.store = LocalStore(config.store_capacity_bytes)
        self.dir_client = DirectoryClient(node_id, config, transport.send)
        self.dir_service: DirectoryService | None = None
        if node_id in config.directory_nodes:
            self.dir_service = DirectoryService(
                node_id, config, transport.send, self.tracer
            )
        self.serve = ServeEngine(self)
        self.fetch = FetchEngine(self)
        self.reduce_exec = ReduceExecEngine(self)
        self.coordinator = ReduceCoordinator(self)
        transport.set_receiver(self.on_message)
        transport.set_peer_down_handler(self.on_peer_down)

    # -- dispatch ------------------------------------------------------------

    def on_message(self, src: str, msg: Message) -> None:
        if isinstance(msg, Chunk):
            self.fetch.on_chunk(src, msg)
        elif isinstance(msg, ReduceChunk):
            self.reduce_exec.on_chunk(msg)
        elif isinstance(msg, Pull):
            self.serve.on_pull(src, msg)
        elif isinstance(msg, TransferComplete):
            self.fetch.on_transfer_complete(src, msg)
        elif isinstance(msg, Abort):
            self.fetch.on_abort(src, msg)
        elif isinstance(msg, DirReply):
            self.dir_client.on_reply(msg)
        elif isinstance(msg, DirEvent):
            self._on_dir_event(msg)
        elif isinstance(
            msg, (DirPublishPartial, DirPublishComplete, DirCheckout, DirLocationOp, DirSubscribe)
        ):
            if self.dir_service is None:
                raise RuntimeError(f"{self.node_id} hosts no directory shards")
            self.dir_service.on_message(src, msg)
        elif isinstance(msg, ReduceAssign):
            self.reduce_exec.on_assign(msg)
        elif isinstance(msg, ParentBind):
            self.reduce_exec.on_parent_bind(msg)
        elif isinstance(msg, ChildBind):
            self.reduce_exec.on_child_bind(msg)
        elif isinstance(msg, ReduceInvalidate):
            self.reduce_exec.on_invalidate(msg)
        elif isinstance(msg, Release):
            self.reduce_exec.on_release(msg)
        elif isinstance(msg, RestartNotice):
            self.coordinator.on_restart_notice(src, msg)
        elif isinstance(msg, FetchHint):
            self.get_async(msg.target)
        else:
            raise TypeError(f"unhandled message {type(msg).__name__}")

    def _on_dir_event(self, msg: DirEvent) -> None:
        if msg.kind == EVT_DROP_PARTIAL and msg.node_id == self.node_id:
            self.fetch.on_drop_partial(msg.object_id)
        elif msg.kind == EVT_DELETED:
            self.fetch.on_deleted_event(msg.object_id)
        self.coordinator.on_dir_event(msg)

    def on_peer_down(self, dead: str) -> None:
        self.tracer.emit_v("peer_down_seen", node=self.node_id, dead=dead)
        if self.dir_service is not None:
            self.dir_service.on_peer_down(dead)
        self.dir_client.on_peer_down(dead)
        self.serve.on_peer_down(dead)
        self.fetch.on_peer_down(dead)
        self.reduce_exec.on_peer_down(dead)
        self.coordinator.on_peer_down(dead)

    def on_local_progress(self, oid: ObjectID) -> None:
        self.serve.on_local_progress(oid)
        self.reduce_exec.on_local_progress(oid)

    def drain_store_evictions(self) -> None:
        if self.store.pending_evictions:
            for oid in self.store.pending_evictions:
                self.dir_client.remove_location(oid)
                self.tracer.emit("evicted", oid=str(oid), node=self.node_id)
            self.store.pending_evictions.clear()

    # -- object API ------------------------------------------------------------

    def put_async(self, object_id: ObjectID, data, pin: bool = False) -> Ticket:
        entry = self.store.put(object_id, data, pin=pin)
        self.drain_store_evictions()
        self.tracer.emit(
            "put", oid=str(object_id), node=self.node_id, size=entry.size
        )
        if entry.size < self.config.small_object_threshold:
            inline = bytes(entry.buf)
            return self.dir_client.publish_partial(object_id, entry.size, inline)
        self.dir_client.publish_partial(object_id, entry.size)
        return self.dir_client.publish_complete(object_id)

    def put(self, object_id: ObjectID, data, pin: bool = False):
        return self.transport.drive(self.put_async(object_id, data, pin=pin))

    def get_async(self, object_id: ObjectID) -> Ticket:
        return self.fetch.fetch(object_id)

    def get(self, object_id: ObjectID) -> memoryview:
        entry: ObjectEntry = self.transport.drive(self.get_async(object_id))
        return entry.view(0, entry.size)

    def delete_async(self, object_id: ObjectID) -> Ticket:
        self.store.delete(object_id)
        return self.dir_client.delete(object_id)

    def delete(self, object_id: ObjectID):
        return self.transport.drive(self.delete_async(object_id))

    def evict_unpinned(self, max_bytes: int) -> list[ObjectID]:
        evicted = self.store.evict_unpinned(max_bytes)
        for oid in evicted:
            self.dir_client.remove_location(oid)
            self.tracer.emit("evicted", oid=str(oid), node=self.node_id)
        return evicted

    # -- collective API -----------------------------------------------------------

    def reduce_async(
        self,
        target: ObjectID,
        sources: Iterable[ObjectID],
        op: int | str = "sum",
        dtype: int | str = "f32",
        num_required: int | None = None,
        degree: int | None = None,
    ) -> ReduceHandle:
        return self.coordinator.reduce(
            target, list(sources), _op_code(op), _dtype_code(dtype), num_required, degree
        )

    def reduce(self, *args, **kwargs) -> ObjectID:
        return self.transport.drive(self.reduce_async(*args, **kwargs).ticket)

    def allreduce_async(
        self,
        target: ObjectID,
        sources: Iterable[ObjectID],
        participants: Iterable[str],
        op: int | str = "sum",
        dtype: int | str = "f32",
        num_required: int | None = None,
        degree: int | None = None,
    ) -> ReduceHandle:
        return self.coordinator.allreduce(
            target,
            list(sources),
            _op_code(op),
            _dtype_code(dtype),
            list(participants),
            num_required,
            degree,
        )

    def allreduce(self, *args, **kwargs) -> ObjectID:
        return self.transport.drive(self.allreduce_async(*args, **kwargs).ticket)
