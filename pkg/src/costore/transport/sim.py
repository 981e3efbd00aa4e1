"""Deterministic discrete-event network.

Events are ordered by ``(time, seq)`` with ``seq`` a global monotone
counter, so identical inputs replay identically. A frame from ``src`` to
``dst`` reserves the sender egress and receiver ingress as one coupled
service slot:

    start   = max(now, egress_free[src], ingress_free[dst] - L)
    arrival = start + L + frame_len / B

both NICs then stay busy until ``start + frame_len/B`` (egress) and
``arrival`` (ingress). A single idle link therefore delivers a frame at
``now + L + len/B``, and back-to-back frames queue at bandwidth ``B``.
Loopback frames deliver at ``now`` and charge neither NIC.

Failures: ``kill`` freezes a node at time t; frames on links touching it
that would deliver after t are dropped. Every other node receives a
peer-down notification at ``t + detection_interval``, after which sends to
the dead node raise :class:`PeerDown` synchronously. Partitions behave the
same way per node pair.
"""

from __future__ import annotations

import heapq
from collections import Counter
from typing import Callable

from ..config import ClusterConfig
from ..errors import DeadlockError, PeerDown
from ..trace import Tracer
from ..wire import Message, wire_length
from .base import Ticket, Transport

__all__ = ["SimNetwork", "SimTransport"]


class SimNetwork:
    def __init__(self, config: ClusterConfig, tracer: Tracer | None = None):
        self.config = config
        self.latency = config.profile.latency_s
        self.bandwidth = config.profile.bandwidth_Bps
        self.detection = config.detection_interval_s
        self.tracer = tracer if tracer is not None else Tracer(level=0)
        self.tracer.set_clock(lambda: self._now)
        self._heap: list[tuple[float, int, Callable[[], None]]] = []
        self._seq = 0
        self._now = 0.0
        self.egress_free: dict[str, float] = {}
        self.ingress_free: dict[str, float] = {}
        self.dead: dict[str, float] = {}
        self._partitions: dict[frozenset[str], float] = {}
        self.transports: dict[str, SimTransport] = {}
        self.bytes_on_wire = 0
        self.frames_by_type: Counter[int] = Counter()
        self.frames_dropped = 0

    # -- clock and event queue -------------------------------------------

    @property
    def now(self) -> float:
        return self._now

    def schedule_at(self, t: float, fn: Callable[[], None]) -> None:
        if t < self._now:
            t = self._now
        self._seq += 1
        heapq.heappush(self._heap, (t, self._seq, fn))

    def call_later(self, delay_s: float, fn: Callable[[], None]) -> None:
        self.schedule_at(self._now + delay_s, fn)

    def step(self) -> bool:
        if not self._heap:
            return False
        t, _, fn = heapq.heappop(self._heap)
        self._now = t
        fn()
        return True

    def run_until(self, t: float) -> None:
        while self._heap and self._heap[0][0] <= t:
            self.step()
        if t > self._now:
            self._now = t

    def run_all(self, limit_s: float | None = None) -> None:
        while self._heap:
            if limit_s is not None and self._heap[0][0] > limit_s:
                break
            self.step()

    def drive(self, ticket: Ticket):
        while not ticket.done:
            if not self._heap:
                raise DeadlockError(
                    f"event queue drained at t={self._now:.6f} with the "
                    "operation still pending"
                )
            self.step()
        return ticket.result()

    # -- topology state ---------------------------------------------------

    def attach(self, node_id: str) -> "SimTransport":
        tr = self.transports.get(node_id)
        if tr is None:
            tr = SimTransport(self, node_id)
            self.transports[node_id] = tr
            self.egress_free[node_id] = 0.0
            self.ingress_free[node_id] = 0.0
        return tr

    def _partition_started(self, a: str, b: str) -> float | None:
        return self._partitions.get(frozenset((a, b)))

    def is_dead(self, node_id: str) -> bool:
        return node_id in self.dead

    def reachable(self, src: str, dst: str) -> bool:
        """Best-effort liveness as seen after failure detection."""
        if dst in self.dead and self._now >= self.dead[dst] + self.detection:
            return False
        started = self._partition_started(src, dst)
        if started is not None and self._now >= started + self.detection:
            return False
        return True

    # -- frame transfer ---------------------------------------------------

    def send(self, src: str, dst: str, msg: Message) -> None:
        if src in self.dead:
            return  # residue of a frozen node; nothing leaves it
        if dst in self.dead and self._now >= self.dead[dst] + self.detection:
            raise PeerDown(dst)
        started = self._partition_started(src, dst)
        if started is not None and self._now >= started + self.detection:
            raise PeerDown(dst)
        nbytes = wire_length(msg)
        if src == dst:
            self.schedule_at(self._now, lambda: self._deliver(src, dst, msg, 0))
            return
        start = max(
            self._now, self.egress_free[src], self.ingress_free[dst] - self.latency
        )
        service = nbytes / self.bandwidth
        self.egress_free[src] = start + service
        arrival = start + self.latency + service
        self.ingress_free[dst] = arrival
        self.schedule_at(arrival, lambda: self._deliver(src, dst, msg, nbytes))

    def _deliver(self, src: str, dst: str, msg: Message, nbytes: int) -> None:
        if src in self.dead or dst in self.dead:
            self.frames_dropped += 1
            self.tracer.emit_v("frame_dropped", src=src, dst=dst, type=msg.TYPE)
            return
        started = self._partition_started(src, dst)
        if started is not None:
            self.frames_dropped += 1
            self.tracer.emit_v("frame_dropped", src=src, dst=dst, type=msg.TYPE)
            return
        self.bytes_on_wire += nbytes
        self.frames_by_type[msg.TYPE] += 1
        self.tracer.emit_v(
            "frame", src=src, dst=dst, type=msg.TYPE, bytes=nbytes or wire_length(msg)
        )
        tr = self.transports.get(dst)
        if tr is not None and tr._receiver is not None:
            tr._receiver(src, msg)

    # -- failure injection -------------------------------------------------

    def kill(self, node_id: str, at: float | None = None) -> None:
        def do_kill() -> None:
            if node_id in self.dead:
                return
            self.dead[node_id] = self._now
            self.tracer.emit("kill", node=node_id)
            self.call_later(self.detection, lambda: self._notify_down(node_id))

        self.schedule_at(self._now if at is None else at, do_kill)

    def _notify_down(self, node_id: str) -> None:
        if node_id not in self.dead:
            return  # revived before detection fired
        self.tracer.emit("detected_down", node=node_id)
        for nid in sorted(self.transports):
            if nid == node_id or nid in self.dead:
                continue
            tr = self.transports[nid]
            if tr._peer_down is not None:
                tr._peer_down(node_id)

    def revive(self, node_id: str, at: float | None = None) -> None:
        def do_revive() -> None:
            if node_id not in self.dead:
                return
            del self.dead[node_id]
            self.egress_free[node_id] = self._now
            self.ingress_free[node_id] = self._now
            self.tracer.emit("revive", node=node_id)

        self.schedule_at(self._now if at is None else at, do_revive)

    def partition(self, a: str, b: str, at: float | None = None) -> None:
        def do_partition() -> None:
            key = frozenset((a, b))
            if key in self._partitions:
                return
            self._partitions[key] = self._now
            self.tracer.emit("partition", a=a, b=b)
            self.call_later(self.detection, lambda: self._notify_partition(a, b))

        self.schedule_at(self._now if at is None else at, do_partition)

    def _notify_partition(self, a: str, b: str) -> None:
        if frozenset((a, b)) not in self._partitions:
            return
        for me, other in ((a, b), (b, a)):
            tr = self.transports.get(me)
            if tr is not None and me not in self.dead and tr._peer_down is not None:
                tr._peer_down(other)

    def heal(self, a: str, b: str, at: float | None = None) -> None:
        def do_heal() -> None:
            if self._partitions.pop(frozenset((a, b)), None) is not None:
                self.tracer.emit("heal", a=a, b=b)

        self.schedule_at(self._now if at is None else at, do_heal)


class SimTransport(Transport):
    def __init__(self, network: SimNetwork, node_id: str):
        self.network = network
        self.node_id = node_id
        self._receiver: Callable[[str, Message], None] | None = None
        self._peer_down: Callable[[str], None] | None = None

    def send(self, dst: str, msg: Message) -> None:
        self.network.send(self.node_id, dst, msg)

    def set_receiver(self, fn: Callable[[str, Message], None]) -> None:
        self._receiver = fn

    def set_peer_down_handler(self, fn: Callable[[str], None]) -> None:
        self._peer_down = fn

    def now(self) -> float:
        return self.network.now

    def call_later(self, delay_s: float, fn: Callable[[], None]) -> None:
        me = self.node_id

        def guarded() -> None:
            if me not in self.network.dead:
                fn()

        self.network.call_later(delay_s, guarded)

    def notify_writable(self, dst: str, fn: Callable[[], None]) -> None:
        me = self.node_id
        at = max(self.network.now, self.network.egress_free[me])

        def guarded() -> None:
            if me not in self.network.dead:
                fn()

        self.network.schedule_at(at, guarded)

    def drive(self, ticket: Ticket):
        return self.network.drive(ticket)
