"""Real-socket transport.

Each node owns one listening socket plus, per peer, one lazily opened
outbound connection used exclusively for frames this node sends. Inbound
connections are read-only. A connection starts with a small preamble naming
the connecting node; framed messages follow.

Threading: every inbound connection gets a reader thread that decodes
frames and posts them to the node's dispatch queue. A single dispatcher
thread applies deliveries, timers, and writability callbacks serially, so
protocol engines see the same single-writer discipline as under the
simulator. Outbound frames are queued to a per-peer writer thread; the
dispatcher never blocks on a socket.

Failure detection is connection-liveness: an EOF or socket error on a
peer's connection marks the peer down and, after the configured detection
interval, delivers a peer-down notification; subsequent sends to that peer
raise :class:`PeerDown` synchronously.
"""

from __future__ import annotations

import queue
import socket
import struct
import threading
import time
from typing import Callable

from ..errors import DeadlockError, PeerDown
from ..wire import FrameReader, Message, encode_frame
from .base import Ticket, Transport

__all__ = ["TcpTransport"]

_PREAMBLE_MAGIC = b"CSTN"
_PREAMBLE = struct.Struct("<4sH")


def _send_preamble(sock: socket.socket, node_id: str) -> None:
    raw = node_id.encode("utf-8")
    sock.sendall(_PREAMBLE.pack(_PREAMBLE_MAGIC, len(raw)) + raw)


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        part = sock.recv(n - len(buf))
        if not part:
            raise ConnectionError("connection closed during preamble")
        buf.extend(part)
    return bytes(buf)


def _recv_preamble(sock: socket.socket) -> str:
    magic, n = _PREAMBLE.unpack(_recv_exact(sock, _PREAMBLE.size))
    if magic != _PREAMBLE_MAGIC:
        raise ConnectionError(f"bad preamble magic {magic!r}")
    return _recv_exact(sock, n).decode("utf-8")


class _Writer:
    """Owns the outbound connection to one peer."""

    def __init__(self, transport: "TcpTransport", peer: str):
        self.transport = transport
        self.peer = peer
        self.q: queue.Queue = queue.Queue()
        self.thread = threading.Thread(
            target=self._run, name=f"{transport.node_id}->{peer}", daemon=True
        )
        self.thread.start()

    def _connect(self) -> socket.socket:
        host, port = self.transport.peer_addr(self.peer)
        sock = socket.create_connection((host, port), timeout=10.0)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        sock.settimeout(None)
        _send_preamble(sock, self.transport.node_id)
        return sock

    def _run(self) -> None:
        tr = self.transport
        sock: socket.socket | None = None
        try:
            while True:
                item = self.q.get()
                if item is None:
                    return
                kind, payload = item
                if kind == "notify":
                    # everything queued before this marker has reached the
                    # socket: the link can absorb another block
                    tr._post(("call", payload))
                    continue
                try:
                    if sock is None:
                        sock = self._connect()
                    sock.sendall(payload)
                except OSError:
                    tr._peer_lost(self.peer)
                    self._drain()
                    return
        finally:
            if sock is not None:
                try:
                    sock.close()
                except OSError:
                    pass

    def _drain(self) -> None:
        """Fire queued writability callbacks so senders can observe the
        failure instead of waiting forever on a dead link."""
        while True:
            try:
                item = self.q.get_nowait()
            except queue.Empty:
                return
            if item is not None and item[0] == "notify":
                self.transport._post(("call", item[1]))

    def stop(self) -> None:
        self.q.put(None)


class TcpTransport(Transport):
    """One node's attachment to a TCP cluster.

    ``registry`` maps node id to ``(host, port)``; entries may be filled in
    after construction (port-0 rendezvous) via :meth:`set_peer`, as long as
    they are present before the first send to that peer.
    """

    def __init__(
        self,
        node_id: str,
        registry: dict[str, tuple[str, int]] | None = None,
        host: str = "127.0.0.1",
        port: int = 0,
        detection_interval_s: float = 0.1,
        drive_timeout_s: float = 60.0,
    ):
        self.node_id = node_id
        self.registry: dict[str, tuple[str, int]] = dict(registry or {})
        self.detection_interval_s = detection_interval_s
        self.drive_timeout_s = drive_timeout_s
        self._receiver: Callable[[str, Message], None] | None = None
        self._peer_down: Callable[[str], None] | None = None
        self._dispatch_q: queue.Queue = queue.Queue()
        self._writers: dict[str, _Writer] = {}
        self._down: set[str] = set()
        self._lock = threading.Lock()
        self._closing = False
        self._timers: list[threading.Timer] = []
        self._inbound: list[socket.socket] = []

        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(64)
        self.host, self.port = self._listener.getsockname()
        self.registry[node_id] = (self.host, self.port)

        self._dispatcher = threading.Thread(
            target=self._dispatch_loop, name=f"{node_id}-dispatch", daemon=True
        )
        self._dispatcher.start()
        self._acceptor = threading.Thread(
            target=self._accept_loop, name=f"{node_id}-accept", daemon=True
        )
        self._acceptor.start()

    # -- registry ------------------------------------------------------------

    def set_peer(self, node_id: str, host: str, port: int) -> None:
        self.registry[node_id] = (host, port)

    def peer_addr(self, node_id: str) -> tuple[str, int]:
        try:
            return self.registry[node_id]
        except KeyError:
            raise PeerDown(node_id, f"no address registered for {node_id}") from None

    # -- inbound -------------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._closing:
            try:
                conn, _ = self._listener.accept()
            except OSError:
                return
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            with self._lock:
                self._inbound.append(conn)
            threading.Thread(
                target=self._read_loop, args=(conn,), daemon=True
            ).start()

    def _read_loop(self, conn: socket.socket) -> None:
        peer = ""
        try:
            peer = _recv_preamble(conn)
            reader = FrameReader()
            while True:
                data = conn.recv(1 << 18)
                if not data:
                    break
                for msg in reader.feed(data):
                    self._post(("msg", peer, msg))
        except (OSError, ConnectionError):
            pass
        finally:
            try:
                conn.close()
            except OSError:
                pass
            if peer and not self._closing:
                self._peer_lost(peer)

    # -- dispatcher ------------------------------------------------------------

    def _post(self, item) -> None:
        self._dispatch_q.put(item)

    def _dispatch_loop(self) -> None:
        while True:
            item = self._dispatch_q.get()
            if item is None:
                return
            kind = item[0]
            try:
                if kind == "msg":
                    if self._receiver is not None:
                        self._receiver(item[1], item[2])
                elif kind == "call":
                    item[1]()
                elif kind == "down":
                    if self._peer_down is not None:
                        self._peer_down(item[1])
            except Exception:
                if not self._closing:
                    raise

    # -- failure handling ---------------------------------------------------------

    def _peer_lost(self, peer: str) -> None:
        if self._closing:
            return
        with self._lock:
            if peer in self._down:
                return
            self._down.add(peer)
        timer = threading.Timer(
            self.detection_interval_s, lambda: self._post(("down", peer))
        )
        timer.daemon = True
        with self._lock:
            self._timers.append(timer)
        timer.start()

    # -- Transport interface ---------------------------------------------------

    def send(self, dst: str, msg: Message) -> None:
        if self._closing:
            return
        if dst == self.node_id:
            self._post(("msg", self.node_id, msg))
            return
        if dst in self._down:
            raise PeerDown(dst)
        writer = self._writers.get(dst)
        if writer is None:
            with self._lock:
                writer = self._writers.get(dst)
                if writer is None:
                    writer = _Writer(self, dst)
                    self._writers[dst] = writer
        writer.q.put(("frame", encode_frame(msg)))

    def set_receiver(self, fn: Callable[[str, Message], None]) -> None:
        self._receiver = fn

    def set_peer_down_handler(self, fn: Callable[[str], None]) -> None:
        self._peer_down = fn

    def now(self) -> float:
        return time.monotonic()

    def call_later(self, delay_s: float, fn: Callable[[], None]) -> None:
        timer = threading.Timer(delay_s, lambda: self._post(("call", fn)))
        timer.daemon = True
        with self._lock:
            if self._closing:
                return
            self._timers.append(timer)
        timer.start()

    def notify_writable(self, dst: str, fn: Callable[[], None]) -> None:
        if dst == self.node_id or dst in self._down:
            self._post(("call", fn))
            return
        writer = self._writers.get(dst)
        if writer is None:
            self._post(("call", fn))
            return
        writer.q.put(("notify", fn))

    def drive(self, ticket: Ticket):
        if threading.current_thread() is self._dispatcher:
            raise RuntimeError("drive() would deadlock on the dispatcher thread")
        if not ticket.wait(self.drive_timeout_s):
            raise DeadlockError(
                f"operation still pending after {self.drive_timeout_s}s"
            )
        return ticket.result()

    # -- lifecycle ----------------------------------------------------------------

    def close(self) -> None:
        if self._closing:
            return
        self._closing = True
        with self._lock:
            timers = list(self._timers)
            self._timers.clear()
        for t in timers:
            t.cancel()
        try:
            self._listener.close()
        except OSError:
            pass
        for writer in list(self._writers.values()):
            writer.stop()
        for writer in list(self._writers.values()):
            writer.thread.join(timeout=5.0)
        self._post(None)
        self._dispatcher.join(timeout=5.0)
        with self._lock:
            inbound = list(self._inbound)
        for conn in inbound:
            try:
                conn.close()
            except OSError:
                pass

    def __enter__(self) -> "TcpTransport":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
