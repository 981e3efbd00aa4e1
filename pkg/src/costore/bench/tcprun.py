"""Multiprocess TCP runs: each node is a separate OS process.

The parent spawns one worker per node, collects the OS-assigned listen
ports over pipes, broadcasts the full address map, and then scripts the
workers with put/get commands. Payloads are regenerated from the seed on
both sides, so correctness is established by comparing SHA-256 digests
end to end rather than shipping the payload through the control pipes.
"""

from __future__ import annotations

import hashlib
import multiprocessing as mp
import time
from typing import Any

import numpy as np

from ..config import ClusterConfig
from ..errors import AssertionFailed
from ..ids import ObjectID
from ..node import Node
from ..trace import Tracer
from ..transport.tcp import TcpTransport

__all__ = ["tcp_put_get", "tcp_broadcast", "run_tcp_scenario"]

_STEP_TIMEOUT_S = 120.0


def _payload(seed: int, nbytes: int) -> bytes:
    return (
        np.random.default_rng(seed)
        .integers(0, 256, size=nbytes, dtype=np.uint8)
        .tobytes()
    )


def _worker(node_id: str, n_nodes: int, conn) -> None:
    cfg = ClusterConfig.local(n_nodes, detection_interval_s=0.5)
    tr = TcpTransport(node_id, detection_interval_s=0.5, drive_timeout_s=_STEP_TIMEOUT_S)
    node = Node(node_id, cfg, tr, Tracer(level=0))
    try:
        conn.send(("addr", node_id, tr.host, tr.port))
        peers = conn.recv()
        for nid, (host, port) in peers.items():
            tr.set_peer(nid, host, port)
        conn.send(("ready", node_id))
        while True:
            cmd = conn.recv()
            if cmd[0] == "put":
                _, name, nbytes, seed = cmd
                payload = _payload(seed, nbytes)
                t0 = time.monotonic()
                node.put(ObjectID.from_name(name), payload)
                conn.send(
                    (
                        "put_done",
                        node_id,
                        time.monotonic() - t0,
                        hashlib.sha256(payload).hexdigest(),
                    )
                )
            elif cmd[0] == "get":
                _, name = cmd
                t0 = time.monotonic()
                data = bytes(node.get(ObjectID.from_name(name)))
                conn.send(
                    (
                        "got",
                        node_id,
                        time.monotonic() - t0,
                        hashlib.sha256(data).hexdigest(),
                        len(data),
                    )
                )
            elif cmd[0] == "stop":
                conn.send(("stopped", node_id))
                return
    except BaseException as exc:  # surface worker failures to the parent
        try:
            conn.send(("error", node_id, repr(exc)))
        except OSError:
            pass
    finally:
        tr.close()


class _TcpCluster:
    def __init__(self, n_nodes: int):
        ctx = mp.get_context("spawn")
        self.node_ids = [f"n{i}" for i in range(n_nodes)]
        self.pipes: dict[str, Any] = {}
        self.procs: dict[str, Any] = {}
        for nid in self.node_ids:
            parent_end, child_end = ctx.Pipe()
            proc = ctx.Process(
                target=_worker, args=(nid, n_nodes, child_end), daemon=True
            )
            proc.start()
            child_end.close()
            self.pipes[nid] = parent_end
            self.procs[nid] = proc
        addrs = {}
        for nid in self.node_ids:
            kind, got, host, port = self._recv(nid)
            assert kind == "addr" and got == nid
            addrs[nid] = (host, port)
        for nid in self.node_ids:
            self.pipes[nid].send(addrs)
        for nid in self.node_ids:
            kind, got = self._recv(nid)
            assert kind == "ready" and got == nid

    def _recv(self, nid: str, timeout: float = _STEP_TIMEOUT_S):
        if not self.pipes[nid].poll(timeout):
            self.close(force=True)
            raise RuntimeError(f"worker {nid} did not respond within {timeout}s")
        msg = self.pipes[nid].recv()
        if msg[0] == "error":
            self.close(force=True)
            raise RuntimeError(f"worker {nid} failed: {msg[2]}")
        return msg

    def send(self, nid: str, cmd: tuple) -> None:
        self.pipes[nid].send(cmd)

    def close(self, force: bool = False) -> None:
        for nid, proc in self.procs.items():
            if not force:
                try:
                    self.pipes[nid].send(("stop",))
                    if self.pipes[nid].poll(5.0):
                        self.pipes[nid].recv()
                except (OSError, EOFError):
                    pass
            proc.join(timeout=5.0)
            if proc.is_alive():
                proc.terminate()
                proc.join(timeout=5.0)
        for pipe in self.pipes.values():
            pipe.close()


def tcp_put_get(object_bytes: int, seed: int) -> dict[str, Any]:
    """Three processes: n0 directory, n1 puts, n2 gets. Returns digests and
    timings; raises :class:`AssertionFailed` if the received bytes differ."""
    cluster = _TcpCluster(3)
    try:
        cluster.send("n1", ("put", f"tcp-rtt-{seed}", object_bytes, seed))
        _, _, put_s, put_sha = cluster._recv("n1")
        cluster.send("n2", ("get", f"tcp-rtt-{seed}"))
        _, _, get_s, got_sha, got_len = cluster._recv("n2")
    finally:
        cluster.close()
    if got_sha != put_sha or got_len != object_bytes:
        raise AssertionFailed(
            f"tcp put/get: digest or length mismatch "
            f"(sent {put_sha[:12]} len {object_bytes}, "
            f"got {got_sha[:12]} len {got_len})"
        )
    return {
        "put_latency_s": put_s,
        "get_latency_s": get_s,
        "sha256": got_sha,
        "object_bytes": object_bytes,
    }


def tcp_broadcast(receivers: int, object_bytes: int, seed: int) -> dict[str, Any]:
    """n0 directory, n1 puts, n2..n(receivers+1) get concurrently."""
    cluster = _TcpCluster(receivers + 2)
    recv_ids = [f"n{i}" for i in range(2, 2 + receivers)]
    try:
        cluster.send("n1", ("put", f"tcp-bc-{seed}", object_bytes, seed))
        _, _, _, put_sha = cluster._recv("n1")
        for nid in recv_ids:
            cluster.send(nid, ("get", f"tcp-bc-{seed}"))
        results = {nid: cluster._recv(nid) for nid in recv_ids}
    finally:
        cluster.close()
    latencies = {}
    for nid, (_, _, secs, sha, length) in results.items():
        if sha != put_sha or length != object_bytes:
            raise AssertionFailed(
                f"tcp broadcast: {nid} received digest {sha[:12]} len {length}, "
                f"expected {put_sha[:12]} len {object_bytes}"
            )
        latencies[nid] = secs
    return {
        "sha256": put_sha,
        "object_bytes": object_bytes,
        "receivers": receivers,
        "last_latency_s": max(latencies.values()),
        "latencies": latencies,
    }


def run_tcp_scenario(name: str, seed: int, **knobs: Any) -> list[dict[str, Any]]:
    """CSV rows for the scenarios that have a real-socket equivalent.

    ``bytes_on_wire`` and ``predicted_T_d`` are 0 here: real sockets carry
    no frame accounting and no analytic profile applies to loopback.
    """
    rows: list[dict[str, Any]] = []
    if name == "rtt":
        object_bytes = knobs.get("object_bytes") or 1024 * 1024
        trials = knobs.get("trials") or 3
        for trial in range(trials):
            res = tcp_put_get(object_bytes, seed + trial)
            rows.append(
                {
                    "scenario": "rtt",
                    "n_nodes": 3,
                    "object_bytes": object_bytes,
                    "d": 0,
                    "arrival_interval_s": 0.0,
                    "trial": trial,
                    "completed": 1,
                    "latency_s": res["get_latency_s"],
                    "bytes_on_wire": 0,
                    "predicted_T_d": 0.0,
                }
            )
    elif name == "broadcast":
        receivers = knobs.get("receivers") or 4
        object_bytes = knobs.get("object_bytes") or 1024 * 1024
        trials = knobs.get("trials") or 1
        for trial in range(trials):
            res = tcp_broadcast(receivers, object_bytes, seed + trial)
            rows.append(
                {
                    "scenario": "broadcast",
                    "n_nodes": receivers + 2,
                    "object_bytes": object_bytes,
                    "d": 0,
                    "arrival_interval_s": 0.0,
                    "trial": trial,
                    "completed": 1,
                    "latency_s": res["last_latency_s"],
                    "bytes_on_wire": 0,
                    "predicted_T_d": 0.0,
                }
            )
    else:
        raise ValueError(
            f"scenario {name!r} has no tcp backend; use rtt or broadcast"
        )
    return rows
