"""Simulated cluster: nodes wired to the discrete-event network."""

from __future__ import annotations

from .config import ClusterConfig
from .node import Node
from .trace import Tracer
from .transport.base import Ticket
from .transport.sim import SimNetwork

__all__ = ["SimCluster"]


class SimCluster:
    def __init__(self, config: ClusterConfig, tracer: Tracer | None = None):
        self.config = config
        self.tracer = tracer if tracer is not None else Tracer(level=1)
        self.network = SimNetwork(config, self.tracer)
        self.nodes: dict[str, Node] = {}
        for nid in config.node_ids:
            self.nodes[nid] = Node(nid, config, self.network.attach(nid), self.tracer)

    def node(self, node_id: str) -> Node:
        return self.nodes[node_id]

    @property
    def now(self) -> float:
        return self.network.now

    def at(self, t: float, fn) -> None:
        """Schedule a scenario action at absolute sim time ``t``."""
        self.network.schedule_at(t, fn)

    def run_until(self, t: float) -> None:
        self.network.run_until(t)

    def run_all(self, limit_s: float | None = None) -> None:
        self.network.run_all(limit_s)

    def drive(self, ticket: Ticket):
        return self.network.drive(ticket)

    # -- failure injection --------------------------------------------------

    def kill(self, node_id: str, at: float | None = None) -> None:
        self.network.kill(node_id, at)

    def revive(self, node_id: str, at: float | None = None) -> None:
        self.network.revive(node_id, at)
        # rebuild runs after the revive event at the same timestamp; the
        # rejoining node starts from an empty store
        self.network.schedule_at(
            self.now if at is None else at, lambda: self._rebuild(node_id)
        )

    def _rebuild(self, node_id: str) -> None:
        if self.network.is_dead(node_id):
            return
        self.nodes[node_id] = Node(
            node_id, self.config, self.network.transports[node_id], self.tracer
        )

    def partition(self, a: str, b: str, at: float | None = None) -> None:
        self.network.partition(a, b, at)

    def heal(self, a: str, b: str, at: float | None = None) -> None:
        self.network.heal(a, b, at)
