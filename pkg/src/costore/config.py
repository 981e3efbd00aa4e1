"""Cluster configuration.

Configs are plain dataclasses loadable from YAML. Every tunable that the
benchmark scenarios vary (block size, small-object threshold, failure
detection interval, link latency and bandwidth) lives here so that a run is
fully described by (config, scenario, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import yaml

from .errors import ConfigError

__all__ = [
    "DEFAULT_BLOCK_BYTES",
    "DEFAULT_SMALL_OBJECT_THRESHOLD",
    "NetworkProfile",
    "NodeSpec",
    "ClusterConfig",
]

DEFAULT_BLOCK_BYTES = 4 * 1024 * 1024
DEFAULT_SMALL_OBJECT_THRESHOLD = 64 * 1024


@dataclass(frozen=True, slots=True)
class NetworkProfile:
    """Symmetric link model: one-way latency plus per-node bandwidth."""

    latency_s: float = 0.001
    bandwidth_Bps: float = 1e9

    def __post_init__(self) -> None:
        if self.latency_s < 0:
            raise ConfigError("latency_s must be >= 0")
        if self.bandwidth_Bps <= 0:
            raise ConfigError("bandwidth_Bps must be > 0")


@dataclass(frozen=True, slots=True)
class NodeSpec:
    node_id: str
    host: str = "127.0.0.1"
    port: int = 0


@dataclass(frozen=True, slots=True)
class ClusterConfig:
    nodes: tuple[NodeSpec, ...]
    directory_nodes: tuple[str, ...] = ()
    shard_count: int = 8
    profile: NetworkProfile = field(default_factory=NetworkProfile)
    block_bytes: int = DEFAULT_BLOCK_BYTES
    small_object_threshold: int = DEFAULT_SMALL_OBJECT_THRESHOLD
    detection_interval_s: float = 0.1
    store_capacity_bytes: int = 0  # 0 means unlimited

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ConfigError("at least one node is required")
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate node ids")
        if not self.directory_nodes:
            object.__setattr__(self, "directory_nodes", (ids[0],))
        known = set(ids)
        for d in self.directory_nodes:
            if d not in known:
                raise ConfigError(f"directory node {d!r} is not a cluster node")
        if self.shard_count < 1:
            raise ConfigError("shard_count must be >= 1")
        if self.block_bytes < 1:
            raise ConfigError("block_bytes must be >= 1")
        if self.small_object_threshold < 0:
            raise ConfigError("small_object_threshold must be >= 0")
        if self.detection_interval_s < 0:
            raise ConfigError("detection_interval_s must be >= 0")

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.node_id for n in self.nodes)

    def spec_of(self, node_id: str) -> NodeSpec:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise ConfigError(f"unknown node {node_id!r}")

    def shard_home(self, shard_index: int) -> str:
        """Node hosting the given directory shard (round-robin placement)."""
        return self.directory_nodes[shard_index % len(self.directory_nodes)]

    def with_overrides(self, **kwargs: Any) -> "ClusterConfig":
        return replace(self, **kwargs)

    @classmethod
    def local(cls, n_nodes: int, **kwargs: Any) -> "ClusterConfig":
        """Config for an n-node cluster with generated node ids."""
        nodes = tuple(NodeSpec(node_id=f"n{i}") for i in range(n_nodes))
        return cls(nodes=nodes, **kwargs)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ClusterConfig":
        try:
            nodes = tuple(
                NodeSpec(
                    node_id=str(n["node_id"]),
                    host=str(n.get("host", "127.0.0.1")),
                    port=int(n.get("port", 0)),
                )
                for n in data["nodes"]
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad nodes section: {exc!r}") from exc
        prof = data.get("profile", {})
        profile = NetworkProfile(
            latency_s=float(prof.get("latency_s", 0.001)),
            bandwidth_Bps=float(prof.get("bandwidth_Bps", 1e9)),
        )
        return cls(
            nodes=nodes,
            directory_nodes=tuple(data.get("directory_nodes", ())),
            shard_count=int(data.get("shard_count", 8)),
            profile=profile,
            block_bytes=int(data.get("block_bytes", DEFAULT_BLOCK_BYTES)),
            small_object_threshold=int(
                data.get("small_object_threshold", DEFAULT_SMALL_OBJECT_THRESHOLD)
            ),
            detection_interval_s=float(data.get("detection_interval_s", 0.1)),
            store_capacity_bytes=int(data.get("store_capacity_bytes", 0)),
        )

    @classmethod
    def from_yaml(cls, path: str) -> "ClusterConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a mapping at top level")
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": [
                {"node_id": n.node_id, "host": n.host, "port": n.port}
                for n in self.nodes
            ],
            "directory_nodes": list(self.directory_nodes),
            "shard_count": self.shard_count,
            "profile": {
                "latency_s": self.profile.latency_s,
                "bandwidth_Bps": self.profile.bandwidth_Bps,
            },
            "block_bytes": self.block_bytes,
            "small_object_threshold": self.small_object_threshold,
            "detection_interval_s": self.detection_interval_s,
            "store_capacity_bytes": self.store_capacity_bytes,
        }

    def to_yaml(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)
