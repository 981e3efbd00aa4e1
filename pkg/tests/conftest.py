"""Shared helpers: deterministic clusters and payloads."""

from __future__ import annotations

import numpy as np
from hypothesis import HealthCheck, settings

from costore.cluster import SimCluster
from costore.config import ClusterConfig, NetworkProfile
from costore.trace import Tracer

settings.register_profile(
    "suite",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def make_cluster(
    n_nodes: int,
    *,
    latency_s: float = 1e-3,
    bandwidth_Bps: float = 1e9,
    block_bytes: int = 262144,
    small_object_threshold: int = 65536,
    detection_interval_s: float = 0.002,
    shard_count: int = 8,
    store_capacity_bytes: int = 0,
    level: int = 1,
) -> SimCluster:
    cfg = ClusterConfig.local(
        n_nodes,
        profile=NetworkProfile(latency_s=latency_s, bandwidth_Bps=bandwidth_Bps),
        shard_count=shard_count,
        block_bytes=block_bytes,
        small_object_threshold=small_object_threshold,
        detection_interval_s=detection_interval_s,
        store_capacity_bytes=store_capacity_bytes,
    )
    return SimCluster(cfg, Tracer(level=level))


def payload(seed: int, nbytes: int) -> bytes:
    return (
        np.random.default_rng(seed)
        .integers(0, 256, size=nbytes, dtype=np.uint8)
        .tobytes()
    )


def ivec(seed: int, elems: int, dtype=np.int64) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if np.issubdtype(dtype, np.integer):
        return rng.integers(-1_000_000, 1_000_000, size=elems, dtype=dtype)
    return rng.standard_normal(elems).astype(dtype)


def stored_bytes(cluster: SimCluster, node_id: str, oid) -> bytes:
    entry = cluster.node(node_id).store.get(oid)
    return bytes(entry.view(0, entry.size))
