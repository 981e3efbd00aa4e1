"""Fault-tolerant collective communication on an immutable object store.

The package combines a per-node object store, a sharded location directory,
receiver-driven broadcast and streaming tree reduction. All protocol logic
runs identically over a deterministic discrete-event simulator and a real
TCP backend.
"""

from __future__ import annotations

from .config import ClusterConfig, NetworkProfile, NodeSpec
from .errors import (
    CostoreError,
    ObjectDeleted,
    PeerDown,
    SizeMismatch,
    TransferAborted,
    Unsatisfiable,
)
from .ids import ObjectID

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ObjectID",
    "ClusterConfig",
    "NetworkProfile",
    "NodeSpec",
    "CostoreError",
    "ObjectDeleted",
    "PeerDown",
    "SizeMismatch",
    "TransferAborted",
    "Unsatisfiable",
]
