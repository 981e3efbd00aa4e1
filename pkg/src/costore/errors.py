"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "CostoreError",
    "ConfigError",
    "WireError",
    "StoreError",
    "ObjectExists",
    "ObjectNotFound",
    "ObjectDeleted",
    "SizeMismatch",
    "CapacityExceeded",
    "PeerDown",
    "TransferAborted",
    "Unsatisfiable",
    "DeadlockError",
    "AssertionFailed",
]


class CostoreError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CostoreError):
    """Invalid or inconsistent cluster configuration."""


class WireError(CostoreError):
    """Malformed frame or protocol violation on the wire."""


class StoreError(CostoreError):
    """Base class for local object store errors."""


class ObjectExists(StoreError):
    """An entry with this id already exists in the local store."""


class ObjectNotFound(StoreError):
    """No entry with this id exists in the local store."""


class ObjectDeleted(CostoreError):
    """The object was deleted cluster-wide; the id is tombstoned."""


class SizeMismatch(CostoreError):
    """Conflicting total sizes were announced for the same object id."""


class CapacityExceeded(StoreError):
    """The store cannot fit the entry even after evicting unpinned ones."""


class PeerDown(CostoreError):
    """The peer node is unreachable or was declared failed.

    ``node_id`` names the unreachable peer.
    """

    def __init__(self, node_id: str, message: str = ""):
        super().__init__(message or f"peer {node_id} is down")
        self.node_id = node_id


class TransferAborted(CostoreError):
    """The sender aborted an in-flight transfer.

    ``reason`` is one of the ABORT_* codes in :mod:`costore.wire`.
    """

    def __init__(self, reason: int, message: str = ""):
        super().__init__(message or f"transfer aborted (reason={reason})")
        self.reason = reason


class Unsatisfiable(CostoreError):
    """A reduction can no longer complete: too few sources can ever publish."""


class DeadlockError(CostoreError):
    """The simulator ran out of events while an operation was still pending."""


class AssertionFailed(CostoreError):
    """An invariant embedded in a benchmark scenario or trace check failed.

    The message names the violated invariant.
    """
