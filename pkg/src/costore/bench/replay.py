"""Offline trace replay: structural invariant checks over recorded events.

The checker rebuilds directory loan bookkeeping and per-entry write
positions purely from the event stream, independently of the engines that
produced it, and raises :class:`AssertionFailed` on the first violation.
It validates five invariants:

1. single-sender: a location serves at most one borrower per object at a
   time (no two overlapping loans from the same sender).
2. acyclic pulls: granting a loan never makes a node transitively its own
   upstream.
3. exactly-once writes: per (node, object) the recorded write offsets are
   gapless, non-overlapping, and restart at zero only after an event that
   legitimately discarded the partial bytes (invalidation, eviction, or an
   abort-driven retry). Requires a level-2 trace; with a level-1 trace the
   check reports zero writes rather than failing.
4. bounded invalidation: a repair invalidates at most (failed slots) x
   (recorded bound) slots.
5. source-injective slots: no two live reduction slots consume the same
   source object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from ..errors import AssertionFailed

__all__ = ["ReplayReport", "replay_events", "replay_file"]

Event = dict[str, Any]


@dataclass
class ReplayReport:
    events: int = 0
    loans_opened: int = 0
    loans_closed: int = 0
    max_chain_len: int = 0
    writes: int = 0
    write_resets: int = 0
    repairs: int = 0
    worst_invalidated: int = 0
    slot_assigns: int = 0
    lines: list[str] = field(default_factory=list)

    def summary(self) -> str:
        return "\n".join(self.lines)


class _LoanState:
    """Mirror of the directory's per-object loan pointers."""

    __slots__ = ("on_loan_to", "current_sender")

    def __init__(self) -> None:
        self.on_loan_to: dict[str, str] = {}
        self.current_sender: dict[str, str] = {}

    def release(self, gone: str) -> None:
        self.on_loan_to.pop(gone, None)
        self.current_sender.pop(gone, None)
        for sender, borrower in list(self.on_loan_to.items()):
            if borrower == gone:
                del self.on_loan_to[sender]
        for borrower, sender in list(self.current_sender.items()):
            if sender == gone:
                del self.current_sender[borrower]


def _fail(ev: Event, why: str) -> None:
    raise AssertionFailed(f"t={ev.get('t', 0):.9f} {ev.get('kind')}: {why}")


def replay_events(events: Iterable[Event]) -> ReplayReport:
    rep = ReplayReport()
    loans: dict[str, _LoanState] = {}
    # (node, oid) -> next expected write offset
    write_pos: dict[tuple[str, str], int] = {}
    # (node, oid) pairs allowed to restart at offset zero
    reset_ok: set[tuple[str, str]] = set()
    # target -> {slot: source} for live assignments
    slots: dict[str, dict[int, str]] = {}

    def loan_state(oid: str) -> _LoanState:
        st = loans.get(oid)
        if st is None:
            st = loans[oid] = _LoanState()
        return st

    def allow_reset(node: str, oid: str) -> None:
        if (node, oid) in write_pos:
            reset_ok.add((node, oid))

    for ev in events:
        rep.events += 1
        kind = ev.get("kind")

        if kind == "trial_boundary":
            # concatenated trials run on fresh clusters; state does not carry
            loans.clear()
            write_pos.clear()
            reset_ok.clear()
            slots.clear()

        elif kind == "loan_open":
            oid, sender, receiver = ev["oid"], ev["sender"], ev["receiver"]
            st = loan_state(oid)
            if sender in st.on_loan_to:
                _fail(
                    ev,
                    f"{sender} already serves {st.on_loan_to[sender]} for "
                    f"this object (single-sender violation)",
                )
            # the new borrower must not already be upstream of the sender
            chain = [sender]
            cur = st.current_sender.get(sender)
            while cur is not None:
                if cur == receiver or cur in chain:
                    _fail(
                        ev,
                        f"granting {sender}->{receiver} closes a pull cycle "
                        f"via {' -> '.join(chain + [cur])}",
                    )
                chain.append(cur)
                cur = st.current_sender.get(cur)
            rep.max_chain_len = max(rep.max_chain_len, len(chain))
            st.on_loan_to[sender] = receiver
            st.current_sender[receiver] = sender
            rep.loans_opened += 1

        elif kind == "loan_close":
            oid, sender, receiver = ev["oid"], ev["sender"], ev["receiver"]
            st = loan_state(oid)
            if st.on_loan_to.get(sender) == receiver:
                del st.on_loan_to[sender]
            if st.current_sender.get(receiver) == sender:
                del st.current_sender[receiver]
            rep.loans_closed += 1

        elif kind == "location_removed":
            loan_state(ev["oid"]).release(ev["node"])
            allow_reset(ev["node"], ev["oid"])

        elif kind == "purge_node":
            node = ev["node"]
            for st in loans.values():
                st.release(node)

        elif kind == "partials_invalidated":
            oid = ev["oid"]
            st = loan_state(oid)
            for node in ev.get("nodes", ()):
                st.release(node)
                allow_reset(node, oid)

        elif kind == "deleted":
            loans.pop(ev["oid"], None)

        elif kind == "evicted":
            allow_reset(ev["node"], ev["oid"])

        elif kind == "fetch_retry":
            # abort-driven retry may have dropped the partial (restart case)
            allow_reset(ev["node"], ev["oid"])

        elif kind == "entry_write":
            key = (ev["node"], ev["oid"])
            offset, n = ev["offset"], ev["n"]
            expected = write_pos.get(key, 0)
            if offset != expected:
                if offset == 0 and key in reset_ok:
                    rep.write_resets += 1
                else:
                    _fail(
                        ev,
                        f"{ev['node']} wrote offset {offset} but {expected} "
                        f"was next (duplicate or gap in {ev['oid']})",
                    )
            write_pos[key] = offset + n
            reset_ok.discard(key)
            rep.writes += 1

        elif kind == "repair":
            failed = ev.get("failed", [])
            invalidated = ev.get("invalidated", [])
            bound = ev.get("bound", 0)
            limit = max(len(failed), 1) * bound
            if len(invalidated) > limit:
                _fail(
                    ev,
                    f"{len(invalidated)} slots invalidated for "
                    f"{len(failed)} failure(s); limit {limit}",
                )
            rep.repairs += 1
            rep.worst_invalidated = max(rep.worst_invalidated, len(invalidated))
            live = slots.get(ev["target"])
            if live is not None:
                for k in failed:
                    live.pop(k, None)

        elif kind == "slot_assign":
            target, slot, source = ev["target"], ev["slot"], ev["source"]
            live = slots.setdefault(target, {})
            for other, src in live.items():
                if src == source and other != slot:
                    _fail(
                        ev,
                        f"source {source} already feeds slot {other}, "
                        f"cannot also feed slot {slot}",
                    )
            live[slot] = source
            rep.slot_assigns += 1

    rep.lines = [
        f"events replayed            {rep.events}",
        f"loans opened/closed        {rep.loans_opened}/{rep.loans_closed} "
        f"(single-sender ok, longest pull chain {rep.max_chain_len})",
        f"entry writes               {rep.writes} "
        f"(exactly-once ok, {rep.write_resets} legitimate restarts)",
        f"repairs                    {rep.repairs} "
        f"(worst invalidation {rep.worst_invalidated} slots, within bound)",
        f"slot assignments           {rep.slot_assigns} (source-injective ok)",
    ]
    return rep


def replay_file(path: str) -> ReplayReport:
    from ..trace import load_jsonl

    return replay_events(load_jsonl(path))
