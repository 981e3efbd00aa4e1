"""Structured event trace.

One process-wide list of dict events per run, appended in execution order
and dumped as JSONL. Level 0 disables collection, level 1 records protocol
milestones, level 2 adds per-frame and per-write detail (used by the replay
checker on small fault scenarios; too chatty for bulk runs).
"""

from __future__ import annotations

import json
from collections import Counter
from typing import Any, Callable

__all__ = ["Tracer", "load_jsonl"]


class Tracer:
    def __init__(self, level: int = 1):
        self.level = level
        self.events: list[dict[str, Any]] = []
        self.counters: Counter[str] = Counter()
        self._clock: Callable[[], float] = lambda: 0.0

    def set_clock(self, fn: Callable[[], float]) -> None:
        self._clock = fn

    def emit(self, kind: str, **fields: Any) -> None:
        if self.level >= 1:
            self.events.append({"t": self._clock(), "kind": kind, **fields})

    def emit_v(self, kind: str, **fields: Any) -> None:
        if self.level >= 2:
            self.events.append({"t": self._clock(), "kind": kind, **fields})

    @property
    def verbose(self) -> bool:
        return self.level >= 2

    def bump(self, counter: str, amount: int = 1) -> None:
        self.counters[counter] += amount

    def dump_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for ev in self.events:
                fh.write(json.dumps(ev, sort_keys=True, separators=(",", ":")))
                fh.write("\n")


def load_jsonl(path: str) -> list[dict[str, Any]]:
    out: list[dict[str, Any]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
