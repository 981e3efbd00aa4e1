"""Transport interface shared by the simulator and the TCP backend.

Protocol engines are sans-I/O: they react to ``(src, message)`` deliveries
and timers, and emit sends. Each node's callbacks run serially, so engine
code never locks.
"""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from typing import Callable

from ..wire import Message

__all__ = ["Ticket", "Transport"]


class Ticket:
    """Minimal completion handle usable from sim callbacks and TCP threads."""

    __slots__ = ("_done", "_value", "_error", "_callbacks", "_event")

    def __init__(self) -> None:
        self._done = False
        self._value = None
        self._error: BaseException | None = None
        self._callbacks: list[Callable[["Ticket"], None]] = []
        self._event: threading.Event | None = None

    @property
    def done(self) -> bool:
        return self._done

    def set_result(self, value) -> None:
        if self._done:
            return
        self._done = True
        self._value = value
        self._fire()

    def set_exception(self, error: BaseException) -> None:
        if self._done:
            return
        self._done = True
        self._error = error
        self._fire()

    def _fire(self) -> None:
        if self._event is not None:
            self._event.set()
        callbacks, self._callbacks = self._callbacks, []
        for fn in callbacks:
            fn(self)

    def add_done_callback(self, fn: Callable[["Ticket"], None]) -> None:
        if self._done:
            fn(self)
        else:
            self._callbacks.append(fn)

    def exception(self) -> BaseException | None:
        return self._error

    def result(self):
        if not self._done:
            raise RuntimeError("ticket not resolved yet")
        if self._error is not None:
            raise self._error
        return self._value

    def wait(self, timeout: float | None = None) -> bool:
        """Block a real thread until resolution (TCP backend only)."""
        if self._done:
            return True
        if self._event is None:
            self._event = threading.Event()
            if self._done:  # resolved while installing the event
                self._event.set()
        return self._event.wait(timeout)


class Transport(ABC):
    """One node's attachment to the network."""

    node_id: str

    @abstractmethod
    def send(self, dst: str, msg: Message) -> None:
        """Queue a frame. Raises PeerDown once ``dst`` was declared failed."""

    @abstractmethod
    def set_receiver(self, fn: Callable[[str, Message], None]) -> None:
        ...

    @abstractmethod
    def set_peer_down_handler(self, fn: Callable[[str], None]) -> None:
        ...

    @abstractmethod
    def now(self) -> float:
        ...

    @abstractmethod
    def call_later(self, delay_s: float, fn: Callable[[], None]) -> None:
        ...

    @abstractmethod
    def notify_writable(self, dst: str, fn: Callable[[], None]) -> None:
        """Invoke ``fn`` once when another bulk frame can be queued to
        ``dst`` without building an unbounded backlog."""

    @abstractmethod
    def drive(self, ticket: Ticket):
        """Advance the world until the ticket resolves; return its result."""
