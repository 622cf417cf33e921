"""In-process typed publish/subscribe bus.

Topics carry exactly one message kind, established by the first
advertiser or subscriber.  Every publish is stamped with the current
virtual time, gets a per-publisher-per-topic sequence number, is
fanned out synchronously to the subscription queues that exist at that
moment, and is appended to the trace.  Queues are bounded and drop the
oldest envelope on overflow; nothing is replayed to late subscribers.
"""

from __future__ import annotations

import json
import re
import threading
from collections import deque
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Any, Callable, Mapping

TOPIC_RE = re.compile(r"^(/[a-z0-9_]+)+$")

DEFAULT_QUEUE_DEPTH = 64


class MessageKind(Enum):
    ARM_COMMAND = "ArmCommand"
    ARM_STATUS = "ArmStatus"
    PRESSURE_COMMAND = "PressureCommand"
    PRESSURE_READING = "PressureReading"
    PRESSURE_STATUS = "PressureStatus"
    PLANT_PROBE = "PlantProbe"


class KindMismatch(Exception):
    """Topic already carries a different message kind."""


@dataclass(frozen=True)
class Envelope:
    topic: str
    kind: MessageKind
    payload: Mapping[str, Any]
    publisher_id: str
    seq: int
    stamp_ms: int


class Subscription:
    """Bounded FIFO of envelopes for one subscriber on one topic."""

    def __init__(self, topic: str, kind: MessageKind, depth: int, lock: threading.Lock):
        self.topic = topic
        self.kind = kind
        self.dropped = 0  # oldest-dropped count on overflow
        self._depth = depth
        self._queue: deque[Envelope] = deque()
        self._lock = lock

    def _deliver(self, envelope: Envelope) -> None:
        if len(self._queue) >= self._depth:
            self._queue.popleft()
            self.dropped += 1
        self._queue.append(envelope)

    def pop(self) -> Envelope | None:
        with self._lock:
            return self._queue.popleft() if self._queue else None

    def drain(self) -> list[Envelope]:
        with self._lock:
            out = list(self._queue)
            self._queue.clear()
            return out

    def __len__(self) -> int:
        return len(self._queue)


class PublisherHandle:
    def __init__(self, bus: "Bus", topic: str, kind: MessageKind, publisher_id: str):
        self.bus = bus
        self.topic = topic
        self.kind = kind
        self.publisher_id = publisher_id

    def publish(self, payload: Mapping[str, Any]) -> Envelope:
        return self.bus.publish(self, payload)


class _Topic:
    __slots__ = ("kind", "subscriptions", "next_seq")

    def __init__(self, kind: MessageKind):
        self.kind = kind
        self.subscriptions: list[Subscription] = []
        self.next_seq: dict[str, int] = {}  # per publisher_id


class Bus:
    """Thread-safe bus; deterministic when driven from one logical thread.

    ``now_ms`` supplies envelope stamps; wire in the virtual clock for
    simulation runs.  ``trace`` receives one JSON line per publish when
    set (see ``TraceWriter``).
    """

    def __init__(self, now_ms: Callable[[], int] | None = None):
        self._now_ms = now_ms or (lambda: 0)
        self._lock = threading.Lock()
        self._topics: dict[str, _Topic] = {}
        self.trace: TraceWriter | None = None
        self.history: list[Envelope] | None = None

    def keep_history(self) -> None:
        """Start collecting every published envelope in ``self.history``."""
        if self.history is None:
            self.history = []

    def _topic(self, topic: str, kind: MessageKind) -> _Topic:
        if not TOPIC_RE.match(topic):
            raise ValueError(f"invalid topic name {topic!r}")
        record = self._topics.get(topic)
        if record is None:
            record = self._topics[topic] = _Topic(kind)
        elif record.kind is not kind:
            raise KindMismatch(
                f"topic {topic} carries {record.kind.value}, not {kind.value}"
            )
        return record

    def advertise(self, topic: str, kind: MessageKind, publisher_id: str) -> PublisherHandle:
        with self._lock:
            self._topic(topic, kind)
            return PublisherHandle(self, topic, kind, publisher_id)

    def subscribe(
        self, topic: str, kind: MessageKind, depth: int = DEFAULT_QUEUE_DEPTH
    ) -> Subscription:
        if depth < 1:
            raise ValueError("queue depth must be at least 1")
        with self._lock:
            record = self._topic(topic, kind)
            subscription = Subscription(topic, kind, depth, self._lock)
            record.subscriptions.append(subscription)
            return subscription

    def publish(self, handle: PublisherHandle, payload: Mapping[str, Any]) -> Envelope:
        with self._lock:
            record = self._topics[handle.topic]
            if record.kind is not handle.kind:
                raise KindMismatch(
                    f"handle kind {handle.kind.value} does not match topic"
                )
            seq = record.next_seq.get(handle.publisher_id, 0) + 1
            record.next_seq[handle.publisher_id] = seq
            envelope = Envelope(
                topic=handle.topic,
                kind=handle.kind,
                payload=MappingProxyType(dict(payload)),
                publisher_id=handle.publisher_id,
                seq=seq,
                stamp_ms=self._now_ms(),
            )
            for subscription in record.subscriptions:
                subscription._deliver(envelope)
            if self.history is not None:
                self.history.append(envelope)
            if self.trace is not None:
                self.trace.append_envelope(envelope)
            return envelope


class TraceWriter:
    """JSON Lines trace: one envelope or execution record per line."""

    def __init__(self, path: str):
        self.path = path
        self._file = open(path, "w", encoding="utf-8")

    def append_envelope(self, envelope: Envelope) -> None:
        self._append(
            {
                "type": "envelope",
                "topic": envelope.topic,
                "kind": envelope.kind.value,
                "publisher": envelope.publisher_id,
                "seq": envelope.seq,
                "stamp_ms": envelope.stamp_ms,
                "payload": dict(envelope.payload),
            }
        )

    def append_record(self, record: Mapping[str, Any]) -> None:
        self._append({"type": "record", **record})

    def _append(self, obj: Mapping[str, Any]) -> None:
        self._file.write(json.dumps(obj, separators=(",", ":")) + "\n")

    def close(self) -> None:
        if not self._file.closed:
            self._file.flush()
            self._file.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
