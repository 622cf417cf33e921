"""Bus semantics: typing, ordering, bounded queues, tracing."""

import json
import threading

import pytest

from softarm.bus import (
    Bus,
    Envelope,
    KindMismatch,
    MessageKind,
    TraceWriter,
)


def make_bus():
    now = {"ms": 0}
    bus = Bus(now_ms=lambda: now["ms"])
    return bus, now


def test_topic_names_are_validated():
    bus, _ = make_bus()
    for bad in ("", "arm/command", "/Arm/command", "/arm//command", "/arm/command/"):
        with pytest.raises(ValueError):
            bus.advertise(bad, MessageKind.ARM_COMMAND, "p1")


def test_topic_is_bound_to_one_kind():
    bus, _ = make_bus()
    bus.advertise("/arm/command", MessageKind.ARM_COMMAND, "p1")
    with pytest.raises(KindMismatch):
        bus.advertise("/arm/command", MessageKind.ARM_STATUS, "p2")
    with pytest.raises(KindMismatch):
        bus.subscribe("/arm/command", MessageKind.PRESSURE_READING)


def test_publish_stamps_and_sequences():
    bus, now = make_bus()
    pub = bus.advertise("/arm/status", MessageKind.ARM_STATUS, "p1")
    sub = bus.subscribe("/arm/status", MessageKind.ARM_STATUS)
    now["ms"] = 5
    first = pub.publish({"state": "busy"})
    now["ms"] = 9
    second = pub.publish({"state": "complete"})
    assert (first.seq, second.seq) == (1, 2)
    assert (first.stamp_ms, second.stamp_ms) == (5, 9)
    got = sub.drain()
    assert [e.payload["state"] for e in got] == ["busy", "complete"]


def test_sequences_are_per_publisher():
    bus, _ = make_bus()
    a = bus.advertise("/arm/status", MessageKind.ARM_STATUS, "a")
    b = bus.advertise("/arm/status", MessageKind.ARM_STATUS, "b")
    assert a.publish({}).seq == 1
    assert b.publish({}).seq == 1
    assert a.publish({}).seq == 2


def test_payload_is_immutable():
    bus, _ = make_bus()
    pub = bus.advertise("/arm/status", MessageKind.ARM_STATUS, "p1")
    envelope = pub.publish({"state": "busy"})
    with pytest.raises(TypeError):
        envelope.payload["state"] = "idle"


def test_no_replay_for_late_subscribers():
    bus, _ = make_bus()
    pub = bus.advertise("/arm/status", MessageKind.ARM_STATUS, "p1")
    pub.publish({"state": "busy"})
    late = bus.subscribe("/arm/status", MessageKind.ARM_STATUS)
    assert late.drain() == []


def test_bounded_queue_drops_oldest():
    bus, _ = make_bus()
    pub = bus.advertise("/arm/status", MessageKind.ARM_STATUS, "p1")
    sub = bus.subscribe("/arm/status", MessageKind.ARM_STATUS, depth=3)
    for i in range(5):
        pub.publish({"i": i})
    assert sub.dropped == 2
    assert [e.payload["i"] for e in sub.drain()] == [2, 3, 4]


def test_fan_out_reaches_every_subscriber():
    bus, _ = make_bus()
    pub = bus.advertise("/arm/status", MessageKind.ARM_STATUS, "p1")
    subs = [bus.subscribe("/arm/status", MessageKind.ARM_STATUS) for _ in range(4)]
    pub.publish({"n": 1})
    for sub in subs:
        assert [e.payload["n"] for e in sub.drain()] == [1]


def test_trace_writer_lines(tmp_path):
    path = tmp_path / "trace.jsonl"
    bus, now = make_bus()
    bus.trace = TraceWriter(str(path))
    pub = bus.advertise("/arm/status", MessageKind.ARM_STATUS, "p1")
    now["ms"] = 7
    pub.publish({"state": "busy"})
    bus.trace.append_record({"note": "checkpoint"})
    bus.trace.close()
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert lines[0] == {
        "type": "envelope",
        "topic": "/arm/status",
        "kind": "ArmStatus",
        "publisher": "p1",
        "seq": 1,
        "stamp_ms": 7,
        "payload": {"state": "busy"},
    }
    assert lines[1] == {"type": "record", "note": "checkpoint"}


def test_concurrent_publishers_keep_fifo_per_publisher():
    bus, _ = make_bus()
    sub = bus.subscribe("/arm/status", MessageKind.ARM_STATUS, depth=4000)
    publishers = [
        bus.advertise("/arm/status", MessageKind.ARM_STATUS, f"p{i}") for i in range(4)
    ]

    def hammer(pub):
        for i in range(500):
            pub.publish({"i": i})

    threads = [threading.Thread(target=hammer, args=(p,)) for p in publishers]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    seen: dict[str, list[Envelope]] = {}
    for envelope in sub.drain():
        seen.setdefault(envelope.publisher_id, []).append(envelope)
    assert sorted(seen) == ["p0", "p1", "p2", "p3"]
    for envelopes in seen.values():
        assert [e.seq for e in envelopes] == list(range(1, 501))
        assert [e.payload["i"] for e in envelopes] == list(range(500))
