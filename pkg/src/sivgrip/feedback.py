"""Hand-roll valuing and the gesture/push plumbing around it.

A right hand rolled thumb-up reads as roll angles strictly between -135
and -45 degrees and values to +1.0; everything else, including an absent
hand, values to -1.0. Sources hold the most recent sample between ticks
(zero-order hold) and the push channel collapses everything that arrived
inside one tick window into at most one event.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .errors import EndOfStreamError

THUMBS_UP = 1.0
THUMBS_DOWN = -1.0
ROLL_THUMBS_UP = -90.0
ROLL_THUMBS_DOWN = 0.0

LIVE_QUEUE_LIMIT = 64


@dataclass(frozen=True)
class HandSample:
    roll_deg: float
    present: bool
    t_ms: int


@dataclass(frozen=True)
class PushEvent:
    t_ms: int


def absent_sample(t_ms: int = 0) -> HandSample:
    return HandSample(roll_deg=0.0, present=False, t_ms=t_ms)


def hand_state(sample: HandSample) -> float:
    """Value a single sample: +1.0 for a present thumbs-up roll, else -1.0."""
    if sample.present and -135.0 < sample.roll_deg < -45.0:
        return THUMBS_UP
    return THUMBS_DOWN


class HeldSource:
    """Zero-order-hold gesture source fed sample by sample."""

    def __init__(self, limit: int | None = None):
        self._queue = deque(maxlen=limit)
        self._held: HandSample | None = None

    def push(self, sample: HandSample) -> None:
        self._queue.append(sample)

    def latest(self, t_ms: int) -> HandSample:
        while self._queue and self._queue[0].t_ms <= t_ms:
            self._held = self._queue.popleft()
        if self._held is None or self._held.t_ms > t_ms:
            return absent_sample(t_ms)
        return self._held


class LiveGestureSource(HeldSource):
    """Bounded single-producer/single-consumer source; overflow drops oldest."""

    def __init__(self):
        super().__init__(limit=LIVE_QUEUE_LIMIT)


class ReplayGestureSource(HeldSource):
    """Replays a recorded sample stream; sampling past the log end raises."""

    def __init__(self, samples, end_ms: int):
        super().__init__()
        for sample in samples:
            self.push(sample)
        self.end_ms = end_ms

    def latest(self, t_ms: int) -> HandSample:
        if t_ms > self.end_ms:
            raise EndOfStreamError(f"replay log ends at {self.end_ms} ms, asked for {t_ms} ms")
        return super().latest(t_ms)


def sample_at_tick(source, t_ms: int) -> float:
    """Valued hand state of the most recent sample at or before the tick."""
    return hand_state(source.latest(t_ms))


class PushChannel:
    """Collects push events; each tick drains to at most one."""

    def __init__(self):
        self._queue = deque()

    def push(self, event: PushEvent) -> None:
        self._queue.append(event)

    def drain(self, t_ms: int) -> PushEvent | None:
        """Consume every queued event stamped at or before the tick,
        collapsed into the earliest one."""
        first = None
        while self._queue and self._queue[0].t_ms <= t_ms:
            event = self._queue.popleft()
            if first is None:
                first = event
        return first


def drain_pushes(channel: PushChannel, t_ms: int) -> PushEvent | None:
    return channel.drain(t_ms)


def gesture_record(sample: HandSample) -> dict:
    return {"t_ms": sample.t_ms, "roll_deg": sample.roll_deg, "present": sample.present}


def push_record(event: PushEvent) -> dict:
    return {"t_ms": event.t_ms, "push": True}


@dataclass
class ReplayLog:
    """Parsed replay file: gesture samples, pushes, and any other records."""

    samples: list
    pushes: list
    records: list

    @property
    def end_ms(self) -> int:
        stamps = [s.t_ms for s in self.samples] + [p.t_ms for p in self.pushes]
        stamps += [r["t_ms"] for r in self.records if "t_ms" in r]
        return max(stamps) if stamps else 0


def parse_replay_line(line: str) -> dict:
    return json.loads(line)


def load_replay_log(path) -> ReplayLog:
    samples = []
    pushes = []
    records = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        record = parse_replay_line(line)
        if record.get("push") is True:
            pushes.append(PushEvent(t_ms=int(record["t_ms"])))
        elif "roll_deg" in record:
            samples.append(
                HandSample(
                    roll_deg=float(record["roll_deg"]),
                    present=bool(record["present"]),
                    t_ms=int(record["t_ms"]),
                )
            )
        else:
            records.append(record)
    return ReplayLog(samples=samples, pushes=pushes, records=records)


class ReplayLogWriter:
    """Appends newline-delimited JSON records, one per event."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = self.path.open("w")

    def write(self, record: dict) -> None:
        self._fh.write(json.dumps(record) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()
