"""Discrete-event engine: integer-picosecond clock, ordered queue, RNG streams."""
from __future__ import annotations

import heapq
import zlib
from collections.abc import Callable
from typing import Any

import numpy as np

PS_PER_S = 10**12


def seconds_to_ps(t: float) -> int:
    return int(round(t * PS_PER_S))


def ps_to_seconds(t: int) -> float:
    return t / PS_PER_S


class SchedulingError(ValueError):
    pass


class ProtocolError(RuntimeError):
    pass


class EventFailure(RuntimeError):
    """An event action raised; carries the offending event."""

    def __init__(self, event: "Event", cause: BaseException):
        super().__init__(f"event #{event.sequence_id} '{event.label}' at t={event.fire_time} ps "
                         f"failed: {cause!r}")
        self.event = event
        self.cause = cause


class Event:
    __slots__ = ("fire_time", "sequence_id", "action", "args", "label", "cancelled")

    def __init__(self, fire_time: int, sequence_id: int, action: Callable, args: tuple,
                 label: str):
        self.fire_time = fire_time
        self.sequence_id = sequence_id
        self.action = action
        self.args = args
        self.label = label
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True

    def __lt__(self, other: "Event") -> bool:
        return (self.fire_time, self.sequence_id) < (other.fire_time, other.sequence_id)

    def __repr__(self) -> str:
        return f"Event(t={self.fire_time}, seq={self.sequence_id}, {self.label!r})"


class RandomStream:
    """Buffered uniform draws on top of a numpy ``Generator``."""

    __slots__ = ("gen", "_buf", "_i")
    _CHUNK = 512

    def __init__(self, gen: np.random.Generator):
        self.gen = gen
        self._buf = None
        self._i = self._CHUNK  # filled on first draw

    def random(self) -> float:
        i = self._i
        if i == self._CHUNK:
            self._buf = self.gen.random(self._CHUNK)
            i = 0
        self._i = i + 1
        return float(self._buf[i])

    def bit(self) -> int:
        return 1 if self.random() < 0.5 else 0

    def geometric(self, p: float) -> int:
        """Number of Bernoulli(p) trials up to and including the first success."""
        return int(self.gen.geometric(p))

    def choice(self, k: int) -> int:
        return min(int(self.random() * k), k - 1)


def make_stream(master_seed: int, name: str) -> RandomStream:
    """Independent stream for entity ``name`` derived from the master seed.

    The spawn key is a hash of the name, so adding entities never shifts
    the streams of existing ones.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(zlib.crc32(name.encode()),))
    return RandomStream(np.random.Generator(np.random.Philox(ss)))


class Timeline:
    """Virtual clock plus pending-event queue for one trajectory."""

    def __init__(self, rng_seed: int = 0, *, trace: bool = False):
        self.now = 0
        self.rng_seed = int(rng_seed)
        self.queue: list[tuple[int, int, Event]] = []
        self._seq = 0
        self._streams: dict[str, RandomStream] = {}
        self.trace: list[tuple[int, int, str]] | None = [] if trace else None
        self._stopped = False

    def schedule(self, delay: int, action: Callable, *args: Any, label: str = "") -> Event:
        return schedule(self, delay, action, *args, label=label)

    def schedule_at(self, time: int, action: Callable, *args: Any, label: str = "") -> Event:
        if time < self.now:
            raise SchedulingError(f"cannot schedule at {time} ps, now is {self.now} ps")
        ev = Event(int(time), self._seq, action, args, label or getattr(action, "__name__", "?"))
        self._seq += 1
        # plain tuples keep heap comparisons in C
        heapq.heappush(self.queue, (ev.fire_time, ev.sequence_id, ev))
        return ev

    def stream(self, name: str) -> RandomStream:
        st = self._streams.get(name)
        if st is None:
            st = make_stream(self.rng_seed, name)
            self._streams[name] = st
        return st

    def stop(self) -> None:
        self._stopped = True

    def run(self, until: int | None = None) -> int:
        return run_until_idle(self, until=until)


def schedule(timeline: Timeline, delay: int, action: Callable, *args: Any,
             label: str = "") -> Event:
    """Enqueue ``action(*args)`` at ``now + delay`` (picoseconds)."""
    if delay < 0:
        raise SchedulingError(f"negative delay {delay}")
    return timeline.schedule_at(timeline.now + int(delay), action, *args, label=label)


def run_until_idle(timeline: Timeline, until: int | None = None) -> int:
    """Process events in (time, sequence) order.

    Stops when the queue is empty, :meth:`Timeline.stop` is called, or the
    next event lies beyond ``until``. Returns the fire time of the last
    processed event (0 if none ran).
    """
    last = 0
    q = timeline.queue
    timeline._stopped = False
    while q and not timeline._stopped:
        if until is not None and q[0][0] > until:
            break
        ev = heapq.heappop(q)[2]
        if ev.cancelled:
            continue
        timeline.now = ev.fire_time
        last = ev.fire_time
        if timeline.trace is not None:
            timeline.trace.append((ev.fire_time, ev.sequence_id, ev.label))
        try:
            ev.action(*ev.args)
        except EventFailure:
            raise
        except Exception as exc:
            raise EventFailure(ev, exc) from exc
    return last
