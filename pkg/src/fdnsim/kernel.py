"""Deterministic discrete-event kernel.

Virtual time is real-valued seconds, quantized to whole milliseconds when an
event is inserted (round half up). Events fire in (time_ms, insertion sequence)
order, so a run is a pure function of its inputs: same seed and same call
sequence give byte-identical traces on any platform.

Random streams: ``rng_stream(label)`` returns a Mersenne Twister seeded with
the first 8 bytes (big-endian) of SHA-256("<seed>/<label>"). Distinct labels
yield independent streams; the same (seed, label) pair yields the same stream
on every platform and Python version (the core generator of random.Random is
guaranteed stable).
"""

from __future__ import annotations

import hashlib
import heapq
import math
import random
from typing import Callable

from .errors import SchedulingError


def quantize_ms(t_s: float) -> int:
    """Seconds to whole milliseconds, round half up."""
    if t_s < 0:
        raise SchedulingError(f"negative time {t_s!r}")
    return int(math.floor(t_s * 1000.0 + 0.5))


def derive_rng(seed: int, label: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}/{label}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class Event:
    __slots__ = ("fire_ms", "seq", "kind", "action", "cancelled")

    def __init__(self, fire_ms: int, seq: int, kind: str, action: Callable[[], None]):
        self.fire_ms = fire_ms
        self.seq = seq
        self.kind = kind
        self.action = action
        self.cancelled = False

    @property
    def fire_at_s(self) -> float:
        return self.fire_ms / 1000.0


class SimKernel:
    def __init__(self, seed: int = 0, trace: bool = False):
        self.seed = seed
        self.now_ms = 0
        self._heap: list[tuple[int, int, Event]] = []
        self._seq = 0
        self.dispatched = 0
        self.trace: list[tuple[int, int, str]] | None = [] if trace else None

    @property
    def now_s(self) -> float:
        return self.now_ms / 1000.0

    def schedule(self, at_s: float, kind: str, action: Callable[[], None]) -> Event:
        fire_ms = quantize_ms(at_s)
        if fire_ms < self.now_ms:
            raise SchedulingError(
                f"cannot schedule {kind!r} at {fire_ms} ms; clock is at {self.now_ms} ms"
            )
        ev = Event(fire_ms, self._seq, kind, action)
        self._seq += 1
        heapq.heappush(self._heap, (fire_ms, ev.seq, ev))
        return ev

    def after(self, delay_s: float, kind: str, action: Callable[[], None]) -> Event:
        return self.schedule(self.now_s + delay_s, kind, action)

    def cancel(self, ev: Event) -> None:
        ev.cancelled = True

    def rng_stream(self, label: str) -> random.Random:
        return derive_rng(self.seed, label)

    def run_until(self, t_end_s: float) -> int:
        """Dispatch every event with fire time <= t_end_s; returns the count."""
        end_ms = quantize_ms(t_end_s)
        n = 0
        while self._heap and self._heap[0][0] <= end_ms:
            _, _, ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            self.now_ms = ev.fire_ms
            if self.trace is not None:
                self.trace.append((ev.fire_ms, ev.seq, ev.kind))
            ev.action()
            n += 1
        self.now_ms = max(self.now_ms, end_ms)
        self.dispatched += n
        return n
