"""Closed-loop load generation: a fixed pool of virtual users, each issuing
one request at a time and sleeping between completions. VU start times are
staggered by 1 ms so the opening burst is ordered and reproducible."""

from __future__ import annotations

from typing import Callable

from .kernel import SimKernel


class ClosedLoopLoadGen:
    def __init__(self, kernel: SimKernel, function: str, vus: int,
                 duration_s: float, sleep_s: float,
                 issue: Callable[[str, int], None]):
        self.kernel = kernel
        self.function = function
        self.vus = vus
        self.duration_s = duration_s
        self.sleep_s = sleep_s
        self.issue = issue
        self.issued = 0

    def start(self) -> None:
        for vu in range(self.vus):
            self.kernel.schedule(vu * 0.001, "vu-issue",
                                 lambda vu=vu: self._issue(vu))

    def _issue(self, vu: int) -> None:
        self.issued += 1
        self.issue(self.function, vu)

    def on_done(self, vu: int) -> None:
        """Called when this VU's in-flight request finished (any outcome)."""
        next_at = self.kernel.now_s + self.sleep_s
        if next_at < self.duration_s:
            self.kernel.schedule(next_at, "vu-issue", lambda: self._issue(vu))
