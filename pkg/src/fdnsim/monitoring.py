"""Metrics collection over fixed sampling windows.

Completed invocations are attributed to the window containing their completion
time; infrastructure gauges are sampled once per window boundary and describe
the window that just closed. Percentiles use the nearest-rank method: the
element at 1-based index ceil(q * n) of the ascending sort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvariantError
from .model import InvocationRecord

METRIC_COLUMNS = (
    "platform", "window_index", "window_start_s",
    "requests_served", "p90_response_s",
    "invocations", "replicas", "cold_starts", "exec_time_p90_s", "memory_allocated_mib",
    "cpu_util_frac", "mem_util_frac", "disk_io_bytes",
)


def nearest_rank(samples, q: float) -> float | None:
    if not 0 < q <= 1:
        raise ValueError(f"q must be in (0, 1], got {q}")
    if not samples:
        return None
    ordered = sorted(samples)
    rank = math.ceil(q * len(ordered))  # 1-based
    return ordered[rank - 1]


def p90(samples) -> float | None:
    return nearest_rank(samples, 0.9)


@dataclass
class MetricWindow:
    platform: str
    window_index: int
    window_start_s: float
    requests_served: int = 0
    p90_response_s: float | None = None
    invocations: int = 0
    replicas: int = 0
    cold_starts: int = 0
    exec_time_p90_s: float | None = None
    memory_allocated_mib: int = 0
    cpu_util_frac: float = 0.0
    mem_util_frac: float = 0.0
    disk_io_bytes: int = 0
    responses: list[float] = field(default_factory=list, repr=False)
    exec_times: list[float] = field(default_factory=list, repr=False)

    def finalize(self) -> "MetricWindow":
        self.p90_response_s = p90(self.responses)
        self.exec_time_p90_s = p90(self.exec_times)
        return self

    def row(self) -> dict:
        self.finalize()
        return {c: getattr(self, c) for c in METRIC_COLUMNS}


class Monitor:
    def __init__(self, platform_ids, interval_s: float = 10.0):
        if interval_s <= 0:
            raise InvariantError("sampling interval must be > 0")
        self.interval_s = interval_s
        self.platform_ids = list(platform_ids)
        self._windows: dict[tuple[str, int], MetricWindow] = {}
        self._sampled: set[tuple[str, int]] = set()
        self._all_responses: dict[str, list[float]] = {p: [] for p in self.platform_ids}
        self.rejections: dict[str, int] = {p: 0 for p in self.platform_ids}

    def window_index(self, t_s: float) -> int:
        return int(t_s // self.interval_s)

    def _window(self, platform: str, idx: int) -> MetricWindow:
        key = (platform, idx)
        w = self._windows.get(key)
        if w is None:
            w = MetricWindow(platform, idx, idx * self.interval_s)
            self._windows[key] = w
        return w

    def record(self, rec: InvocationRecord) -> None:
        w = self._window(rec.platform_id, self.window_index(rec.completed_at_s))
        w.invocations += 1
        if rec.outcome == "ok":
            w.requests_served += 1
            w.responses.append(rec.response_time_s)
            w.exec_times.append(rec.completed_at_s - rec.started_at_s)
            if rec.cold_start:
                w.cold_starts += 1
            self._all_responses[rec.platform_id].append(rec.response_time_s)
        elif rec.outcome == "rejected":
            self.rejections[rec.platform_id] = self.rejections.get(rec.platform_id, 0) + 1

    def add_disk_io(self, platform: str, t_s: float, nbytes: int) -> None:
        self._window(platform, self.window_index(t_s)).disk_io_bytes += nbytes

    def sample_infra(self, platform: str, boundary_s: float, *, cpu_util_frac: float,
                     mem_util_frac: float, replicas: int, memory_allocated_mib: int) -> None:
        """Gauge sample taken at a window's end boundary, attributed to that window."""
        idx = self.window_index(boundary_s) - 1
        if idx < 0:
            return
        key = (platform, idx)
        if key in self._sampled:
            raise InvariantError(f"window {idx} of {platform} sampled twice")
        self._sampled.add(key)
        w = self._window(platform, idx)
        w.cpu_util_frac = cpu_util_frac
        w.mem_util_frac = mem_util_frac
        w.replicas = replicas
        w.memory_allocated_mib = memory_allocated_mib

    def report_series(self, platform: str, through_s: float) -> list[MetricWindow]:
        """Dense window series from 0 up to (excluding) the window containing through_s."""
        count = int(math.ceil(through_s / self.interval_s))
        return [self._window(platform, i).finalize() for i in range(count)]

    def overall_p90(self, platform: str) -> float | None:
        return p90(self._all_responses.get(platform, []))

    def responses_between(self, platform: str, t0_s: float, t1_s: float) -> list[float]:
        out: list[float] = []
        for (pid, idx), w in self._windows.items():
            if pid == platform and t0_s <= w.window_start_s < t1_s:
                out.extend(w.responses)
        return out
