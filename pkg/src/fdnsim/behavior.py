"""Learned behavior of functions on platforms.

Performance model: exponentially weighted moving averages (alpha 0.2) of
execution time and of energy per invocation, per (function, platform). The
first sample initializes the average; a configured prior stands in before
any sample arrives.

P90 prediction: ewma_exec * max(1, offered_rate * ewma_exec / capacity), plus
the platform's cold-start latency when the function currently has no live
replica there. Capacity counts live replicas plus the replicas that would
still fit in free memory.

Event model: invocation counts per sampling window; the rate forecast is the
mean of the last three closed windows. Prewarm hints are the gap between
ceil(forecast_rate * ewma_exec) and the current warm replica count.

Interaction model: a weighted digraph of producer -> consumer calls; crossing
the co-location threshold (default 100) emits a one-time recommendation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

EWMA_ALPHA = 0.2
FORECAST_WINDOWS = 3
COLOCATION_THRESHOLD = 100


@dataclass
class PerfEntry:
    ewma_exec_s: float | None = None
    ewma_energy_j: float | None = None
    prior_exec_s: float | None = None
    prior_energy_j: float | None = None
    samples: int = 0


class BehaviorModels:
    def __init__(self, interval_s: float = 10.0, alpha: float = EWMA_ALPHA,
                 colocation_threshold: int = COLOCATION_THRESHOLD):
        self.interval_s = interval_s
        self.alpha = alpha
        self.perf: dict[tuple[str, str], PerfEntry] = {}
        self._counts: dict[tuple[str, str], dict[int, int]] = {}
        self._access: dict[tuple[str, str, str], dict[int, dict[str, int]]] = {}
        self._remote: dict[tuple[str, str], dict[int, int]] = {}
        self.interactions: dict[tuple[str, str], int] = {}
        self.colocation_threshold = colocation_threshold
        self.recommendations: list[dict] = []

    # --------------------------------------------------------- perf model

    def _entry(self, fn: str, pid: str) -> PerfEntry:
        e = self.perf.get((fn, pid))
        if e is None:
            e = PerfEntry()
            self.perf[(fn, pid)] = e
        return e

    def seed_prior(self, fn: str, pid: str, exec_s: float, energy_j: float | None) -> None:
        e = self._entry(fn, pid)
        e.prior_exec_s = exec_s
        e.prior_energy_j = energy_j

    def update_perf(self, fn: str, pid: str, exec_s: float, energy_j: float | None) -> None:
        if exec_s <= 0:
            raise ValidationError(f"exec_s must be > 0, got {exec_s}")
        e = self._entry(fn, pid)
        if e.ewma_exec_s is None:
            e.ewma_exec_s = exec_s
        else:
            e.ewma_exec_s = self.alpha * exec_s + (1 - self.alpha) * e.ewma_exec_s
        if energy_j is not None:
            if e.ewma_energy_j is None:
                e.ewma_energy_j = energy_j
            else:
                e.ewma_energy_j = self.alpha * energy_j + (1 - self.alpha) * e.ewma_energy_j
        e.samples += 1

    def exec_estimate(self, fn: str, pid: str) -> float | None:
        e = self.perf.get((fn, pid))
        if e is None:
            return None
        return e.ewma_exec_s if e.ewma_exec_s is not None else e.prior_exec_s

    def energy_estimate(self, fn: str, pid: str) -> float | None:
        e = self.perf.get((fn, pid))
        if e is None:
            return None
        return e.ewma_energy_j if e.ewma_energy_j is not None else e.prior_energy_j

    def predict_p90(self, fn: str, platform, offered_rate_per_s: float) -> float:
        """platform: a PlatformSim (or anything with serving_capacity,
        live_replicas and spec.cold_start_s)."""
        est = self.exec_estimate(fn, platform.spec.platform_id)
        if est is None:
            return math.inf
        capacity = platform.serving_capacity(fn)
        if capacity <= 0:
            return math.inf
        saturation = max(1.0, offered_rate_per_s * est / capacity)
        predicted = est * saturation
        if platform.live_replicas(fn) == 0:
            predicted += platform.spec.cold_start_s
        return predicted

    # --------------------------------------------------------- event model

    def window_index(self, t_s: float) -> int:
        return int(t_s // self.interval_s)

    def note_invocation(self, fn: str, pid: str, t_s: float) -> None:
        by_window = self._counts.setdefault((fn, pid), {})
        w = self.window_index(t_s)
        by_window[w] = by_window.get(w, 0) + 1

    def window_rate(self, fn: str, pid: str, window_index: int) -> float:
        count = self._counts.get((fn, pid), {}).get(window_index, 0)
        return count / self.interval_s

    def forecast_rate(self, fn: str, pid: str, now_s: float) -> float | None:
        """Mean rate over the last three closed windows; None with less history."""
        current = self.window_index(now_s)
        if current < FORECAST_WINDOWS:
            return None
        windows = range(current - FORECAST_WINDOWS, current)
        rates = [self.window_rate(fn, pid, w) for w in windows]
        return sum(rates) / FORECAST_WINDOWS

    def prewarm_hints(self, now_s: float, warm_count) -> dict[tuple[str, str], int]:
        """warm_count: callable (fn, pid) -> current warm replicas."""
        hints: dict[tuple[str, str], int] = {}
        for (fn, pid) in self._counts:
            forecast = self.forecast_rate(fn, pid, now_s)
            if forecast is None:
                continue
            est = self.exec_estimate(fn, pid)
            if est is None:
                continue
            want = math.ceil(forecast * est)
            gap = want - warm_count(fn, pid)
            if gap > 0:
                hints[(fn, pid)] = gap
        return hints

    # -------------------------------------------------------- access model

    def note_access(self, fn: str, object_id: str, platform: str, kind: str,
                    remote: bool, t_s: float) -> None:
        w = self.window_index(t_s)
        per_window = self._access.setdefault((fn, object_id, platform), {})
        counts = per_window.setdefault(w, {"read": 0, "write": 0})
        counts[kind] += 1
        if remote:
            by_window = self._remote.setdefault((object_id, platform), {})
            by_window[w] = by_window.get(w, 0) + 1

    def access_counts(self, fn: str, object_id: str, platform: str, window_index: int) -> dict:
        return dict(self._access.get((fn, object_id, platform), {}).get(
            window_index, {"read": 0, "write": 0}))

    def remote_accesses(self, object_id: str, platform: str, window_index: int) -> int:
        return self._remote.get((object_id, platform), {}).get(window_index, 0)

    # --------------------------------------------------- interaction model

    def record_interaction(self, producer: str, consumer: str) -> bool:
        """Returns True exactly when the edge crosses the co-location threshold."""
        key = (producer, consumer)
        weight = self.interactions.get(key, 0) + 1
        self.interactions[key] = weight
        if weight == self.colocation_threshold + 1:
            self.recommendations.append(
                {"producer": producer, "consumer": consumer, "weight": weight,
                 "action": "co-locate"})
            return True
        return False

    # ------------------------------------------------------------ snapshot

    def snapshot(self, window_index: int, hints: dict | None = None,
                 owner: dict | None = None) -> dict:
        perf = {
            f"{fn}|{pid}": {
                "ewma_exec_s": e.ewma_exec_s, "ewma_energy_j": e.ewma_energy_j,
                "samples": e.samples,
            }
            for (fn, pid), e in sorted(self.perf.items())
        }
        rates = {
            f"{fn}|{pid}": self.window_rate(fn, pid, window_index)
            for (fn, pid) in sorted(self._counts)
        }
        return {
            "window_index": window_index,
            "perf": perf,
            "rates": rates,
            "hints": {f"{fn}|{pid}": n for (fn, pid), n in sorted((hints or {}).items())},
            "data_owner": dict(sorted((owner or {}).items())),
            "interactions": {f"{a}|{b}": w for (a, b), w in sorted(self.interactions.items())},
        }
