"""Persistent run knowledge: append-only NDJSON records per run, plus
deployment annotation that turns past benchmark results into placement
recommendations (preferred platform, prewarm count, data home)."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Callable, Iterator

from .errors import ValidationError

KINDS = {
    "decision": "decisions.ndjson",
    "model_snapshot": "models.ndjson",
    "metric_series": "metrics.ndjson",
    "benchmark_result": "benchmarks.ndjson",
}


class KnowledgeRun:
    def __init__(self, root: Path, run_id: str):
        self.root = Path(root)
        self.run_id = run_id
        self.root.mkdir(parents=True, exist_ok=True)
        self._files = {}
        for kind, name in KINDS.items():
            self._files[kind] = open(self.root / name, "w", encoding="utf-8")
        self._seq = 0
        self._closed = False

    def append(self, kind: str, payload: dict, window_index: int | None = None) -> None:
        if self._closed:
            raise ValidationError("knowledge run is closed")
        if kind not in KINDS:
            raise ValidationError(f"unknown knowledge kind {kind!r}")
        record = dict(payload)
        record["run_id"] = self.run_id
        record["seq"] = self._seq
        if window_index is not None:
            record["window_index"] = window_index
        self._seq += 1
        self._files[kind].write(json.dumps(record, sort_keys=True) + "\n")

    def close(self) -> None:
        self._closed = True
        for f in self._files.values():
            f.close()


class KnowledgeBase:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    def open_run(self, run_id: str) -> KnowledgeRun:
        return KnowledgeRun(self.root, run_id)

    def query(self, kind: str, predicate: Callable[[dict], bool] | None = None) -> Iterator[dict]:
        if kind not in KINDS:
            raise ValidationError(f"unknown knowledge kind {kind!r}")
        path = self.root / KINDS[kind]
        if not path.exists():
            return
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if predicate is None or predicate(record):
                    yield record


def _pick_platform(rows: list[dict], slo_p90_s: float | None) -> dict:
    """Cheapest energy among SLO-meeting platforms; plain latency otherwise."""
    def p90(r):
        v = r.get("p90_s")
        return v if v is not None else math.inf

    def energy(r):
        v = r.get("energy_per_invocation_j")
        return v if v is not None else math.inf

    if slo_p90_s is not None:
        meeting = [r for r in rows if p90(r) <= slo_p90_s]
        if meeting:
            return min(meeting, key=lambda r: (energy(r), p90(r), r["platform"]))
    return min(rows, key=lambda r: (p90(r), r["platform"]))


def annotate_deployment(kb: KnowledgeBase, functions: list[str],
                        slo: dict[str, float] | None = None) -> dict[str, Any]:
    """Build per-function placement recommendations from recorded history."""
    slo = slo or {}
    out: dict[str, Any] = {"functions": {}, "warnings": []}
    bench = list(kb.query("benchmark_result"))
    snapshots = list(kb.query("model_snapshot"))
    for fn in functions:
        rows = [r for r in bench if r.get("function") == fn]
        if not rows:
            out["warnings"].append(f"no recorded history for function {fn!r}")
            continue
        chosen = _pick_platform(rows, slo.get(fn))
        pid = chosen["platform"]
        prewarm = 0
        for snap in snapshots:  # last snapshot wins
            value = (snap.get("hints") or {}).get(f"{fn}|{pid}")
            if value is not None:
                prewarm = value
        annotation = {
            "platform": pid,
            "expected_p90_s": chosen.get("p90_s"),
            "energy_per_invocation_j": chosen.get("energy_per_invocation_j"),
            "prewarm_count": prewarm,
        }
        objects = chosen.get("data_objects") or []
        if objects:
            homes = {}
            for snap in snapshots:
                for obj, owner in (snap.get("data_owner") or {}).items():
                    homes[obj] = owner
            annotation["data_home"] = {o: homes.get(o, pid) for o in objects}
        out["functions"][fn] = annotation
    return out
