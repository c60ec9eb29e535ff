"""Run artifacts and run comparison.

A run directory holds: config.json (the scenario as executed), summary.json,
metrics.csv / metrics.json (the per-window series), decisions.log, power.csv,
data_access.log when a data plane was active, events.trace when tracing, and
knowledge/ with the NDJSON record streams.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import ValidationError
from .monitoring import METRIC_COLUMNS


def _cell(value):
    return "" if value is None else value


def write_run_artifacts(result, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = result.scenario

    from .model import scenario_doc
    (out / "config.json").write_text(
        json.dumps(scenario_doc(scenario), indent=2) + "\n", encoding="utf-8")

    (out / "summary.json").write_text(
        json.dumps(result.summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    rows = {pid: [w.row() for w in result.monitor.report_series(
                pid, scenario.collection_duration_s)]
            for pid in result.platforms}

    with open(out / "metrics.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(METRIC_COLUMNS)
        for pid in result.platforms:
            for row in rows[pid]:
                writer.writerow([_cell(row[c]) for c in METRIC_COLUMNS])

    (out / "metrics.json").write_text(json.dumps({
        "interval_s": scenario.sampling_interval_s,
        "platforms": rows,
    }, indent=2) + "\n", encoding="utf-8")

    with open(out / "decisions.log", "w", encoding="utf-8") as f:
        for d in result.decisions:
            f.write(f"{d.t_ms}\t{d.request_id}\t{d.policy}\t"
                    f"{d.platform_id}\t{d.node_id}\t{d.rationale}\n")

    with open(out / "power.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["node_id", "t_ms", "power_w"])
        writer.writerows(result.power_rows)

    if result.data_events:
        with open(out / "data_access.log", "w", encoding="utf-8") as f:
            for t_ms, fn, oid, pid, kind, hit, latency_s in result.data_events:
                marker = "hit" if hit else "miss"
                f.write(f"{t_ms}\t{fn or '-'}\t{oid}\t{pid}\t{kind}\t{marker}\t"
                        f"{latency_s * 1000.0:.3f}\n")

    if result.trace is not None:
        with open(out / "events.trace", "w", encoding="utf-8") as f:
            for fire_ms, seq, kind in result.trace:
                f.write(f"{fire_ms}\t{seq}\t{kind}\n")

    return out


# ------------------------------------------------------------------ compare

def _load_run(run_dir: Path) -> tuple[dict, dict]:
    summary_path = run_dir / "summary.json"
    metrics_path = run_dir / "metrics.json"
    if not summary_path.exists():
        raise ValidationError(f"{run_dir} has no summary.json (not a run directory?)")
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    metrics = json.loads(metrics_path.read_text(encoding="utf-8")) if metrics_path.exists() else {}
    return summary, metrics


def compare_runs(run_dirs: list[str | Path], metric: str,
                 out_path: str | Path | None = None) -> dict:
    """Compare the same metric across run directories.

    energy_j compares run totals (summed over platforms) and reports the
    ratio of each run to the first. Windowed metrics produce an aligned
    per-window table; with exactly two runs a delta column is added."""
    if len(run_dirs) < 2:
        raise ValidationError("compare needs at least two run directories")
    runs = [(Path(d), *_load_run(Path(d))) for d in run_dirs]

    if metric == "energy_j":
        result = {"metric": metric, "runs": []}
        base = None
        for path, summary, _ in runs:
            total = 0.0
            measurable = False
            for pdata in summary.get("platforms", {}).values():
                if pdata.get("energy_j") is not None:
                    total += pdata["energy_j"]
                    measurable = True
            entry = {
                "run": path.name, "test_name": summary.get("test_name"),
                "energy_j": round(total, 3) if measurable else None,
            }
            if base is None:
                base = entry["energy_j"]
            elif entry["energy_j"] is not None and base:
                entry["ratio_to_first"] = round(entry["energy_j"] / base, 4)
            result["runs"].append(entry)
        if out_path is not None:
            Path(out_path).write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
        return result

    if metric not in METRIC_COLUMNS:
        names = ", ".join(("energy_j",) + METRIC_COLUMNS[3:])
        raise ValidationError(f"unknown metric {metric!r} (expected one of: {names})")

    intervals = {m.get("interval_s") for _, _, m in runs}
    if len(intervals) != 1:
        raise ValidationError(
            f"runs use different sampling intervals: {sorted(intervals)}")
    interval = intervals.pop()

    series = []
    for path, summary, metrics in runs:
        merged: dict[int, list] = {}
        for pid, rows in metrics.get("platforms", {}).items():
            for row in rows:
                merged.setdefault(row["window_index"], []).append(row[metric])
        collapsed = {}
        for idx, values in merged.items():
            present = [v for v in values if v is not None]
            collapsed[idx] = sum(present) if present else None
        series.append((path.name, collapsed))

    windows = sorted(set().union(*(s.keys() for _, s in series)))
    table = []
    for idx in windows:
        row = {"window_index": idx, "window_start_s": idx * interval}
        values = []
        for name, collapsed in series:
            value = collapsed.get(idx)
            row[name] = value
            values.append(value)
        if len(series) == 2 and values[0] is not None and values[1] is not None:
            row["delta"] = values[1] - values[0]
        table.append(row)

    result = {"metric": metric, "interval_s": interval,
              "runs": [name for name, _ in series], "windows": table}
    if out_path is not None:
        columns = ["window_index", "window_start_s"] + [name for name, _ in series]
        if len(series) == 2:
            columns.append("delta")
        with open(out_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(columns)
            for row in table:
                writer.writerow([_cell(row.get(c)) for c in columns])
    return result
