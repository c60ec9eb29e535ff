"""End-to-end command line behavior (in-process via main)."""

import json

import pytest

from fdnsim.cli import main

NODE = {"node_id": "n0", "cores": 4, "memory_mib": 4096,
        "power_idle_w": 20.0, "power_busy_w": 45.0}

CATALOG = {
    "platforms": [
        {"platform_id": "p1", "kind": "cloud", "nodes": [NODE], "benchmark_rps": 100},
        {"platform_id": "p2", "kind": "cloud", "nodes": [NODE], "benchmark_rps": 50},
    ],
    "functions": [
        {"name": "fn", "runtime": "python",
         "base_service_s": {"p1": 0.5, "p2": 0.5},
         "cpu_bound_fraction": 1.0, "replica_memory_mib": 256},
    ],
}

SCENARIO = {
    "test_name": "mini",
    "functions": ["fn"],
    "target_platforms": ["p1"],
    "policy": "ranked-best",
    "test_settings": {"vus": 2, "duration": "5s"},
    "collection_duration": "10s",
    "sampling_interval": "5s",
    "seed": 1,
}


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "catalog.json").write_text(json.dumps(CATALOG))
    (tmp_path / "scenario.json").write_text(json.dumps(SCENARIO))
    return tmp_path


def run_args(workdir, out="out", extra=()):
    return ["run", "--scenario", str(workdir / "scenario.json"),
            "--catalog", str(workdir / "catalog.json"),
            "--out", str(workdir / out), *extra]


def test_run_writes_artifacts(workdir, capsys):
    assert main(run_args(workdir)) == 0
    out = capsys.readouterr().out
    assert "mini: policy=ranked-best" in out
    outdir = workdir / "out"
    for name in ("config.json", "summary.json", "metrics.csv", "metrics.json",
                 "decisions.log", "power.csv"):
        assert (outdir / name).exists(), name
    for name in ("decisions.ndjson", "models.ndjson", "metrics.ndjson",
                 "benchmarks.ndjson"):
        assert (outdir / "knowledge" / name).exists(), name
    summary = json.loads((outdir / "summary.json").read_text())
    assert summary["conservation_ok"] is True
    assert summary["issued"] == summary["completed"] + summary["rejected"] + summary["failed"]
    assert not (outdir / "events.trace").exists()


def test_run_trace_flag_adds_event_log(workdir):
    assert main(run_args(workdir, extra=["--trace"])) == 0
    trace = (workdir / "out" / "events.trace").read_text()
    assert "vu-issue" in trace


def test_run_default_out_dir(workdir, monkeypatch, capsys):
    monkeypatch.chdir(workdir)
    assert main(["run", "--scenario", "scenario.json",
                 "--catalog", "catalog.json"]) == 0
    assert (workdir / "runs" / "mini" / "summary.json").exists()


def test_invalid_scenario_exits_2(workdir, capsys):
    bad = dict(SCENARIO, test_settings={"vus": 0, "duration": "5s"})
    (workdir / "scenario.json").write_text(json.dumps(bad))
    assert main(run_args(workdir)) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_function_against_bundled_catalog_exits_2(workdir):
    # no --catalog and no env: the bundled catalog knows no function "fn"
    assert main(["run", "--scenario", str(workdir / "scenario.json"),
                 "--out", str(workdir / "out")]) == 2


def test_env_catalog_is_used(workdir, monkeypatch):
    monkeypatch.setenv("FDNSIM_CATALOG", str(workdir / "catalog.json"))
    assert main(["run", "--scenario", str(workdir / "scenario.json"),
                 "--out", str(workdir / "out")]) == 0


def test_scenario_catalog_field_resolves_relative_to_scenario(workdir, monkeypatch, tmp_path_factory):
    scenario = dict(SCENARIO, catalog="catalog.json")
    (workdir / "scenario.json").write_text(json.dumps(scenario))
    elsewhere = tmp_path_factory.mktemp("elsewhere")
    monkeypatch.chdir(elsewhere)
    # a poisoned env var proves the scenario's own catalog wins
    monkeypatch.setenv("FDNSIM_CATALOG", str(workdir / "missing.json"))
    assert main(["run", "--scenario", str(workdir / "scenario.json"),
                 "--out", str(workdir / "out")]) == 0


def test_compare_energy_mode(workdir, capsys):
    assert main(run_args(workdir, out="a")) == 0
    assert main(run_args(workdir, out="b")) == 0
    capsys.readouterr()
    assert main(["compare", str(workdir / "a"), str(workdir / "b"),
                 "--metric", "energy_j"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["metric"] == "energy_j"
    assert "ratio_to_first" not in doc["runs"][0]  # the baseline run
    assert doc["runs"][1]["ratio_to_first"] == 1.0  # identical runs


def test_compare_windowed_metric_to_csv(workdir, capsys):
    assert main(run_args(workdir, out="a")) == 0
    assert main(run_args(workdir, out="b")) == 0
    out_csv = workdir / "cmp.csv"
    assert main(["compare", str(workdir / "a"), str(workdir / "b"),
                 "--metric", "requests_served", "--out", str(out_csv)]) == 0
    header = out_csv.read_text().splitlines()[0]
    assert header.startswith("window_index,window_start_s")
    assert header.endswith("delta")


def test_compare_single_run_exits_2(workdir, capsys):
    assert main(run_args(workdir, out="a")) == 0
    assert main(["compare", str(workdir / "a"), "--metric", "energy_j"]) == 2


def test_compare_unknown_metric_exits_2(workdir):
    assert main(run_args(workdir, out="a")) == 0
    assert main(run_args(workdir, out="b")) == 0
    assert main(["compare", str(workdir / "a"), str(workdir / "b"),
                 "--metric", "vibes"]) == 2


def test_list_policies_names_every_policy(capsys):
    assert main(["list-policies"]) == 0
    out = capsys.readouterr().out
    for name in ("ranked-best", "utilization-aware", "round-robin-collab",
                 "weighted-collab", "data-locality", "energy-aware"):
        assert name in out


def test_suite_only_filter_runs_one_scenario(workdir, capsys):
    out_root = workdir / "suite-out"
    assert main(["suite", "--only", "capability-edge-cluster-vus10",
                 "--out", str(out_root)]) == 0
    rows = json.loads((out_root / "suite.json").read_text())
    assert [r["test_name"] for r in rows] == ["capability-edge-cluster-vus10"]
    assert rows[0]["completed"] > 0
    assert (out_root / "capability-edge-cluster-vus10" / "summary.json").exists()


def test_suite_only_without_match_exits_2(workdir):
    assert main(["suite", "--only", "no-such-test",
                 "--out", str(workdir / "suite-out")]) == 2
