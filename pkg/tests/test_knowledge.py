"""Knowledge store files and deployment annotation."""

import json

import pytest

from fdnsim.errors import ValidationError
from fdnsim.knowledge import KINDS, KnowledgeBase, annotate_deployment


def test_run_writes_four_files_with_seq_and_run_id(tmp_path):
    kb = KnowledgeBase(tmp_path)
    run = kb.open_run("run-1")
    run.append("decision", {"policy": "rank"})
    run.append("metric_series", {"p90_s": 1.0}, window_index=3)
    run.close()
    for name in KINDS.values():
        assert (tmp_path / name).exists()
    rows = [json.loads(line) for line in
            (tmp_path / "decisions.ndjson").read_text().splitlines()]
    assert rows == [{"policy": "rank", "run_id": "run-1", "seq": 0}]
    metric = json.loads((tmp_path / "metrics.ndjson").read_text())
    assert metric["seq"] == 1 and metric["window_index"] == 3


def test_open_run_truncates_previous_content(tmp_path):
    kb = KnowledgeBase(tmp_path)
    run = kb.open_run("a")
    run.append("decision", {"n": 1})
    run.close()
    kb.open_run("b").close()
    assert (tmp_path / "decisions.ndjson").read_text() == ""


def test_append_after_close_and_unknown_kind_rejected(tmp_path):
    run = KnowledgeBase(tmp_path).open_run("a")
    with pytest.raises(ValidationError):
        run.append("gossip", {})
    run.close()
    with pytest.raises(ValidationError):
        run.append("decision", {})


def test_query_filters_with_predicate(tmp_path):
    kb = KnowledgeBase(tmp_path)
    run = kb.open_run("a")
    for fn in ("f1", "f2", "f1"):
        run.append("benchmark_result", {"function": fn})
    run.close()
    assert len(list(kb.query("benchmark_result"))) == 3
    assert len(list(kb.query("benchmark_result",
                             lambda r: r["function"] == "f1"))) == 2
    with pytest.raises(ValidationError):
        list(kb.query("rumors"))


def test_query_missing_file_yields_nothing(tmp_path):
    assert list(KnowledgeBase(tmp_path / "nowhere").query("decision")) == []


def seed_history(tmp_path, hints=None, owner=None):
    kb = KnowledgeBase(tmp_path)
    run = kb.open_run("history")
    run.append("benchmark_result", {
        "function": "f", "platform": "hpc", "p90_s": 2.0,
        "energy_per_invocation_j": 9.0, "data_objects": ["obj"]})
    run.append("benchmark_result", {
        "function": "f", "platform": "edge", "p90_s": 6.0,
        "energy_per_invocation_j": 1.0, "data_objects": ["obj"]})
    run.append("model_snapshot", {"hints": {}, "data_owner": {}}, window_index=0)
    run.append("model_snapshot",
               {"hints": hints or {}, "data_owner": owner or {}},
               window_index=1)
    run.close()
    return kb


def test_annotation_prefers_energy_among_slo_meeting(tmp_path):
    kb = seed_history(tmp_path)
    out = annotate_deployment(kb, ["f"], slo={"f": 7.0})
    assert out["functions"]["f"]["platform"] == "edge"  # both meet, edge is cheaper
    out = annotate_deployment(kb, ["f"], slo={"f": 3.0})
    assert out["functions"]["f"]["platform"] == "hpc"  # only hpc meets 3s


def test_annotation_without_slo_falls_back_to_latency(tmp_path):
    kb = seed_history(tmp_path)
    out = annotate_deployment(kb, ["f"])
    assert out["functions"]["f"]["platform"] == "hpc"
    assert out["functions"]["f"]["expected_p90_s"] == 2.0


def test_annotation_reads_last_snapshot_hints_and_owner(tmp_path):
    kb = seed_history(tmp_path, hints={"f|edge": 4}, owner={"obj": "edge-store"})
    out = annotate_deployment(kb, ["f"], slo={"f": 7.0})
    ann = out["functions"]["f"]
    assert ann["prewarm_count"] == 4
    assert ann["data_home"] == {"obj": "edge-store"}


def test_annotation_warns_on_unknown_function(tmp_path):
    kb = seed_history(tmp_path)
    out = annotate_deployment(kb, ["ghost"])
    assert "ghost" not in out["functions"]
    assert any("ghost" in w for w in out["warnings"])
