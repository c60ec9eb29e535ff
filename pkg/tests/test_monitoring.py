"""Windowed metrics: percentiles, attribution, infra gauge sampling."""

import math
import random

import pytest

from fdnsim.errors import InvariantError
from fdnsim.model import InvocationRecord
from fdnsim.monitoring import METRIC_COLUMNS, Monitor, nearest_rank, p90


def rec(rid, completed, response, outcome="ok", platform="p1", cold=False):
    return InvocationRecord(
        request_id=rid, function="fn", issued_at_s=completed - response,
        started_at_s=completed - response, completed_at_s=completed,
        platform_id=platform, node_id="n0", cold_start=cold,
        outcome=outcome, response_time_s=response,
    )


def test_nearest_rank_small_cases():
    assert nearest_rank([5.0], 0.9) == 5.0
    assert nearest_rank([1.0, 2.0], 0.5) == 1.0
    assert nearest_rank([1, 2, 3, 4, 5, 6, 7, 8, 9, 10], 0.9) == 9
    assert nearest_rank([], 0.9) is None
    with pytest.raises(ValueError):
        nearest_rank([1.0], 1.5)


def test_p90_equals_full_sort_oracle():
    rng = random.Random(0)
    for trial in range(50):
        samples = [rng.uniform(0, 100) for _ in range(rng.randint(1, 500))]
        expected = sorted(samples)[math.ceil(0.9 * len(samples)) - 1]
        assert p90(samples) == expected


def test_completion_window_attribution():
    m = Monitor(["p1"], interval_s=10.0)
    m.record(rec("a", completed=9.9, response=1.0))
    m.record(rec("b", completed=10.0, response=2.0))  # next window
    rows = [w.row() for w in m.report_series("p1", 20.0)]
    assert rows[0]["requests_served"] == 1 and rows[0]["p90_response_s"] == 1.0
    assert rows[1]["requests_served"] == 1 and rows[1]["p90_response_s"] == 2.0


def test_rejections_counted_but_not_served():
    m = Monitor(["p1"], interval_s=10.0)
    m.record(rec("a", 1.0, 1.0))
    m.record(rec("b", 2.0, 0.0, outcome="rejected"))
    row = m.report_series("p1", 10.0)[0].row()
    assert row["invocations"] == 2
    assert row["requests_served"] == 1
    assert m.rejections["p1"] == 1


def test_cold_start_counter():
    m = Monitor(["p1"], interval_s=10.0)
    m.record(rec("a", 1.0, 1.0, cold=True))
    m.record(rec("b", 2.0, 1.0))
    assert m.report_series("p1", 10.0)[0].row()["cold_starts"] == 1


def test_infra_sample_attributed_to_closing_window():
    m = Monitor(["p1"], interval_s=10.0)
    m.sample_infra("p1", 10.0, cpu_util_frac=0.5, mem_util_frac=0.25,
                   replicas=3, memory_allocated_mib=768)
    row = m.report_series("p1", 10.0)[0].row()
    assert row["cpu_util_frac"] == 0.5
    assert row["replicas"] == 3
    assert row["window_index"] == 0


def test_double_infra_sample_rejected():
    m = Monitor(["p1"], interval_s=10.0)
    m.sample_infra("p1", 10.0, cpu_util_frac=0.1, mem_util_frac=0.1,
                   replicas=1, memory_allocated_mib=256)
    with pytest.raises(InvariantError):
        m.sample_infra("p1", 10.0, cpu_util_frac=0.2, mem_util_frac=0.2,
                       replicas=2, memory_allocated_mib=512)


def test_series_is_dense_even_with_gaps():
    m = Monitor(["p1"], interval_s=10.0)
    m.record(rec("a", 35.0, 1.5))
    rows = [w.row() for w in m.report_series("p1", 40.0)]
    assert [r["window_index"] for r in rows] == [0, 1, 2, 3]
    assert rows[0]["requests_served"] == 0
    assert rows[0]["p90_response_s"] is None
    assert rows[3]["requests_served"] == 1


def test_row_column_order_is_stable():
    m = Monitor(["p1"], interval_s=10.0)
    m.record(rec("a", 1.0, 1.0))
    row = m.report_series("p1", 10.0)[0].row()
    assert tuple(row) == METRIC_COLUMNS


def test_overall_p90_and_window_slicing():
    m = Monitor(["p1"], interval_s=10.0)
    for i in range(10):
        m.record(rec(f"r{i}", completed=i * 10.0 + 5.0, response=float(i + 1)))
    assert m.overall_p90("p1") == 9.0
    late = m.responses_between("p1", 50.0, 100.0)
    assert late == [6.0, 7.0, 8.0, 9.0, 10.0]
