"""Performance, event, access and interaction models."""

import math

import pytest

from fdnsim.behavior import BehaviorModels
from fdnsim.errors import ValidationError
from fdnsim.kernel import SimKernel
from fdnsim.platforms import PlatformSim
from conftest import make_function, make_platform


def test_first_sample_initializes_then_ewma_applies():
    m = BehaviorModels()
    m.update_perf("f", "p", 10.0, 5.0)
    assert m.exec_estimate("f", "p") == 10.0
    assert m.energy_estimate("f", "p") == 5.0
    m.update_perf("f", "p", 20.0, 15.0)
    assert m.exec_estimate("f", "p") == pytest.approx(0.2 * 20.0 + 0.8 * 10.0)
    assert m.energy_estimate("f", "p") == pytest.approx(0.2 * 15.0 + 0.8 * 5.0)
    assert m.perf[("f", "p")].samples == 2


def test_prior_stands_in_until_first_sample():
    m = BehaviorModels()
    m.seed_prior("f", "p", 3.0, 1.5)
    assert m.exec_estimate("f", "p") == 3.0
    assert m.energy_estimate("f", "p") == 1.5
    m.update_perf("f", "p", 7.0, None)
    assert m.exec_estimate("f", "p") == 7.0
    assert m.energy_estimate("f", "p") == 1.5  # no energy sample yet


def test_nonpositive_exec_rejected():
    m = BehaviorModels()
    with pytest.raises(ValidationError):
        m.update_perf("f", "p", 0.0, None)
    with pytest.raises(ValidationError):
        m.update_perf("f", "p", -1.0, None)


def test_unknown_pair_estimates_are_none():
    m = BehaviorModels()
    assert m.exec_estimate("f", "p") is None
    assert m.energy_estimate("f", "p") is None


def make_sim():
    kernel = SimKernel()
    spec = make_platform(cold_start_s=2.0)
    sim = PlatformSim(spec, kernel, lambda rec, ctx: None)
    sim.deploy(make_function(base={"p1": 4.0}))
    return sim


def test_predict_p90_idle_equals_estimate_plus_cold():
    m = BehaviorModels()
    m.update_perf("fn", "p1", 4.0, None)
    sim = make_sim()
    # warmpool flavor keeps a prewarm replica, which does not count as live
    assert sim.live_replicas("fn") == 0
    assert m.predict_p90("fn", sim, 0.0) == pytest.approx(4.0 + 2.0)
    sim.create_warm_replica("fn")
    assert m.predict_p90("fn", sim, 0.0) == pytest.approx(4.0)


def test_predict_p90_scales_with_saturation():
    m = BehaviorModels()
    m.update_perf("fn", "p1", 4.0, None)
    sim = make_sim()
    sim.create_warm_replica("fn")
    cap = sim.serving_capacity("fn")
    rate = 2.0 * cap / 4.0  # twice what capacity sustains
    assert m.predict_p90("fn", sim, rate) == pytest.approx(8.0)


def test_predict_p90_without_estimate_is_inf():
    m = BehaviorModels()
    assert m.predict_p90("fn", make_sim(), 1.0) == math.inf


def test_forecast_needs_three_closed_windows():
    m = BehaviorModels(interval_s=10.0)
    for t in (1.0, 2.0, 12.0, 21.0, 22.0, 23.0):
        m.note_invocation("f", "p", t)
    assert m.forecast_rate("f", "p", 9.0) is None
    assert m.forecast_rate("f", "p", 29.0) is None
    # windows 0,1,2 hold 2,1,3 invocations -> mean rate 0.2/s
    assert m.forecast_rate("f", "p", 30.0) == pytest.approx(0.2)
    assert m.window_rate("f", "p", 2) == pytest.approx(0.3)


def test_prewarm_hints_cover_forecast_gap():
    m = BehaviorModels(interval_s=10.0)
    m.update_perf("f", "p", 2.0, None)
    for w in range(3):
        for i in range(20):  # 2/s in every closed window
            m.note_invocation("f", "p", w * 10.0 + i * 0.4)
    hints = m.prewarm_hints(30.0, lambda fn, pid: 1)
    assert hints == {("f", "p"): 3}  # ceil(2.0 * 2.0) = 4 wanted, 1 warm
    assert m.prewarm_hints(30.0, lambda fn, pid: 4) == {}


def test_access_counters_split_local_remote():
    m = BehaviorModels(interval_s=10.0)
    m.note_access("f", "obj", "p", "read", remote=False, t_s=1.0)
    m.note_access("f", "obj", "p", "read", remote=True, t_s=2.0)
    m.note_access("f", "obj", "p", "write", remote=True, t_s=3.0)
    assert m.access_counts("f", "obj", "p", 0) == {"read": 2, "write": 1}
    assert m.remote_accesses("obj", "p", 0) == 2
    assert m.remote_accesses("obj", "p", 1) == 0


def test_interaction_recommendation_fires_once_on_crossing():
    m = BehaviorModels(colocation_threshold=3)
    fired = [m.record_interaction("a", "b") for _ in range(6)]
    assert fired == [False, False, False, True, False, False]
    assert len(m.recommendations) == 1
    rec = m.recommendations[0]
    assert rec["producer"] == "a" and rec["consumer"] == "b"
    assert rec["action"] == "co-locate" and rec["weight"] == 4


def test_snapshot_shape():
    m = BehaviorModels(interval_s=10.0)
    m.update_perf("f", "p", 2.0, 1.0)
    m.note_invocation("f", "p", 5.0)
    snap = m.snapshot(0, hints={("f", "p"): 2}, owner={"obj": "p"})
    assert snap["window_index"] == 0
    assert snap["perf"]["f|p"]["samples"] == 1
    assert snap["rates"]["f|p"] == pytest.approx(0.1)
    assert snap["hints"] == {"f|p": 2}
    assert snap["data_owner"] == {"obj": "p"}
