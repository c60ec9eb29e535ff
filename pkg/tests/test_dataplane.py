"""Object stores, caches, migration and staging."""

import pytest

from fdnsim.behavior import BehaviorModels
from fdnsim.dataplane import MIB, DataPlane, _Cache
from fdnsim.errors import ValidationError
from fdnsim.kernel import SimKernel
from fdnsim.model import DataConfig, DataObjectRef, MigrationConfig, StoreSpec


def make_plane(kernel=None, stores=None, cache_mib=64, objects=None,
               migration=None, bandwidth=100.0, access_model=None, events=None):
    kernel = kernel or SimKernel()
    stores = stores or (
        StoreSpec("s-a", "pa", ("obj",), {"pa": 0.1, "pb": 2.0}),
        StoreSpec("s-b", "pb", (), {"pa": 2.0, "pb": 0.1}),
    )
    objects = objects or {"obj": DataObjectRef("obj", 4 * MIB)}
    config = DataConfig(stores=stores, cache_capacity_mib=cache_mib,
                        bandwidth_mib_per_s=bandwidth,
                        migration=migration or MigrationConfig(enabled=True, k=3,
                                                               min_gain_s=0.5))
    on_event = None
    if events is not None:
        on_event = lambda *row: events.append(row)
    return kernel, DataPlane(kernel, config, objects, ["pa", "pb"],
                             access_model=access_model, on_event=on_event)


# --------------------------------------------------------------------- cache

def test_cache_lru_evicts_oldest():
    c = _Cache(10)
    c.put("a", 4)
    c.put("b", 4)
    c.put("c", 4)  # evicts a
    assert not c.has("a") and c.has("b") and c.has("c")
    assert c.total == 8


def test_cache_touch_refreshes_order():
    c = _Cache(10)
    c.put("a", 4)
    c.put("b", 4)
    c.touch("a")
    c.put("c", 4)  # b is now oldest
    assert c.has("a") and not c.has("b") and c.has("c")


def test_cache_skips_oversized_entries():
    c = _Cache(10)
    c.put("big", 11)
    assert not c.has("big") and c.total == 0


# -------------------------------------------------------------------- access

def test_miss_then_hit_latencies():
    kernel, dp = make_plane()
    assert dp.access("f", "obj", "pb", "read") == pytest.approx(2.0)  # remote miss
    assert dp.access("f", "obj", "pb", "read") == pytest.approx(0.1)  # cached
    assert dp.predicted_latency("obj", "pb") == pytest.approx(0.1)


def test_zero_capacity_cache_never_hits():
    kernel, dp = make_plane(cache_mib=0)
    for _ in range(3):
        assert dp.access("f", "obj", "pb", "read") == pytest.approx(2.0)


def test_write_invalidates_other_caches():
    kernel, dp = make_plane()
    dp.access("f", "obj", "pa", "read")
    dp.access("f", "obj", "pb", "read")
    assert dp.caches["pa"].has("obj") and dp.caches["pb"].has("obj")
    dp.access("f", "obj", "pa", "write")
    assert dp.caches["pa"].has("obj")
    assert not dp.caches["pb"].has("obj")


def test_unknown_object_and_kind_rejected():
    kernel, dp = make_plane()
    with pytest.raises(ValidationError):
        dp.access("f", "nope", "pa", "read")
    with pytest.raises(ValidationError):
        dp.access("f", "obj", "pa", "peek")


def test_remote_accesses_feed_the_access_model():
    model = BehaviorModels(interval_s=10.0)
    kernel, dp = make_plane(cache_mib=0, access_model=model)
    dp.access("f", "obj", "pb", "read")
    dp.access("f", "obj", "pb", "read")
    dp.access("f", "obj", "pa", "read")  # home platform: not remote
    assert model.remote_accesses("obj", "pb", 0) == 2
    assert model.remote_accesses("obj", "pa", 0) == 0


# ----------------------------------------------------------------- migration

def test_should_migrate_requires_k_and_gain():
    model = BehaviorModels(interval_s=10.0)
    kernel, dp = make_plane(cache_mib=0, access_model=model)
    for _ in range(2):
        dp.access("f", "obj", "pb", "read")
    assert not dp.should_migrate("obj", "pb", 0)  # 2 < k=3
    dp.access("f", "obj", "pb", "read")
    assert dp.should_migrate("obj", "pb", 0)
    assert not dp.should_migrate("obj", "pa", 0)  # already home


def test_should_migrate_honors_min_gain():
    model = BehaviorModels(interval_s=10.0)
    stores = (
        StoreSpec("s-a", "pa", ("obj",), {"pa": 0.1, "pb": 0.4}),
        StoreSpec("s-b", "pb", (), {"pa": 2.0, "pb": 0.1}),
    )
    kernel, dp = make_plane(cache_mib=0, stores=stores, access_model=model)
    for _ in range(5):
        dp.access("f", "obj", "pb", "read")
    assert not dp.should_migrate("obj", "pb", 0)  # gain 0.3 < 0.5


def test_migrate_moves_home_after_transfer_delay():
    events = []
    kernel, dp = make_plane(cache_mib=0, bandwidth=1.0, events=events)
    assert dp.migrate("obj", "pb")  # 4 MiB at 1 MiB/s -> 4 s
    assert dp.owner["obj"] == "s-a"  # old home serves during the transfer
    assert dp.access("f", "obj", "pb", "read") == pytest.approx(2.0)
    assert not dp.migrate("obj", "pb")  # already in flight
    kernel.run_until(4.0)
    assert dp.owner["obj"] == "s-b"
    assert dp.owner_platform("obj") == "pb"
    assert dp.access("f", "obj", "pb", "read") == pytest.approx(0.1)
    assert dp.bytes_moved == 4 * MIB
    assert ("", "obj", "pb", "migrate", False, 4.0, 4 * MIB) in events


def test_migrate_to_platform_without_store_rejected():
    stores = (StoreSpec("s-a", "pa", ("obj",), {"pa": 0.1, "pb": 2.0}),)
    kernel, dp = make_plane(stores=stores)
    with pytest.raises(ValidationError):
        dp.migrate("obj", "pb")


def test_migrate_noop_when_already_home():
    kernel, dp = make_plane()
    assert not dp.migrate("obj", "pa")


# ------------------------------------------------------------------- staging

def test_stage_lands_copies_after_delay():
    kernel, dp = make_plane(bandwidth=2.0)
    obj = DataObjectRef("obj", 4 * MIB)
    delay = dp.stage([obj], "pb")
    assert delay == pytest.approx(2.0)
    assert not dp.caches["pb"].has("obj")
    kernel.run_until(2.0)
    assert dp.caches["pb"].has("obj")
    assert dp.access("f", "obj", "pb", "read") == pytest.approx(0.1)


def test_stage_overflowing_cache_rejected():
    kernel, dp = make_plane(cache_mib=1)
    with pytest.raises(ValidationError):
        dp.stage([DataObjectRef("obj", 4 * MIB)], "pb")


# ---------------------------------------------------------------- validation

def test_object_owned_by_two_stores_rejected():
    stores = (
        StoreSpec("s-a", "pa", ("obj",), {"pa": 0.1}),
        StoreSpec("s-b", "pb", ("obj",), {"pb": 0.1}),
    )
    with pytest.raises(ValidationError):
        make_plane(stores=stores)


def test_referenced_object_without_store_rejected():
    stores = (StoreSpec("s-a", "pa", (), {"pa": 0.1}),)
    with pytest.raises(ValidationError):
        make_plane(stores=stores)
