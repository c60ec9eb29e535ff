"""Object stores, per-platform caches, migration and staging.

Every object has exactly one home store. Reads and writes go through
``access``: a cached copy answers at the platform's local latency, anything
else pays the home store's advertised per-access latency for the calling
platform. Caches are LRU with byte capacity; writes invalidate copies cached
on other platforms (write-invalidate). Migration moves an object's home to a
store hosted at the target platform; the transfer takes size / bandwidth
seconds and the old home keeps serving until the transfer completes.
"""

from __future__ import annotations

import math

from .errors import ValidationError
from .kernel import SimKernel
from .model import DataConfig, DataObjectRef

MIB = 1024 * 1024


class _Cache:
    def __init__(self, capacity_bytes: int):
        self.capacity = capacity_bytes
        self.entries: dict[str, int] = {}  # object_id -> size, insertion order = LRU order
        self.total = 0

    def has(self, object_id: str) -> bool:
        return object_id in self.entries

    def touch(self, object_id: str) -> None:
        size = self.entries.pop(object_id)
        self.entries[object_id] = size

    def put(self, object_id: str, size: int) -> None:
        if size > self.capacity:
            return
        if object_id in self.entries:
            self.total -= self.entries.pop(object_id)
        while self.total + size > self.capacity and self.entries:
            oldest, oldest_size = next(iter(self.entries.items()))
            del self.entries[oldest]
            self.total -= oldest_size
        self.entries[object_id] = size
        self.total += size

    def drop(self, object_id: str) -> None:
        if object_id in self.entries:
            self.total -= self.entries.pop(object_id)


class DataPlane:
    def __init__(self, kernel: SimKernel, config: DataConfig,
                 objects: dict[str, DataObjectRef], platform_ids,
                 access_model=None, on_event=None):
        self.kernel = kernel
        self.config = config
        self.objects = objects
        self.access_model = access_model
        self.on_event = on_event  # callback(fn, object, platform, kind, hit, latency_s, nbytes)
        self.stores = {s.store_id: s for s in config.stores}
        if len(self.stores) != len(config.stores):
            raise ValidationError("duplicate store_id in data config")
        self.owner: dict[str, str] = {}
        for store in config.stores:
            for oid in store.objects:
                if oid in self.owner:
                    raise ValidationError(f"object {oid!r} listed in more than one store")
                self.owner[oid] = store.store_id
        for oid in objects:
            if oid not in self.owner:
                raise ValidationError(f"object {oid!r} is referenced but no store holds it")
        cap = config.cache_capacity_mib * MIB
        self.caches = {pid: _Cache(cap) for pid in platform_ids}
        self.migrating: dict[str, str] = {}  # object -> target store
        self.bytes_moved = 0

    # ------------------------------------------------------------- queries

    def _local_store(self, platform: str):
        """Cheapest store hosted at the platform, if any."""
        best = None
        for store in self.stores.values():
            if store.host_platform == platform and platform in store.access_latency_s:
                if best is None or store.access_latency_s[platform] < best.access_latency_s[platform]:
                    best = store
        return best

    def local_latency(self, platform: str) -> float:
        store = self._local_store(platform)
        if store is not None:
            return store.access_latency_s[platform]
        return self.config.cache_hit_latency_s

    def predicted_latency(self, object_id: str, platform: str) -> float:
        """Latency one access would pay right now (used by placement policies)."""
        cache = self.caches.get(platform)
        if cache is not None and cache.has(object_id):
            return self.local_latency(platform)
        store = self.stores.get(self.owner.get(object_id, ""), None)
        if store is None:
            return math.inf
        return store.access_latency_s.get(platform, math.inf)

    # -------------------------------------------------------------- access

    def access(self, fn: str, object_id: str, platform: str, kind: str) -> float:
        if kind not in ("read", "write"):
            raise ValidationError(f"unknown access kind {kind!r}")
        obj = self.objects.get(object_id)
        if obj is None:
            raise ValidationError(f"unknown object {object_id!r}")
        store = self.stores[self.owner[object_id]]
        cache = self.caches[platform]
        hit = cache.has(object_id)
        if hit:
            cache.touch(object_id)
            latency = self.local_latency(platform)
        else:
            latency = store.access_latency_s.get(platform)
            if latency is None:
                raise ValidationError(
                    f"store {store.store_id!r} has no access latency for platform {platform!r}"
                )
            cache.put(object_id, obj.size_bytes)
        if kind == "write":
            # write-invalidate: other platforms lose their copies
            for pid, other in self.caches.items():
                if pid != platform:
                    other.drop(object_id)
        remote = (not hit) and store.host_platform != platform
        if self.access_model is not None:
            self.access_model.note_access(fn, object_id, platform, kind, remote,
                                          self.kernel.now_s)
        if self.on_event is not None:
            self.on_event(fn, object_id, platform, kind, hit, latency, obj.size_bytes)
        return latency

    # ----------------------------------------------------------- placement

    def should_migrate(self, object_id: str, platform: str, window_index: int) -> bool:
        """Move the object home to `platform`? Requires K remote accesses from
        that platform in the last closed window and a latency gain of at least
        min_gain_s."""
        if object_id in self.migrating or self.access_model is None:
            return False
        store = self.stores[self.owner[object_id]]
        if store.host_platform == platform:
            return False
        target = self._local_store(platform)
        if target is None:
            return False
        remote = self.access_model.remote_accesses(object_id, platform, window_index)
        if remote < self.config.migration.k:
            return False
        current = store.access_latency_s.get(platform, math.inf)
        after = target.access_latency_s[platform]
        return current - after >= self.config.migration.min_gain_s

    def migrate(self, object_id: str, to_platform: str) -> bool:
        """Start an asynchronous home move; returns False when a migration of
        the object is already in flight or it is already home."""
        obj = self.objects.get(object_id)
        if obj is None:
            raise ValidationError(f"unknown object {object_id!r}")
        target = self._local_store(to_platform)
        if target is None:
            raise ValidationError(f"no store hosted at platform {to_platform!r}")
        if object_id in self.migrating:
            return False
        if self.owner[object_id] == target.store_id:
            return False
        self.migrating[object_id] = target.store_id
        delay = obj.size_bytes / (self.config.bandwidth_mib_per_s * MIB)
        self.bytes_moved += obj.size_bytes

        def done():
            self.owner[object_id] = target.store_id
            del self.migrating[object_id]

        self.kernel.after(delay, "migration-complete", done)
        if self.on_event is not None:
            self.on_event("", object_id, to_platform, "migrate", False, delay, obj.size_bytes)
        return True

    def stage(self, fn_objects: list[DataObjectRef], platform: str) -> float:
        """Pre-copy a function's objects into the platform cache; returns the
        transfer delay. The copies land when the transfer completes."""
        total = sum(o.size_bytes for o in fn_objects)
        cache = self.caches[platform]
        if total > cache.capacity:
            raise ValidationError(
                f"staging needs {total} bytes but cache capacity at {platform!r} "
                f"is {cache.capacity}"
            )
        delay = total / (self.config.bandwidth_mib_per_s * MIB)
        self.bytes_moved += total

        def done():
            for o in fn_objects:
                cache.put(o.object_id, o.size_bytes)

        self.kernel.after(delay, "staging-complete", done)
        if self.on_event is not None:
            for o in fn_objects:
                self.on_event("", o.object_id, platform, "stage", False, delay, o.size_bytes)
        return delay

    def owner_platform(self, object_id: str) -> str:
        return self.stores[self.owner[object_id]].host_platform
