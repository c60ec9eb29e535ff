"""Domain model: platform catalogs, function specs, scenario configs.

Documents are UTF-8 JSON. Durations accept plain numbers (seconds) or strings
with an "s"/"m" suffix ("600s", "10m"). Parsing normalizes everything into
frozen dataclasses; `parse(serialize(x))` round-trips to an equal value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import ValidationError

PLATFORM_KINDS = ("edge", "cloud", "hpc", "public")
FAAS_FLAVORS = ("warmpool", "plain")
OUTCOMES = ("ok", "rejected", "failed")
INJECTION_KINDS = ("platform_fail", "platform_recover", "background_load")

DEFAULT_REPLICA_MEMORY_MIB = 256
DEFAULT_INVOKER_MEMORY_MIB = 4096
DEFAULT_MAX_CONCURRENT = 99999
DEFAULT_SAMPLING_INTERVAL_S = 10.0
DEFAULT_COLLECTION_DURATION_S = 1200.0
DEFAULT_CACHE_CAPACITY_MIB = 256
DEFAULT_CACHE_HIT_LATENCY_S = 0.005
DEFAULT_BANDWIDTH_MIB_PER_S = 10.0
DEFAULT_MIGRATION_K = 10
DEFAULT_MIGRATION_MIN_GAIN_S = 0.05


def parse_duration(value: Any, path: str = "duration") -> float:
    """Accepts 600, 600.0, "600s", "10m"; returns seconds."""
    if isinstance(value, bool):
        raise ValidationError(f"{path}: expected a duration, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        text = value.strip()
        try:
            if text.endswith("ms"):
                out = float(text[:-2]) / 1000.0
            elif text.endswith("s"):
                out = float(text[:-1])
            elif text.endswith("m"):
                out = float(text[:-1]) * 60.0
            else:
                out = float(text)
        except ValueError:
            raise ValidationError(f"{path}: cannot parse duration {value!r}") from None
    else:
        raise ValidationError(f"{path}: expected a duration, got {type(value).__name__}")
    if out < 0:
        raise ValidationError(f"{path}: duration must be >= 0, got {out}")
    return out


def _require(doc: Mapping, key: str, path: str) -> Any:
    if key not in doc:
        raise ValidationError(f"{path}: missing required field {key!r}")
    return doc[key]


def _as_int(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ValidationError(f"{path}: expected an integer, got {value!r}")
    try:
        out = int(value)
    except ValueError:
        raise ValidationError(f"{path}: expected an integer, got {value!r}") from None
    if float(value) != out:
        raise ValidationError(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and out < minimum:
        raise ValidationError(f"{path}: must be >= {minimum}, got {out}")
    return out


def _as_float(value: Any, path: str, minimum: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path}: expected a number, got {value!r}")
    out = float(value)
    if minimum is not None and out < minimum:
        raise ValidationError(f"{path}: must be >= {minimum}, got {out}")
    return out


def _as_frac(value: Any, path: str) -> float:
    out = _as_float(value, path, 0.0)
    if out > 1.0:
        raise ValidationError(f"{path}: must be in [0, 1], got {out}")
    return out


def _as_str(value: Any, path: str) -> str:
    if not isinstance(value, str) or not value:
        raise ValidationError(f"{path}: expected a non-empty string, got {value!r}")
    return value


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    cores: int
    memory_mib: int
    power_idle_w: float
    power_busy_w: float

    def __post_init__(self):
        if self.cores < 1:
            raise ValidationError(f"node {self.node_id}: cores must be >= 1")
        if self.memory_mib < 1:
            raise ValidationError(f"node {self.node_id}: memory_mib must be >= 1")
        if self.power_idle_w < 0:
            raise ValidationError(f"node {self.node_id}: power_idle_w must be >= 0")
        if self.power_busy_w < self.power_idle_w:
            raise ValidationError(
                f"node {self.node_id}: power_busy_w must be >= power_idle_w"
            )


@dataclass(frozen=True)
class TargetPlatform:
    platform_id: str
    kind: str
    nodes: tuple[NodeSpec, ...]
    faas_flavor: str = "warmpool"
    cold_start_s: float = 5.0
    scale_to_zero: bool = True
    inactivity_duration_s: float = 600.0
    invoker_memory_mib: int = DEFAULT_INVOKER_MEMORY_MIB
    max_concurrent_invocations: int = DEFAULT_MAX_CONCURRENT
    benchmark_rps: float | None = None

    def __post_init__(self):
        if self.kind not in PLATFORM_KINDS:
            raise ValidationError(f"platform {self.platform_id}: unknown kind {self.kind!r}")
        if self.faas_flavor not in FAAS_FLAVORS:
            raise ValidationError(
                f"platform {self.platform_id}: unknown faas_flavor {self.faas_flavor!r}"
            )
        if not self.nodes:
            raise ValidationError(f"platform {self.platform_id}: needs at least one node")
        if self.cold_start_s < 0 or self.inactivity_duration_s < 0:
            raise ValidationError(f"platform {self.platform_id}: negative duration")
        if self.invoker_memory_mib < 1 or self.max_concurrent_invocations < 1:
            raise ValidationError(f"platform {self.platform_id}: limits must be >= 1")
        seen = set()
        for n in self.nodes:
            if n.node_id in seen:
                raise ValidationError(
                    f"platform {self.platform_id}: duplicate node {n.node_id!r}"
                )
            seen.add(n.node_id)

    @property
    def energy_available(self) -> bool:
        return self.kind != "public"


@dataclass(frozen=True)
class DataObjectRef:
    object_id: str
    size_bytes: int
    reads_per_invocation: int = 1
    writes_per_invocation: int = 0

    def __post_init__(self):
        if self.size_bytes < 1:
            raise ValidationError(f"object {self.object_id}: size_bytes must be >= 1")
        if self.reads_per_invocation < 0 or self.writes_per_invocation < 0:
            raise ValidationError(f"object {self.object_id}: negative access count")


@dataclass(frozen=True)
class WorkloadProfile:
    base_service_s: Mapping[str, float]
    cpu_bound_fraction: float
    data_objects: tuple[DataObjectRef, ...] = ()
    payload_bytes: int = 0

    def __post_init__(self):
        if not 0.0 <= self.cpu_bound_fraction <= 1.0:
            raise ValidationError("cpu_bound_fraction must be in [0, 1]")
        for pid, s in self.base_service_s.items():
            if s <= 0:
                raise ValidationError(f"base_service_s[{pid}]: must be > 0")
        if self.payload_bytes < 0:
            raise ValidationError("payload_bytes must be >= 0")


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    runtime: str
    profile: WorkloadProfile
    replica_memory_mib: int = DEFAULT_REPLICA_MEMORY_MIB

    def __post_init__(self):
        if self.replica_memory_mib < 1:
            raise ValidationError(f"function {self.name}: replica_memory_mib must be >= 1")


@dataclass(frozen=True)
class SloSpec:
    p90_response_s: float

    def __post_init__(self):
        if self.p90_response_s <= 0:
            raise ValidationError("p90_response_s must be > 0")


@dataclass(frozen=True)
class InvocationRecord:
    request_id: str
    function: str
    issued_at_s: float
    started_at_s: float
    completed_at_s: float
    platform_id: str
    node_id: str
    cold_start: bool
    outcome: str
    response_time_s: float

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValidationError(f"unknown outcome {self.outcome!r}")


@dataclass(frozen=True)
class PolicySpec:
    name: str
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class StoreSpec:
    store_id: str
    host_platform: str  # platform_id or "remote"
    objects: tuple[str, ...]
    access_latency_s: Mapping[str, float]

    def __post_init__(self):
        for pid, lat in self.access_latency_s.items():
            if lat <= 0:
                raise ValidationError(f"store {self.store_id}: latency[{pid}] must be > 0")
        if self.host_platform != "remote" and self.host_platform in self.access_latency_s:
            local = self.access_latency_s[self.host_platform]
            for pid, lat in self.access_latency_s.items():
                if lat < local:
                    raise ValidationError(
                        f"store {self.store_id}: local access from {self.host_platform} "
                        f"must not be slower than remote access from {pid}"
                    )


@dataclass(frozen=True)
class MigrationConfig:
    enabled: bool = False
    k: int = DEFAULT_MIGRATION_K
    min_gain_s: float = DEFAULT_MIGRATION_MIN_GAIN_S


@dataclass(frozen=True)
class DataConfig:
    stores: tuple[StoreSpec, ...] = ()
    cache_capacity_mib: int = DEFAULT_CACHE_CAPACITY_MIB
    cache_hit_latency_s: float = DEFAULT_CACHE_HIT_LATENCY_S
    bandwidth_mib_per_s: float = DEFAULT_BANDWIDTH_MIB_PER_S
    migration: MigrationConfig = field(default_factory=MigrationConfig)
    stage: tuple[tuple[str, str], ...] = ()  # (function, platform) pairs staged before load


@dataclass(frozen=True)
class InjectionSpec:
    at_s: float
    kind: str
    platform_id: str
    cpu_frac: float = 0.0
    mem_frac: float = 0.0
    until_s: float | None = None

    def __post_init__(self):
        if self.kind not in INJECTION_KINDS:
            raise ValidationError(f"injection: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    test_name: str
    functions: tuple[str, ...]
    platforms: tuple[str, ...]
    policy: PolicySpec
    vus: int
    duration_s: float
    sleep_s: float = 0.0
    param_file: str = ""
    seed: int = 0
    sampling_interval_s: float = DEFAULT_SAMPLING_INTERVAL_S
    collection_duration_s: float = DEFAULT_COLLECTION_DURATION_S
    catalog_path: str | None = None
    functions_config: str | None = None
    influxdb_url: str | None = None  # accepted for config compatibility, unused
    auth_token: str | None = None
    injections: tuple[InjectionSpec, ...] = ()
    data: DataConfig | None = None
    prewarm: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    hints_enabled: bool = False
    benchmarks: Mapping[str, float] = field(default_factory=dict)
    slo: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.vus < 1:
            raise ValidationError("test_settings.vus must be >= 1")
        if not self.functions:
            raise ValidationError("scenario needs at least one function")
        if not self.platforms:
            raise ValidationError("scenario needs at least one target platform")
        if self.duration_s <= 0:
            raise ValidationError("duration must be > 0")
        if self.sampling_interval_s <= 0:
            raise ValidationError("sampling_interval must be > 0")
        if self.duration_s > self.collection_duration_s:
            raise ValidationError(
                f"duration ({self.duration_s}s) exceeds collection window "
                f"({self.collection_duration_s}s)"
            )


@dataclass(frozen=True)
class Catalog:
    platforms: Mapping[str, TargetPlatform]
    functions: Mapping[str, FunctionSpec]


# ---------------------------------------------------------------- parsing

def _parse_node(doc: Mapping, path: str) -> NodeSpec:
    return NodeSpec(
        node_id=_as_str(_require(doc, "node_id", path), f"{path}.node_id"),
        cores=_as_int(_require(doc, "cores", path), f"{path}.cores", 1),
        memory_mib=_as_int(_require(doc, "memory_mib", path), f"{path}.memory_mib", 1),
        power_idle_w=_as_float(_require(doc, "power_idle_w", path), f"{path}.power_idle_w", 0.0),
        power_busy_w=_as_float(_require(doc, "power_busy_w", path), f"{path}.power_busy_w", 0.0),
    )


def _parse_platform(doc: Mapping, path: str) -> TargetPlatform:
    pid = _as_str(_require(doc, "platform_id", path), f"{path}.platform_id")
    kind = _as_str(_require(doc, "kind", path), f"{path}.kind")
    flavor = doc.get("faas_flavor", "plain" if kind in ("edge", "public") else "warmpool")
    nodes_doc = doc.get("nodes")
    if nodes_doc is None:
        if kind != "public":
            raise ValidationError(f"{path}: non-public platforms must declare nodes")
        # one synthetic large node; concrete hardware is opaque for public clouds
        nodes = (NodeSpec(f"{pid}-n0", cores=1024, memory_mib=1 << 20,
                          power_idle_w=0.0, power_busy_w=0.0),)
    else:
        if not isinstance(nodes_doc, list) or not nodes_doc:
            raise ValidationError(f"{path}.nodes: expected a non-empty list")
        nodes = tuple(
            _parse_node(n, f"{path}.nodes[{i}]") for i, n in enumerate(nodes_doc)
        )
    default_cold = 1.0 if (kind == "edge" and flavor == "plain") else 5.0
    invoker_default = doc.get("invoker_memory_mib", DEFAULT_INVOKER_MEMORY_MIB)
    if kind == "public" and "invoker_memory_mib" not in doc:
        invoker_default = max(n.memory_mib for n in nodes)
    bench = doc.get("benchmark_rps")
    return TargetPlatform(
        platform_id=pid,
        kind=kind,
        nodes=nodes,
        faas_flavor=flavor,
        cold_start_s=parse_duration(doc.get("cold_start_s", default_cold), f"{path}.cold_start_s"),
        scale_to_zero=bool(doc.get("scale_to_zero", True)),
        inactivity_duration_s=parse_duration(
            doc.get("inactivity_duration_s", 600.0), f"{path}.inactivity_duration_s"
        ),
        invoker_memory_mib=_as_int(invoker_default, f"{path}.invoker_memory_mib", 1),
        max_concurrent_invocations=_as_int(
            doc.get("max_concurrent_invocations", DEFAULT_MAX_CONCURRENT),
            f"{path}.max_concurrent_invocations", 1,
        ),
        benchmark_rps=None if bench is None else _as_float(bench, f"{path}.benchmark_rps", 0.0),
    )


def _parse_object(doc: Mapping, path: str) -> DataObjectRef:
    return DataObjectRef(
        object_id=_as_str(_require(doc, "object_id", path), f"{path}.object_id"),
        size_bytes=_as_int(_require(doc, "size_bytes", path), f"{path}.size_bytes", 1),
        reads_per_invocation=_as_int(doc.get("reads_per_invocation", 1), f"{path}.reads", 0),
        writes_per_invocation=_as_int(doc.get("writes_per_invocation", 0), f"{path}.writes", 0),
    )


def _parse_function(doc: Mapping, path: str) -> FunctionSpec:
    name = _as_str(_require(doc, "name", path), f"{path}.name")
    base_doc = _require(doc, "base_service_s", path)
    if not isinstance(base_doc, Mapping) or not base_doc:
        raise ValidationError(f"{path}.base_service_s: expected a non-empty mapping")
    base = {pid: _as_float(v, f"{path}.base_service_s[{pid}]") for pid, v in base_doc.items()}
    objects = tuple(
        _parse_object(o, f"{path}.data_objects[{i}]")
        for i, o in enumerate(doc.get("data_objects", []))
    )
    profile = WorkloadProfile(
        base_service_s=base,
        cpu_bound_fraction=_as_frac(doc.get("cpu_bound_fraction", 1.0), f"{path}.cpu_bound_fraction"),
        data_objects=objects,
        payload_bytes=_as_int(doc.get("payload_bytes", 0), f"{path}.payload_bytes", 0),
    )
    return FunctionSpec(
        name=name,
        runtime=_as_str(_require(doc, "runtime", path), f"{path}.runtime"),
        profile=profile,
        replica_memory_mib=_as_int(
            doc.get("replica_memory_mib", DEFAULT_REPLICA_MEMORY_MIB),
            f"{path}.replica_memory_mib", 1,
        ),
    )


def parse_catalog(text_or_doc: str | Mapping) -> Catalog:
    doc = json.loads(text_or_doc) if isinstance(text_or_doc, str) else text_or_doc
    if not isinstance(doc, Mapping):
        raise ValidationError("catalog: expected a JSON object")
    platforms_doc = _require(doc, "platforms", "catalog")
    if not isinstance(platforms_doc, list) or not platforms_doc:
        raise ValidationError("catalog.platforms: expected a non-empty list")
    platforms: dict[str, TargetPlatform] = {}
    for i, p in enumerate(platforms_doc):
        plat = _parse_platform(p, f"catalog.platforms[{i}]")
        if plat.platform_id in platforms:
            raise ValidationError(f"catalog: duplicate platform {plat.platform_id!r}")
        platforms[plat.platform_id] = plat
    functions: dict[str, FunctionSpec] = {}
    for i, f in enumerate(doc.get("functions", [])):
        fn = _parse_function(f, f"catalog.functions[{i}]")
        if fn.name in functions:
            raise ValidationError(f"catalog: duplicate function {fn.name!r}")
        functions[fn.name] = fn
    return Catalog(platforms=platforms, functions=functions)


def parse_functions_doc(text_or_doc: str | Mapping) -> dict[str, FunctionSpec]:
    doc = json.loads(text_or_doc) if isinstance(text_or_doc, str) else text_or_doc
    if not isinstance(doc, Mapping):
        raise ValidationError("functions config: expected a JSON object")
    out: dict[str, FunctionSpec] = {}
    for i, f in enumerate(doc.get("functions", [])):
        fn = _parse_function(f, f"functions[{i}]")
        out[fn.name] = fn
    return out


def _parse_policy(doc: Any, path: str) -> PolicySpec:
    if isinstance(doc, str):
        return PolicySpec(name=doc)
    if not isinstance(doc, Mapping):
        raise ValidationError(f"{path}: expected a policy name or object")
    name = _as_str(_require(doc, "name", path), f"{path}.name")
    params = {k: v for k, v in doc.items() if k != "name"}
    return PolicySpec(name=name, params=params)


def _parse_store(doc: Mapping, path: str) -> StoreSpec:
    lat_doc = _require(doc, "access_latency_s", path)
    if not isinstance(lat_doc, Mapping) or not lat_doc:
        raise ValidationError(f"{path}.access_latency_s: expected a non-empty mapping")
    return StoreSpec(
        store_id=_as_str(_require(doc, "store_id", path), f"{path}.store_id"),
        host_platform=_as_str(_require(doc, "host_platform", path), f"{path}.host_platform"),
        objects=tuple(doc.get("objects", [])),
        access_latency_s={p: _as_float(v, f"{path}.access_latency_s[{p}]") for p, v in lat_doc.items()},
    )


def _parse_data(doc: Mapping, path: str) -> DataConfig:
    mig_doc = doc.get("migration", {})
    migration = MigrationConfig(
        enabled=bool(mig_doc.get("enabled", False)),
        k=_as_int(mig_doc.get("k", DEFAULT_MIGRATION_K), f"{path}.migration.k", 1),
        min_gain_s=_as_float(
            mig_doc.get("min_gain_s", DEFAULT_MIGRATION_MIN_GAIN_S), f"{path}.migration.min_gain_s", 0.0
        ),
    )
    stage = tuple(
        (_as_str(s.get("function"), f"{path}.stage[{i}].function"),
         _as_str(s.get("platform"), f"{path}.stage[{i}].platform"))
        for i, s in enumerate(doc.get("stage", []))
    )
    return DataConfig(
        stores=tuple(_parse_store(s, f"{path}.stores[{i}]") for i, s in enumerate(doc.get("stores", []))),
        cache_capacity_mib=_as_int(doc.get("cache_capacity_mib", DEFAULT_CACHE_CAPACITY_MIB), f"{path}.cache_capacity_mib", 0),
        cache_hit_latency_s=_as_float(doc.get("cache_hit_latency_s", DEFAULT_CACHE_HIT_LATENCY_S), f"{path}.cache_hit_latency_s", 0.0),
        bandwidth_mib_per_s=_as_float(doc.get("bandwidth_mib_per_s", DEFAULT_BANDWIDTH_MIB_PER_S), f"{path}.bandwidth_mib_per_s"),
        migration=migration,
        stage=stage,
    )


def _parse_injection(doc: Mapping, path: str) -> InjectionSpec:
    kind = _as_str(_require(doc, "kind", path), f"{path}.kind")
    until = doc.get("until")
    return InjectionSpec(
        at_s=parse_duration(_require(doc, "at", path), f"{path}.at"),
        kind=kind,
        platform_id=_as_str(_require(doc, "platform", path), f"{path}.platform"),
        cpu_frac=_as_frac(doc.get("cpu_frac", 0.0), f"{path}.cpu_frac"),
        mem_frac=_as_frac(doc.get("mem_frac", 0.0), f"{path}.mem_frac"),
        until_s=None if until is None else parse_duration(until, f"{path}.until"),
    )


def parse_scenario(text_or_doc: str | Mapping) -> ScenarioConfig:
    doc = json.loads(text_or_doc) if isinstance(text_or_doc, str) else text_or_doc
    if not isinstance(doc, Mapping):
        raise ValidationError("scenario: expected a JSON object")
    settings = doc.get("test_settings", {})
    if not isinstance(settings, Mapping):
        raise ValidationError("scenario.test_settings: expected an object")
    functions = doc.get("functions", doc.get("function_names"))
    if not isinstance(functions, list) or not functions:
        raise ValidationError("scenario.functions: expected a non-empty list")
    platforms = doc.get("target_platforms", doc.get("platform_ids"))
    if not isinstance(platforms, list) or not platforms:
        raise ValidationError("scenario.target_platforms: expected a non-empty list")
    catalog_path = doc.get("catalog", doc.get("target_platforms_config"))

    prewarm_doc = doc.get("prewarm", {})
    prewarm: dict[str, dict[str, int]] = {}
    for fn, by_platform in prewarm_doc.items():
        if not isinstance(by_platform, Mapping):
            raise ValidationError(f"scenario.prewarm[{fn}]: expected a mapping platform -> count")
        prewarm[fn] = {p: _as_int(n, f"scenario.prewarm[{fn}][{p}]", 0) for p, n in by_platform.items()}

    data_doc = doc.get("data")
    slo_doc = doc.get("slo", {})
    bench_doc = doc.get("benchmarks", {})
    return ScenarioConfig(
        test_name=_as_str(_require(doc, "test_name", "scenario"), "scenario.test_name"),
        functions=tuple(_as_str(f, "scenario.functions[]") for f in functions),
        platforms=tuple(_as_str(p, "scenario.target_platforms[]") for p in platforms),
        policy=_parse_policy(doc.get("policy", "ranked-best"), "scenario.policy"),
        vus=_as_int(_require(settings, "vus", "scenario.test_settings"), "scenario.test_settings.vus", 1),
        duration_s=parse_duration(
            settings.get("duration", settings.get("duration_s", 600)), "scenario.test_settings.duration"
        ),
        sleep_s=parse_duration(settings.get("sleep", settings.get("sleep_s", 0)), "scenario.test_settings.sleep"),
        param_file=str(settings.get("param_file", "")),
        seed=_as_int(doc.get("seed", 0), "scenario.seed"),
        sampling_interval_s=parse_duration(
            doc.get("sampling_interval", DEFAULT_SAMPLING_INTERVAL_S), "scenario.sampling_interval"
        ),
        collection_duration_s=parse_duration(
            doc.get("collection_duration", DEFAULT_COLLECTION_DURATION_S), "scenario.collection_duration"
        ),
        catalog_path=None if catalog_path is None else str(catalog_path),
        functions_config=doc.get("functions_config") or None,
        influxdb_url=doc.get("influxdb_url") or None,
        auth_token=doc.get("auth_token") or None,
        injections=tuple(
            _parse_injection(i, f"scenario.injections[{k}]") for k, i in enumerate(doc.get("injections", []))
        ),
        data=None if data_doc is None else _parse_data(data_doc, "scenario.data"),
        prewarm=prewarm,
        hints_enabled=bool(doc.get("hints_enabled", False)),
        benchmarks={p: _as_float(v, f"scenario.benchmarks[{p}]", 0.0) for p, v in bench_doc.items()},
        slo={f: _as_float(v, f"scenario.slo[{f}]", 0.0) for f, v in slo_doc.items()},
    )


# ------------------------------------------------------------ serialization

def _node_doc(n: NodeSpec) -> dict:
    return {
        "node_id": n.node_id, "cores": n.cores, "memory_mib": n.memory_mib,
        "power_idle_w": n.power_idle_w, "power_busy_w": n.power_busy_w,
    }


def _platform_doc(p: TargetPlatform) -> dict:
    doc = {
        "platform_id": p.platform_id, "kind": p.kind,
        "nodes": [_node_doc(n) for n in p.nodes],
        "faas_flavor": p.faas_flavor, "cold_start_s": p.cold_start_s,
        "scale_to_zero": p.scale_to_zero, "inactivity_duration_s": p.inactivity_duration_s,
        "invoker_memory_mib": p.invoker_memory_mib,
        "max_concurrent_invocations": p.max_concurrent_invocations,
    }
    if p.benchmark_rps is not None:
        doc["benchmark_rps"] = p.benchmark_rps
    return doc


def _function_doc(f: FunctionSpec) -> dict:
    return {
        "name": f.name, "runtime": f.runtime,
        "base_service_s": dict(f.profile.base_service_s),
        "cpu_bound_fraction": f.profile.cpu_bound_fraction,
        "data_objects": [
            {"object_id": o.object_id, "size_bytes": o.size_bytes,
             "reads_per_invocation": o.reads_per_invocation,
             "writes_per_invocation": o.writes_per_invocation}
            for o in f.profile.data_objects
        ],
        "payload_bytes": f.profile.payload_bytes,
        "replica_memory_mib": f.replica_memory_mib,
    }


def serialize_catalog(catalog: Catalog) -> str:
    doc = {
        "platforms": [_platform_doc(p) for p in catalog.platforms.values()],
        "functions": [_function_doc(f) for f in catalog.functions.values()],
    }
    return json.dumps(doc, indent=2) + "\n"


def scenario_doc(cfg: ScenarioConfig) -> dict:
    doc: dict[str, Any] = {
        "test_name": cfg.test_name,
        "functions": list(cfg.functions),
        "target_platforms": list(cfg.platforms),
        "policy": {"name": cfg.policy.name, **cfg.policy.params},
        "test_settings": {
            "vus": cfg.vus, "duration": cfg.duration_s,
            "sleep": cfg.sleep_s, "param_file": cfg.param_file,
        },
        "seed": cfg.seed,
        "sampling_interval": cfg.sampling_interval_s,
        "collection_duration": cfg.collection_duration_s,
    }
    if cfg.catalog_path is not None:
        doc["catalog"] = cfg.catalog_path
    if cfg.functions_config is not None:
        doc["functions_config"] = cfg.functions_config
    if cfg.influxdb_url is not None:
        doc["influxdb_url"] = cfg.influxdb_url
    if cfg.auth_token is not None:
        doc["auth_token"] = cfg.auth_token
    if cfg.injections:
        doc["injections"] = [
            {k: v for k, v in
             {"at": i.at_s, "kind": i.kind, "platform": i.platform_id,
              "cpu_frac": i.cpu_frac, "mem_frac": i.mem_frac, "until": i.until_s}.items()
             if v is not None}
            for i in cfg.injections
        ]
    if cfg.data is not None:
        d = cfg.data
        doc["data"] = {
            "stores": [
                {"store_id": s.store_id, "host_platform": s.host_platform,
                 "objects": list(s.objects), "access_latency_s": dict(s.access_latency_s)}
                for s in d.stores
            ],
            "cache_capacity_mib": d.cache_capacity_mib,
            "cache_hit_latency_s": d.cache_hit_latency_s,
            "bandwidth_mib_per_s": d.bandwidth_mib_per_s,
            "migration": {"enabled": d.migration.enabled, "k": d.migration.k,
                          "min_gain_s": d.migration.min_gain_s},
            "stage": [{"function": f, "platform": p} for f, p in d.stage],
        }
    if cfg.prewarm:
        doc["prewarm"] = {f: dict(m) for f, m in cfg.prewarm.items()}
    if cfg.hints_enabled:
        doc["hints_enabled"] = True
    if cfg.benchmarks:
        doc["benchmarks"] = dict(cfg.benchmarks)
    if cfg.slo:
        doc["slo"] = dict(cfg.slo)
    return doc


def serialize_scenario(cfg: ScenarioConfig) -> str:
    return json.dumps(scenario_doc(cfg), indent=2) + "\n"


def validate_deployment(fn: FunctionSpec, platform: TargetPlatform) -> None:
    """A function is deployable when some node can run a replica and the
    platform has a calibrated service time for it."""
    if platform.platform_id not in fn.profile.base_service_s:
        raise ValidationError(
            f"function {fn.name!r} has no base_service_s entry for platform "
            f"{platform.platform_id!r}"
        )
    runnable = max(min(n.memory_mib, platform.invoker_memory_mib) for n in platform.nodes)
    if fn.replica_memory_mib > runnable:
        raise ValidationError(
            f"function {fn.name!r}: replica footprint {fn.replica_memory_mib} MiB does not fit "
            f"on any node of {platform.platform_id!r} (limit {runnable} MiB)"
        )
