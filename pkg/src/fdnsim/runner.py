"""Scenario execution: wire catalog, platforms, control plane, models, data
plane and load generators to one kernel, run the collection window, and
collect artifacts.

The run is deterministic for a given (scenario, catalog, seed): virtual time
is integer milliseconds, every tie is broken by insertion order, and no wall
clock or uuid leaks into outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .behavior import BehaviorModels
from .dataplane import DataPlane
from .errors import InvariantError, ValidationError
from .faults import apply_injections
from .kernel import SimKernel
from .knowledge import KnowledgeBase, KnowledgeRun
from .loadgen import ClosedLoopLoadGen
from .model import Catalog, InvocationRecord, ScenarioConfig
from .monitoring import Monitor, p90
from .platforms import PlatformSim, RequestCtx
from .scheduler import ControlPlane, build_policy, rank_platforms


@dataclass
class RunResult:
    scenario: ScenarioConfig
    seed: int
    summary: dict[str, Any]
    monitor: Monitor
    platforms: dict[str, PlatformSim]
    models: BehaviorModels
    records: list[InvocationRecord] = field(default_factory=list)
    decisions: list = field(default_factory=list)
    power_rows: list[tuple[str, int, float]] = field(default_factory=list)
    data_events: list[tuple] = field(default_factory=list)
    data_plane: DataPlane | None = None
    trace: list | None = None
    out_dir: Path | None = None


def _energy_prior(platform, fn) -> float | None:
    """Energy per invocation: one core's share of the node's busy power, held
    for the service time, averaged over the platform's nodes. Full draw (not
    the idle-to-busy delta) so that low-power hardware wins the comparison
    even when it is slower."""
    if not platform.energy_available:
        return None
    base = fn.profile.base_service_s[platform.platform_id]
    cpu = fn.profile.cpu_bound_fraction
    per_core = [n.power_busy_w / n.cores for n in platform.nodes]
    return (sum(per_core) / len(per_core)) * cpu * base


def run_scenario(scenario: ScenarioConfig, catalog: Catalog,
                 out_dir: str | Path | None = None,
                 seed: int | None = None, trace: bool = False) -> RunResult:
    seed = scenario.seed if seed is None else seed
    kernel = SimKernel(seed=seed, trace=trace)
    interval = scenario.sampling_interval_s
    collection = scenario.collection_duration_s
    out_path = Path(out_dir) if out_dir is not None else None

    # ------------------------------------------------ resolve catalog entries
    functions = {}
    for name in scenario.functions:
        spec = catalog.functions.get(name)
        if spec is None:
            raise ValidationError(f"scenario function {name!r} not in catalog")
        functions[name] = spec
    platform_specs = {}
    for pid in scenario.platforms:
        spec = catalog.platforms.get(pid)
        if spec is None:
            raise ValidationError(f"scenario platform {pid!r} not in catalog")
        platform_specs[pid] = spec

    monitor = Monitor(list(platform_specs), interval_s=interval)
    models = BehaviorModels(interval_s=interval)

    counters = {"issued": 0, "ok": 0, "rejected": 0, "failed": 0}
    records: list[InvocationRecord] = []
    decisions: list = []
    power_rows: list[tuple[str, int, float]] = []
    data_events: list[tuple] = []
    per_target: dict[tuple[str, str], dict[str, list]] = {}
    cold_starts: dict[str, int] = {pid: 0 for pid in platform_specs}
    loadgens: dict[str, ClosedLoopLoadGen] = {}

    kb_run: KnowledgeRun | None = None
    if out_path is not None:
        kb_run = KnowledgeBase(out_path / "knowledge").open_run(scenario.test_name)

    def handle_record(rec: InvocationRecord, ctx: RequestCtx) -> None:
        records.append(rec)
        counters[rec.outcome] += 1
        monitor.record(rec)
        if rec.outcome == "ok":
            if rec.cold_start:
                cold_starts[rec.platform_id] += 1
            exec_s = rec.completed_at_s - rec.started_at_s
            energy = None
            sim = sims.get(rec.platform_id)
            if sim is not None and sim.spec.energy_available:
                node = next(n for n in sim.spec.nodes if n.node_id == rec.node_id)
                fn = functions[rec.function]
                energy = (node.power_busy_w / node.cores
                          * fn.profile.cpu_bound_fraction * exec_s)
            if exec_s > 0:
                models.update_perf(rec.function, rec.platform_id, exec_s, energy)
            bucket = per_target.setdefault((rec.function, rec.platform_id),
                                           {"responses": [], "energy": []})
            bucket["responses"].append(rec.response_time_s)
            if energy is not None:
                bucket["energy"].append(energy)
        gen = loadgens.get(rec.function)
        if gen is not None and ctx is not None and ctx.vu_id >= 0:
            gen.on_done(ctx.vu_id)

    sims = {pid: PlatformSim(spec, kernel, handle_record)
            for pid, spec in platform_specs.items()}

    # -------------------------------------------------------------- deploy
    for name, fn in functions.items():
        for pid, sim in sims.items():
            count = scenario.prewarm.get(name, {}).get(pid, 0)
            sim.deploy(fn, prewarm_count=count)
            models.seed_prior(name, pid, fn.profile.base_service_s[pid],
                              _energy_prior(sim.spec, fn))

    # ----------------------------------------------------------- data plane
    objects = {}
    for fn in functions.values():
        for obj in fn.profile.data_objects:
            objects[obj.object_id] = obj
    data_plane = None
    if objects:
        if scenario.data is None:
            raise ValidationError(
                "functions declare data objects but the scenario has no data section")

        def on_data_event(fn, oid, pid, kind, hit, latency_s, nbytes):
            data_events.append((kernel.now_ms, fn, oid, pid, kind, hit, latency_s))
            if kind in ("read", "write") and not hit:
                monitor.add_disk_io(pid, kernel.now_s, nbytes)

        data_plane = DataPlane(kernel, scenario.data, objects, list(sims),
                               access_model=models, on_event=on_data_event)
        for sim in sims.values():
            sim.data_plane = data_plane
        for fn_name, pid in scenario.data.stage:
            fn = functions.get(fn_name)
            if fn is None:
                raise ValidationError(f"stage directive names unknown function {fn_name!r}")
            if pid not in sims:
                raise ValidationError(f"stage directive names unknown platform {pid!r}")
            data_plane.stage(list(fn.profile.data_objects), pid)

    # --------------------------------------------------------- control plane
    benchmarks = dict(scenario.benchmarks)
    if not benchmarks:
        benchmarks = {pid: spec.benchmark_rps for pid, spec in platform_specs.items()
                      if spec.benchmark_rps is not None}
    ranks = rank_platforms(benchmarks)
    policy = build_policy(scenario.policy, list(scenario.platforms))

    def on_decision(decision):
        decisions.append(decision)
        if kb_run is not None:
            kb_run.append("decision", {
                "t_ms": decision.t_ms, "request_id": decision.request_id,
                "policy": decision.policy, "platform": decision.platform_id,
                "node": decision.node_id, "rationale": decision.rationale,
            }, window_index=models.window_index(kernel.now_s))

    cp = ControlPlane(kernel, sims, policy, ranks, models,
                      data_plane=data_plane, auth_token=scenario.auth_token,
                      slo=scenario.slo, on_decision=on_decision,
                      on_record=handle_record)

    # ------------------------------------------------------------- workload
    rid_seq = [0]

    def issue(fn_name: str, vu: int) -> None:
        rid = f"r{rid_seq[0]:08d}"
        rid_seq[0] += 1
        counters["issued"] += 1
        ctx = RequestCtx(request_id=rid, function=fn_name,
                         issued_ms=kernel.now_ms, vu_id=vu)
        if not cp.authenticate(scenario.auth_token):
            handle_record(InvocationRecord(
                request_id=rid, function=fn_name, issued_at_s=kernel.now_s,
                started_at_s=kernel.now_s, completed_at_s=kernel.now_s,
                platform_id="-", node_id="-", cold_start=False,
                outcome="rejected", response_time_s=0.0), ctx)
            return
        cp.dispatch(ctx)

    # injections are armed first so that at equal timestamps the environment
    # change lands before the requests that observe it
    apply_injections(kernel, cp, sims, scenario)

    for name in scenario.functions:
        gen = ClosedLoopLoadGen(kernel, name, scenario.vus, scenario.duration_s,
                                scenario.sleep_s, issue)
        loadgens[name] = gen
        gen.start()

    # ----------------------------------------------------------- tick chain
    def tick(k: int) -> None:
        boundary = k * interval
        closed = k - 1
        for pid, sim in sims.items():
            monitor.sample_infra(pid, boundary,
                                 cpu_util_frac=sim.cpu_util(),
                                 mem_util_frac=sim.mem_util(),
                                 replicas=sim.replica_count(),
                                 memory_allocated_mib=sim.memory_allocated_mib())
            sim.autoscale_and_reclaim()
            for nid in sim.node_ids:
                power = sim.power_at(nid)
                if power is not None:
                    power_rows.append((f"{pid}/{nid}", kernel.now_ms, power))
        if data_plane is not None and scenario.data.migration.enabled:
            for oid in list(objects):
                for pid in sims:
                    if data_plane.should_migrate(oid, pid, closed):
                        data_plane.migrate(oid, pid)
        if scenario.hints_enabled:
            hints = models.prewarm_hints(
                kernel.now_s, lambda f, p: sims[p].warm_count(f))
            for (fn_name, pid), n in hints.items():
                if not sims[pid].failed:
                    sims[pid].start_background_replica(fn_name, n)
        else:
            hints = {}
        if kb_run is not None:
            owner = ({oid: data_plane.owner_platform(oid) for oid in sorted(objects)}
                     if data_plane is not None else None)
            kb_run.append("model_snapshot", models.snapshot(closed, hints, owner),
                          window_index=closed)
        in_flight = sum(sim.in_flight for sim in sims.values())
        balance = counters["ok"] + counters["rejected"] + counters["failed"] + in_flight
        if counters["issued"] != balance:
            raise InvariantError(
                f"request conservation broken at t={boundary}s: "
                f"issued={counters['issued']} accounted={balance}")
        if boundary < collection:
            kernel.schedule((k + 1) * interval, "tick", lambda: tick(k + 1))

    kernel.schedule(interval, "tick", lambda: tick(1))

    # -------------------------------------------------------------- execute
    kernel.run_until(collection)

    # ------------------------------------------------------------- wrap up
    in_flight_end = sum(sim.in_flight for sim in sims.values())
    platform_summary = {}
    for pid, sim in sims.items():
        completed = sum(1 for r in records if r.platform_id == pid and r.outcome == "ok")
        rejected = sum(1 for r in records if r.platform_id == pid and r.outcome == "rejected")
        platform_summary[pid] = {
            "requests_completed": completed,
            "requests_rejected": rejected,
            "cold_starts": cold_starts[pid],
            "overall_p90_s": monitor.overall_p90(pid),
            "throughput_rps": completed / scenario.duration_s,
            "energy_j": sim.energy(0.0, collection),
        }
    summary = {
        "test_name": scenario.test_name,
        "seed": seed,
        "policy": scenario.policy.name,
        "duration_s": scenario.duration_s,
        "collection_duration_s": collection,
        "issued": counters["issued"],
        "completed": counters["ok"],
        "rejected": counters["rejected"],
        "failed": counters["failed"],
        "in_flight_end": in_flight_end,
        "auth_denied": cp.auth_denied,
        "conservation_ok": counters["issued"] == (
            counters["ok"] + counters["rejected"] + counters["failed"] + in_flight_end),
        "platforms": platform_summary,
    }

    if kb_run is not None:
        for pid in sims:
            for w in monitor.report_series(pid, collection):
                kb_run.append("metric_series", w.row(), window_index=w.window_index)
        for (fn_name, pid), bucket in sorted(per_target.items()):
            energies = bucket["energy"]
            kb_run.append("benchmark_result", {
                "function": fn_name,
                "platform": pid,
                "p90_s": p90(bucket["responses"]),
                "requests": len(bucket["responses"]),
                "energy_per_invocation_j": (math.fsum(energies) / len(energies)
                                            if energies else None),
                "data_objects": [o.object_id
                                 for o in functions[fn_name].profile.data_objects],
            })
        kb_run.close()

    result = RunResult(
        scenario=scenario, seed=seed, summary=summary, monitor=monitor,
        platforms=sims, models=models, records=records, decisions=decisions,
        power_rows=power_rows, data_events=data_events, data_plane=data_plane,
        trace=kernel.trace, out_dir=out_path,
    )
    if out_path is not None:
        from .report import write_run_artifacts
        write_run_artifacts(result, out_path)
    return result
