"""Simulation of one FaaS target platform: nodes, replicas, queues, power.

Replica lifecycle: starting -> (prewarm | warm) -> busy -> warm -> reclaimed.
One replica serves one request at a time. A request finding no warm replica
either triggers a replica start (full cold_start_s, or half when a prewarm
replica of the right runtime is consumed), queues FIFO per function on the
node, or is rejected when the platform-wide concurrency limit is hit.

CPU is processor-shared: service time = base_service_s * contention factor,
factor = max(1, demand / cores) with demand = sum of busy replicas'
cpu_bound_fraction + background cpu fraction * cores. The factor is sampled
once at service start.

Per-node replica memory is capped by min(invoker_memory_mib, node memory -
background memory). Node power is power_idle + (power_busy - power_idle) * u
with u = min(1, demand / cores); energy integrates the step function of power
changes, never per-tick samples, so constant-power stretches contribute
exactly power * duration. Public platforms report power and energy as
unavailable (None).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .errors import InvariantError, ValidationError
from .kernel import Event, SimKernel, quantize_ms
from .model import FunctionSpec, InvocationRecord, TargetPlatform, validate_deployment


@dataclass
class RequestCtx:
    request_id: str
    function: str
    issued_ms: int
    vu_id: int = -1
    retried: bool = False
    platform_id: str = ""
    node_id: str = ""
    queued_node: str | None = None
    pending_event: Event | None = None
    replica: "_Replica | None" = None


class _Replica:
    __slots__ = ("rid", "function", "runtime", "node_id", "state", "memory_mib",
                 "cpu_frac", "last_active_ms")

    def __init__(self, rid, function, runtime, node_id, state, memory_mib, cpu_frac):
        self.rid = rid
        self.function = function
        self.runtime = runtime
        self.node_id = node_id
        self.state = state  # starting | prewarm | warm | busy
        self.memory_mib = memory_mib
        self.cpu_frac = cpu_frac
        self.last_active_ms = 0


class _Node:
    def __init__(self, spec):
        self.spec = spec
        self.replicas: dict[str, _Replica] = {}
        self.queues: dict[str, deque[RequestCtx]] = {}
        self.bg_cpu = 0.0
        self.bg_mem_mib = 0
        self.power_log: list[tuple[int, float]] = []

    def replica_mem(self) -> int:
        return sum(r.memory_mib for r in self.replicas.values())

    def replica_capacity_mib(self, invoker_mib: int) -> int:
        return min(invoker_mib, self.spec.memory_mib - self.bg_mem_mib)

    def free_mib(self, invoker_mib: int) -> int:
        return self.replica_capacity_mib(invoker_mib) - self.replica_mem()

    def demand(self) -> float:
        d = sum(r.cpu_frac for r in self.replicas.values() if r.state == "busy")
        return d + self.bg_cpu * self.spec.cores

    def utilization(self) -> float:
        return min(1.0, self.demand() / self.spec.cores)

    def queue_len(self) -> int:
        return sum(len(q) for q in self.queues.values())

    def busy_count(self) -> int:
        return sum(1 for r in self.replicas.values() if r.state == "busy")


class PlatformSim:
    def __init__(self, spec: TargetPlatform, kernel: SimKernel, on_record):
        self.spec = spec
        self.kernel = kernel
        self.on_record = on_record  # callback(record, ctx)
        self.data_plane = None  # wired by the runner when the scenario has stores
        self.failed = False
        self.in_flight = 0  # queued + starting + serving
        self._functions: dict[str, FunctionSpec] = {}
        self._nodes: dict[str, _Node] = {n.node_id: _Node(n) for n in spec.nodes}
        self._pending: dict[str, RequestCtx] = {}  # requests holding a timer
        self._rid_seq = 0
        for node in self._nodes.values():
            self._log_power(node)

    # ------------------------------------------------------------ deployment

    def deploy(self, fn: FunctionSpec, prewarm_count: int = 0) -> None:
        validate_deployment(fn, self.spec)
        self._functions[fn.name] = fn
        for node in self._nodes.values():
            self._ensure_prewarm(node)
        # initial warm replicas, round-robin over nodes, capped by capacity
        node_cycle = list(self._nodes.values())
        remaining, i, misses = prewarm_count, 0, 0
        while remaining > 0 and misses < len(node_cycle):
            node = node_cycle[i % len(node_cycle)]
            i += 1
            if self._create_replica(node, fn, "warm") is not None:
                remaining -= 1
                misses = 0
            else:
                misses += 1

    @property
    def functions(self) -> dict[str, FunctionSpec]:
        return self._functions

    @property
    def node_ids(self) -> list[str]:
        return list(self._nodes.keys())

    # ------------------------------------------------------------ invocation

    def invoke(self, ctx: RequestCtx, node_id: str) -> None:
        fn = self._functions.get(ctx.function)
        if fn is None:
            raise ValidationError(f"{self.spec.platform_id}: function {ctx.function!r} not deployed")
        if self.failed:
            self._reject(ctx, node_id)
            return
        if self.in_flight + 1 > self.spec.max_concurrent_invocations:
            self._reject(ctx, node_id)
            return
        self.in_flight += 1
        ctx.platform_id = self.spec.platform_id
        ctx.node_id = node_id
        node = self._nodes[node_id]
        warm = self._find_warm(node, fn.name)
        if warm is not None:
            self._start_service(node, warm, ctx, cold=False)
            return
        started = self._begin_replica_start(node, fn, ctx)
        if not started:
            node.queues.setdefault(fn.name, deque()).append(ctx)
            ctx.queued_node = node_id

    def _reject(self, ctx: RequestCtx, node_id: str) -> None:
        now = self.kernel.now_s
        rec = InvocationRecord(
            request_id=ctx.request_id, function=ctx.function,
            issued_at_s=ctx.issued_ms / 1000.0, started_at_s=now, completed_at_s=now,
            platform_id=self.spec.platform_id, node_id=node_id,
            cold_start=False, outcome="rejected",
            response_time_s=(self.kernel.now_ms - ctx.issued_ms) / 1000.0,
        )
        self.on_record(rec, ctx)

    def _find_warm(self, node: _Node, fn_name: str) -> _Replica | None:
        for r in node.replicas.values():
            if r.state == "warm" and r.function == fn_name:
                return r
        return None

    def _begin_replica_start(self, node: _Node, fn: FunctionSpec, ctx: RequestCtx) -> bool:
        """Start a replica for ctx: prewarm conversion at half cost, else cold."""
        r = None
        startup = self.spec.cold_start_s
        if self.spec.faas_flavor == "warmpool":
            for cand in node.replicas.values():
                if cand.state == "prewarm" and cand.runtime == fn.runtime:
                    extra = fn.replica_memory_mib - cand.memory_mib
                    if extra <= node.free_mib(self.spec.invoker_memory_mib):
                        r = cand
                        r.function = fn.name
                        r.memory_mib = fn.replica_memory_mib
                        r.cpu_frac = fn.profile.cpu_bound_fraction
                        r.state = "starting"
                        startup = self.spec.cold_start_s / 2.0
                    break
        if r is None:
            r = self._create_replica(node, fn, "starting")
            if r is None:
                return False
        ctx.replica = r
        ctx.pending_event = self.kernel.after(
            startup, "replica-ready",
            lambda: self._start_service(node, r, ctx, cold=True),
        )
        self._pending[ctx.request_id] = ctx
        return True

    def _create_replica(self, node: _Node, fn: FunctionSpec, state: str) -> _Replica | None:
        if fn.replica_memory_mib > node.free_mib(self.spec.invoker_memory_mib):
            return None
        self._rid_seq += 1
        rid = f"{self.spec.platform_id}/{node.spec.node_id}/r{self._rid_seq}"
        r = _Replica(rid, fn.name, fn.runtime, node.spec.node_id, state,
                     fn.replica_memory_mib, fn.profile.cpu_bound_fraction)
        r.last_active_ms = self.kernel.now_ms
        node.replicas[rid] = r
        self._check_memory(node)
        return r

    def _ensure_prewarm(self, node: _Node) -> None:
        if self.spec.faas_flavor != "warmpool":
            return
        runtimes: dict[str, int] = {}
        for fn in self._functions.values():
            runtimes[fn.runtime] = max(runtimes.get(fn.runtime, 0), fn.replica_memory_mib)
        for runtime, size in runtimes.items():
            if any(r.state == "prewarm" and r.runtime == runtime for r in node.replicas.values()):
                continue
            if size > node.free_mib(self.spec.invoker_memory_mib):
                continue
            self._rid_seq += 1
            rid = f"{self.spec.platform_id}/{node.spec.node_id}/p{self._rid_seq}"
            r = _Replica(rid, "", runtime, node.spec.node_id, "prewarm", size, 0.0)
            r.last_active_ms = self.kernel.now_ms
            node.replicas[rid] = r
            self._check_memory(node)

    def _start_service(self, node: _Node, r: _Replica, ctx: RequestCtx, cold: bool) -> None:
        fn = self._functions[ctx.function]
        r.state = "busy"
        r.last_active_ms = self.kernel.now_ms
        self._log_power(node)
        started_ms = self.kernel.now_ms
        data_latency = 0.0
        if self.data_plane is not None and fn.profile.data_objects:
            for obj in fn.profile.data_objects:
                for _ in range(obj.reads_per_invocation):
                    data_latency += self.data_plane.access(
                        fn.name, obj.object_id, self.spec.platform_id, "read")
                for _ in range(obj.writes_per_invocation):
                    data_latency += self.data_plane.access(
                        fn.name, obj.object_id, self.spec.platform_id, "write")
        base = fn.profile.base_service_s[self.spec.platform_id]
        service_s = base * self.contention_factor(node.spec.node_id) + data_latency
        ctx.replica = r
        ctx.pending_event = self.kernel.after(
            service_s, "invocation-complete",
            lambda: self._complete(node, r, ctx, cold, started_ms),
        )
        self._pending[ctx.request_id] = ctx

    def _complete(self, node: _Node, r: _Replica, ctx: RequestCtx, cold: bool, started_ms: int) -> None:
        r.state = "warm"
        r.last_active_ms = self.kernel.now_ms
        self.in_flight -= 1
        self._log_power(node)
        now_ms = self.kernel.now_ms
        rec = InvocationRecord(
            request_id=ctx.request_id, function=ctx.function,
            issued_at_s=ctx.issued_ms / 1000.0, started_at_s=started_ms / 1000.0,
            completed_at_s=now_ms / 1000.0,
            platform_id=self.spec.platform_id, node_id=node.spec.node_id,
            cold_start=cold, outcome="ok",
            response_time_s=(now_ms - ctx.issued_ms) / 1000.0,
        )
        ctx.pending_event = None
        self._pending.pop(ctx.request_id, None)
        self.on_record(rec, ctx)
        queue = node.queues.get(ctx.function)
        if queue and r.state == "warm":
            nxt = queue.popleft()
            nxt.queued_node = None
            self._start_service(node, r, nxt, cold=False)

    # ------------------------------------------------------------ capacity ops

    def autoscale_and_reclaim(self) -> int:
        """Reclaim idle warm replicas, then grow: queued work first, then the
        prewarm pool. Returns the number of reclaimed replicas."""
        reclaimed = 0
        if self.failed:
            return 0
        inactivity_ms = quantize_ms(self.spec.inactivity_duration_s)
        for node in self._nodes.values():
            if self.spec.scale_to_zero:
                for rid in [rid for rid, r in node.replicas.items()
                            if r.state == "warm"
                            and self.kernel.now_ms - r.last_active_ms > inactivity_ms]:
                    del node.replicas[rid]
                    reclaimed += 1
            self._drain_queue(node)
            self._ensure_prewarm(node)
        return reclaimed

    def _drain_queue(self, node: _Node) -> None:
        for fn_name in self._functions:
            queue = node.queues.get(fn_name)
            while queue:
                warm = self._find_warm(node, fn_name)
                if warm is not None:
                    ctx = queue.popleft()
                    ctx.queued_node = None
                    self._start_service(node, warm, ctx, cold=False)
                    continue
                ctx = queue[0]
                if self._begin_replica_start(node, self._functions[fn_name], ctx):
                    queue.popleft()
                    ctx.queued_node = None
                else:
                    break

    def apply_background_load(self, cpu_frac: float, mem_frac: float,
                              from_s: float, to_s: float) -> None:
        if not 0 <= cpu_frac <= 1 or not 0 <= mem_frac <= 1:
            raise ValidationError("background load fractions must be in [0, 1]")
        if to_s <= from_s:
            raise ValidationError("background load window must have to_s > from_s")
        self.kernel.schedule(from_s, "background-set",
                             lambda: self._set_background(cpu_frac, mem_frac))
        self.kernel.schedule(to_s, "background-clear",
                             lambda: self._set_background(0.0, 0.0))

    def _set_background(self, cpu_frac: float, mem_frac: float) -> None:
        for node in self._nodes.values():
            bg_mem = int(math.floor(mem_frac * node.spec.memory_mib))
            # memory pressure evicts idle replicas first (prewarm, then the
            # longest-idle warm ones); serving replicas are untouchable
            while node.replica_mem() + bg_mem > node.spec.memory_mib:
                idle = [r for r in node.replicas.values()
                        if r.state in ("prewarm", "warm")]
                if not idle:
                    break
                idle.sort(key=lambda r: (r.state != "prewarm", r.last_active_ms, r.rid))
                del node.replicas[idle[0].rid]
            if node.replica_mem() + bg_mem > node.spec.memory_mib:
                raise InvariantError(
                    f"{self.spec.platform_id}/{node.spec.node_id}: background memory load "
                    f"of {bg_mem} MiB overcommits serving replicas"
                )
            node.bg_cpu = cpu_frac
            node.bg_mem_mib = bg_mem
            self._log_power(node)
        if cpu_frac == 0.0 and mem_frac == 0.0:
            for node in self._nodes.values():
                self._drain_queue(node)
                self._ensure_prewarm(node)

    def start_background_replica(self, fn_name: str, count: int = 1) -> int:
        """Warm replicas prepared off the request path (prewarm hints)."""
        fn = self._functions[fn_name]
        started = 0
        for _ in range(count):
            candidates = [n for n in self._nodes.values()
                          if n.free_mib(self.spec.invoker_memory_mib) >= fn.replica_memory_mib]
            if not candidates:
                break
            candidates.sort(key=lambda n: (-n.free_mib(self.spec.invoker_memory_mib),
                                           n.spec.node_id))
            node = candidates[0]
            r = self._create_replica(node, fn, "starting")
            if r is None:
                break

            def ready(node=node, r=r):
                r.state = "warm"
                r.last_active_ms = self.kernel.now_ms
                self._drain_queue(node)

            self.kernel.after(self.spec.cold_start_s, "background-replica-ready", ready)
            started += 1
        return started

    def create_warm_replica(self, fn_name: str, node_id: str | None = None) -> bool:
        fn = self._functions[fn_name]
        nodes = [self._nodes[node_id]] if node_id else list(self._nodes.values())
        for node in nodes:
            r = self._create_replica(node, fn, "warm")
            if r is not None:
                return True
        return False

    # ------------------------------------------------------------ failure

    def fail(self) -> list[RequestCtx]:
        """Whole-platform outage: drop replicas, abort all in-flight work.

        Returns aborted requests (queued, starting and serving alike) so the
        control plane can retry them elsewhere."""
        self.failed = True
        aborted: list[RequestCtx] = []
        for node in self._nodes.values():
            for queue in node.queues.values():
                while queue:
                    ctx = queue.popleft()
                    ctx.queued_node = None
                    aborted.append(ctx)
            node.queues.clear()
            node.replicas.clear()
            self._log_power(node)
        for ctx in self._pending.values():
            if ctx.pending_event is not None:
                self.kernel.cancel(ctx.pending_event)
                ctx.pending_event = None
            ctx.replica = None
            aborted.append(ctx)
        self._pending.clear()
        self.in_flight = 0
        return aborted

    def recover(self) -> None:
        self.failed = False
        for node in self._nodes.values():
            self._ensure_prewarm(node)
            self._log_power(node)

    # ------------------------------------------------------------ introspection

    def contention_factor(self, node_id: str) -> float:
        node = self._nodes[node_id]
        return max(1.0, node.demand() / node.spec.cores)

    def cpu_util(self) -> float:
        nodes = list(self._nodes.values())
        return sum(n.utilization() for n in nodes) / len(nodes)

    def mem_util(self) -> float:
        nodes = list(self._nodes.values())
        return sum((n.replica_mem() + n.bg_mem_mib) / n.spec.memory_mib for n in nodes) / len(nodes)

    def replica_count(self) -> int:
        return sum(len(n.replicas) for n in self._nodes.values())

    def memory_allocated_mib(self) -> int:
        return sum(n.replica_mem() for n in self._nodes.values())

    def has_warm(self, fn_name: str) -> bool:
        return any(self._find_warm(n, fn_name) is not None for n in self._nodes.values())

    def live_replicas(self, fn_name: str) -> int:
        return sum(1 for n in self._nodes.values() for r in n.replicas.values()
                   if r.function == fn_name and r.state in ("starting", "warm", "busy"))

    def warm_count(self, fn_name: str) -> int:
        return sum(1 for n in self._nodes.values() for r in n.replicas.values()
                   if r.function == fn_name and r.state == "warm")

    def serving_capacity(self, fn_name: str) -> int:
        fn = self._functions[fn_name]
        cap = self.live_replicas(fn_name)
        for node in self._nodes.values():
            cap += max(0, node.free_mib(self.spec.invoker_memory_mib)) // fn.replica_memory_mib
        return cap

    def can_host(self, fn_name: str) -> bool:
        fn = self._functions.get(fn_name)
        if fn is None or self.failed:
            return False
        if self.has_warm(fn_name):
            return True
        return any(n.free_mib(self.spec.invoker_memory_mib) >= fn.replica_memory_mib
                   for n in self._nodes.values())

    def warm_nodes(self, fn_name: str) -> list[tuple[str, float]]:
        return [(nid, self.contention_factor(nid)) for nid, n in self._nodes.items()
                if self._find_warm(n, fn_name) is not None]

    def space_nodes(self, fn_name: str) -> list[tuple[str, int]]:
        fn = self._functions[fn_name]
        return [(nid, n.free_mib(self.spec.invoker_memory_mib))
                for nid, n in self._nodes.items()
                if n.free_mib(self.spec.invoker_memory_mib) >= fn.replica_memory_mib]

    def load_nodes(self) -> list[tuple[str, int, int]]:
        return [(nid, n.queue_len(), n.busy_count()) for nid, n in self._nodes.items()]

    def queued(self) -> int:
        return sum(n.queue_len() for n in self._nodes.values())

    # ------------------------------------------------------------ power / energy

    def power_at(self, node_id: str) -> float | None:
        if not self.spec.energy_available:
            return None
        if self.failed:
            return 0.0
        node = self._nodes[node_id]
        spec = node.spec
        return spec.power_idle_w + (spec.power_busy_w - spec.power_idle_w) * node.utilization()

    def _log_power(self, node: _Node) -> None:
        if not self.spec.energy_available:
            return
        spec = node.spec
        if self.failed:
            p = 0.0
        else:
            p = spec.power_idle_w + (spec.power_busy_w - spec.power_idle_w) * node.utilization()
        log = node.power_log
        t = self.kernel.now_ms
        if log and log[-1][0] == t:
            log[-1] = (t, p)
        elif not log or log[-1][1] != p:
            log.append((t, p))

    def energy(self, t0_s: float, t1_s: float) -> float | None:
        """Joules consumed by all nodes over [t0, t1); None when unavailable."""
        if not self.spec.energy_available:
            return None
        a, b = quantize_ms(t0_s), quantize_ms(t1_s)
        if b <= a:
            return 0.0
        per_node = []
        for node in self._nodes.values():
            log = node.power_log
            segments = []
            for i, (t, p) in enumerate(log):
                end = log[i + 1][0] if i + 1 < len(log) else b
                lo, hi = max(t, a), min(end, b)
                if hi > lo and p != 0.0:
                    segments.append(p * ((hi - lo) / 1000.0))
            per_node.append(math.fsum(segments))
        return math.fsum(per_node)

    def _check_memory(self, node: _Node) -> None:
        if node.replica_mem() + node.bg_mem_mib > node.spec.memory_mib:
            raise InvariantError(
                f"{self.spec.platform_id}/{node.spec.node_id}: memory overcommitted "
                f"({node.replica_mem()} + {node.bg_mem_mib} > {node.spec.memory_mib} MiB)"
            )
