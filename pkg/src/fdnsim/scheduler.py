"""Control plane: platform ranking, scheduling policies, failover.

Platforms are ranked once per run from reference benchmark throughput
(descending, ties broken by id). Each incoming request is mapped to a target
platform by the active policy, then to a node by that platform's sidecar.
When a platform fails, its in-flight requests are re-issued exactly once to
the remaining platforms; recovery re-includes it from the next decision on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ValidationError
from .kernel import SimKernel
from .model import InvocationRecord, PolicySpec
from .platforms import PlatformSim, RequestCtx
from .sidecar import Sidecar


@dataclass(frozen=True)
class PlatformRank:
    platform_id: str
    throughput_rps: float
    rank: int  # 1 = best


@dataclass(frozen=True)
class SchedulingDecision:
    t_ms: int
    request_id: str
    policy: str
    platform_id: str
    node_id: str
    rationale: str


def rank_platforms(benchmarks: Mapping[str, float]) -> list[PlatformRank]:
    """Descending by measured throughput; ties resolved lexicographically."""
    ordered = sorted(benchmarks.items(), key=lambda kv: (-kv[1], kv[0]))
    return [PlatformRank(pid, rps, i + 1) for i, (pid, rps) in enumerate(ordered)]


# ----------------------------------------------------------------- policies

class Policy:
    name = "policy"

    def params(self) -> dict:
        return {}

    def choose(self, fn: str, candidates: list[str], cp: "ControlPlane") -> tuple[str, str]:
        raise NotImplementedError


class RankedBest(Policy):
    name = "ranked-best"

    def choose(self, fn, candidates, cp):
        return candidates[0], "rank"


class UtilizationAware(Policy):
    name = "utilization-aware"

    def __init__(self, cpu_cutoff_frac: float = 0.9):
        if not 0 < cpu_cutoff_frac <= 1:
            raise ValidationError("cpu_cutoff_frac must be in (0, 1]")
        self.cpu_cutoff_frac = cpu_cutoff_frac

    def params(self):
        return {"cpu_cutoff_frac": self.cpu_cutoff_frac}

    def choose(self, fn, candidates, cp):
        for pid in candidates:
            sim = cp.platforms[pid]
            if sim.cpu_util() > self.cpu_cutoff_frac:
                continue
            if not sim.has_warm(fn) and not sim.space_nodes(fn):
                continue
            return pid, "headroom"
        return candidates[0], "degraded"


class RoundRobinCollab(Policy):
    name = "round-robin-collab"

    def __init__(self, platforms: list[str]):
        if not platforms:
            raise ValidationError("round-robin-collab needs a platform list")
        self.platforms = list(platforms)
        self._cursor: dict[str, int] = {}

    def params(self):
        return {"platforms": list(self.platforms)}

    def choose(self, fn, candidates, cp):
        available = set(candidates)
        cursor = self._cursor.get(fn, 0)
        for _ in range(len(self.platforms)):
            pid = self.platforms[cursor % len(self.platforms)]
            cursor += 1
            if pid in available:
                self._cursor[fn] = cursor
                return pid, "round-robin"
        self._cursor[fn] = cursor
        return candidates[0], "fallback"


class _Swrr:
    """Smooth weighted round robin: every contiguous run of sum(weights)
    decisions hands each platform exactly its weight."""

    def __init__(self, weights: list[tuple[str, int]]):
        self.weights = weights
        self.total = sum(w for _, w in weights)
        self.current = {pid: 0 for pid, _ in weights}

    def next(self) -> str:
        best = None
        for pid, w in self.weights:
            self.current[pid] += w
            if best is None or self.current[pid] > self.current[best]:
                best = pid
        self.current[best] -= self.total
        return best


class WeightedCollab(Policy):
    name = "weighted-collab"

    def __init__(self, weights: Mapping[str, int]):
        if not weights:
            raise ValidationError("weighted-collab needs non-empty weights")
        for pid, w in weights.items():
            if not isinstance(w, int) or isinstance(w, bool) or w < 1:
                raise ValidationError(f"weight for {pid!r} must be a positive integer")
        self.weights = dict(weights)
        self._states: dict[tuple[str, tuple[str, ...]], _Swrr] = {}

    def params(self):
        return {"weights": dict(self.weights)}

    def choose(self, fn, candidates, cp):
        available = tuple(pid for pid in self.weights if pid in set(candidates))
        if not available:
            return candidates[0], "fallback"
        key = (fn, available)
        state = self._states.get(key)
        if state is None:
            state = _Swrr([(pid, self.weights[pid]) for pid in available])
            self._states[key] = state
        return state.next(), "weighted"


class DataLocality(Policy):
    name = "data-locality"

    def choose(self, fn, candidates, cp):
        if cp.data_plane is None:
            return candidates[0], "no-data"
        objects = cp.function_objects(fn)
        if not objects:
            return candidates[0], "no-data"
        best, best_cost = None, math.inf
        for pid in candidates:  # candidates come rank-ordered, first win on ties
            cost = sum(cp.data_plane.predicted_latency(o.object_id, pid) for o in objects)
            if cost < best_cost:
                best, best_cost = pid, cost
        if best is None:
            return candidates[0], "fallback"
        return best, "data-locality"


class EnergyAware(Policy):
    name = "energy-aware"

    def __init__(self, slo_p90_s: float | None = None):
        if slo_p90_s is not None and slo_p90_s <= 0:
            raise ValidationError("energy-aware slo must be > 0")
        self.slo_p90_s = slo_p90_s

    def params(self):
        return {"slo": self.slo_p90_s}

    def choose(self, fn, candidates, cp):
        slo = self.slo_p90_s if self.slo_p90_s is not None else cp.slo_for(fn)
        if slo is None:
            raise ValidationError(f"energy-aware: no SLO configured for function {fn!r}")
        rate = cp.offered_rate(fn)
        predicted = {pid: cp.models.predict_p90(fn, cp.platforms[pid], rate)
                     for pid in candidates}
        eligible = [pid for pid in candidates if predicted[pid] <= slo]
        if eligible:
            def energy_key(pid):
                e = cp.models.energy_estimate(fn, pid)
                return (e if e is not None else math.inf, candidates.index(pid))
            return min(eligible, key=energy_key), "slo-met"
        return min(candidates, key=lambda pid: (predicted[pid], candidates.index(pid))), "slo-miss"


POLICY_DOC = [
    ("ranked-best", {}, "highest benchmark rank that is up"),
    ("utilization-aware", {"cpu_cutoff_frac": 0.9},
     "skip platforms above the cpu cutoff or out of replica memory"),
    ("round-robin-collab", {"platforms": "[ids]"}, "cycle platforms per function"),
    ("weighted-collab", {"weights": "{id: int}"},
     "smooth weighted round robin, exact split per weight window"),
    ("data-locality", {}, "minimize predicted object access latency"),
    ("energy-aware", {"slo": "seconds"},
     "cheapest energy among platforms predicted to meet the SLO"),
]


def list_policies() -> list[dict]:
    return [{"name": n, "params": p, "description": d} for n, p, d in POLICY_DOC]


def build_policy(spec: PolicySpec, scenario_platforms: list[str]) -> Policy:
    params = dict(spec.params)
    if spec.name == "ranked-best":
        return RankedBest()
    if spec.name == "utilization-aware":
        return UtilizationAware(params.get("cpu_cutoff_frac", 0.9))
    if spec.name == "round-robin-collab":
        return RoundRobinCollab(params.get("platforms", list(scenario_platforms)))
    if spec.name == "weighted-collab":
        weights = params.get("weights")
        if not weights:
            raise ValidationError("weighted-collab requires a weights mapping")
        return WeightedCollab(weights)
    if spec.name == "data-locality":
        return DataLocality()
    if spec.name == "energy-aware":
        return EnergyAware(params.get("slo", params.get("slo_p90_s")))
    names = ", ".join(n for n, _, _ in POLICY_DOC)
    raise ValidationError(f"unknown policy {spec.name!r} (expected one of: {names})")


# ------------------------------------------------------------- control plane

class ControlPlane:
    def __init__(self, kernel: SimKernel, platforms: dict[str, PlatformSim],
                 policy: Policy, ranks: list[PlatformRank],
                 models, data_plane=None, auth_token: str | None = None,
                 slo: Mapping[str, float] | None = None,
                 on_decision=None, on_record=None):
        self.kernel = kernel
        self.platforms = platforms
        self.policy = policy
        self.ranks = ranks
        self.rank_order = [r.platform_id for r in ranks if r.platform_id in platforms]
        for pid in platforms:
            if pid not in self.rank_order:
                self.rank_order.append(pid)  # unbenchmarked platforms rank last
        self.models = models
        self.data_plane = data_plane
        self.auth_token = auth_token
        self.slo = dict(slo or {})
        self.sidecars = {pid: Sidecar(sim) for pid, sim in platforms.items()}
        self.on_decision = on_decision
        self.on_record = on_record
        self.auth_denied = 0
        self.decisions = 0

    # -------------------------------------------------------------- helpers

    def authenticate(self, token: str | None) -> bool:
        if self.auth_token is None:
            return True
        if token == self.auth_token:
            return True
        self.auth_denied += 1
        return False

    def slo_for(self, fn: str) -> float | None:
        return self.slo.get(fn)

    def offered_rate(self, fn: str) -> float:
        """Issue rate over the last closed window, summed across platforms."""
        now = self.kernel.now_s
        window = self.models.window_index(now) - 1
        if window < 0:
            return 0.0
        return sum(self.models.window_rate(fn, pid, window) for pid in self.platforms)

    def function_objects(self, fn: str):
        for sim in self.platforms.values():
            spec = sim.functions.get(fn)
            if spec is not None:
                return spec.profile.data_objects
        return ()

    def candidates(self, fn: str) -> list[str]:
        return [pid for pid in self.rank_order
                if not self.platforms[pid].failed and fn in self.platforms[pid].functions]

    # ------------------------------------------------------------ scheduling

    def schedule(self, ctx: RequestCtx) -> SchedulingDecision | None:
        fn = ctx.function
        cands = self.candidates(fn)
        if not cands:
            return None
        pid, rationale = self.policy.choose(fn, cands, self)
        if ctx.retried:
            rationale = f"retry:{rationale}"
        node = self.sidecars[pid].select_node(fn)
        decision = SchedulingDecision(
            t_ms=self.kernel.now_ms, request_id=ctx.request_id,
            policy=self.policy.name, platform_id=pid, node_id=node,
            rationale=rationale,
        )
        self.decisions += 1
        if self.on_decision is not None:
            self.on_decision(decision)
        return decision

    def dispatch(self, ctx: RequestCtx) -> bool:
        """Schedule and invoke; emits a rejected record when nothing is up."""
        decision = self.schedule(ctx)
        if decision is None:
            self._reject_outage(ctx)
            return False
        self.models.note_invocation(ctx.function, decision.platform_id, self.kernel.now_s)
        self.platforms[decision.platform_id].invoke(ctx, decision.node_id)
        return True

    def _reject_outage(self, ctx: RequestCtx) -> None:
        now = self.kernel.now_s
        rec = InvocationRecord(
            request_id=ctx.request_id, function=ctx.function,
            issued_at_s=ctx.issued_ms / 1000.0, started_at_s=now, completed_at_s=now,
            platform_id=ctx.platform_id or "-", node_id=ctx.node_id or "-",
            cold_start=False, outcome="rejected",
            response_time_s=(self.kernel.now_ms - ctx.issued_ms) / 1000.0,
        )
        if self.on_record is not None:
            self.on_record(rec, ctx)

    # -------------------------------------------------------------- failover

    def fail_platform(self, pid: str) -> int:
        """Mark the platform down and retry its aborted work once elsewhere."""
        sim = self.platforms[pid]
        if sim.failed:
            raise ValidationError(f"platform {pid!r} is already failed")
        aborted = sim.fail()
        retried = 0
        for ctx in aborted:
            if ctx.retried:
                self._fail_terminal(ctx)
                continue
            ctx.retried = True
            retried += 1
            self.dispatch(ctx)
        return retried

    def recover_platform(self, pid: str) -> None:
        sim = self.platforms[pid]
        if not sim.failed:
            raise ValidationError(f"platform {pid!r} is not failed, cannot recover")
        sim.recover()

    def _fail_terminal(self, ctx: RequestCtx) -> None:
        now = self.kernel.now_s
        rec = InvocationRecord(
            request_id=ctx.request_id, function=ctx.function,
            issued_at_s=ctx.issued_ms / 1000.0, started_at_s=now, completed_at_s=now,
            platform_id=ctx.platform_id or "-", node_id=ctx.node_id or "-",
            cold_start=False, outcome="failed",
            response_time_s=(self.kernel.now_ms - ctx.issued_ms) / 1000.0,
        )
        if self.on_record is not None:
            self.on_record(rec, ctx)
