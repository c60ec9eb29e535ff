"""Fault and load injection: validate a scenario's injection list and arm
the corresponding kernel events (platform outage, recovery, background load)."""

from __future__ import annotations

from .errors import ValidationError
from .model import InjectionSpec, ScenarioConfig


def validate_injections(scenario: ScenarioConfig) -> list[InjectionSpec]:
    horizon = scenario.collection_duration_s
    known = set(scenario.platforms)
    failed_at: dict[str, float] = {}
    for inj in scenario.injections:
        if inj.platform_id not in known:
            raise ValidationError(
                f"injection targets unknown platform {inj.platform_id!r}")
        if inj.at_s > horizon:
            raise ValidationError(
                f"injection at {inj.at_s}s is beyond the collection window ({horizon}s)")
        if inj.kind == "platform_fail":
            failed_at[inj.platform_id] = inj.at_s
        elif inj.kind == "platform_recover":
            if inj.platform_id not in failed_at:
                raise ValidationError(
                    f"recover for {inj.platform_id!r} has no preceding failure")
            if inj.at_s <= failed_at[inj.platform_id]:
                raise ValidationError(
                    f"recover for {inj.platform_id!r} must come after its failure")
            del failed_at[inj.platform_id]
    return list(scenario.injections)


def apply_injections(kernel, control_plane, platforms, scenario: ScenarioConfig) -> None:
    for inj in validate_injections(scenario):
        pid = inj.platform_id
        if inj.kind == "platform_fail":
            kernel.schedule(inj.at_s, "inject-fail",
                            lambda pid=pid: control_plane.fail_platform(pid))
        elif inj.kind == "platform_recover":
            kernel.schedule(inj.at_s, "inject-recover",
                            lambda pid=pid: control_plane.recover_platform(pid))
        elif inj.kind == "background_load":
            until = inj.until_s if inj.until_s is not None else scenario.collection_duration_s
            platforms[pid].apply_background_load(
                inj.cpu_frac, inj.mem_frac, inj.at_s, until)
        else:
            raise ValidationError(f"unknown injection kind {inj.kind!r}")
