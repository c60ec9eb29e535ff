import pytest

from fdnsim.kernel import SimKernel
from fdnsim.model import (
    FunctionSpec,
    NodeSpec,
    TargetPlatform,
    WorkloadProfile,
)


def make_platform(pid="p1", kind="cloud", nodes=None, **kw):
    if nodes is None:
        nodes = [NodeSpec("n0", cores=4, memory_mib=4096,
                          power_idle_w=20.0, power_busy_w=45.0)]
    return TargetPlatform(platform_id=pid, kind=kind, nodes=tuple(nodes), **kw)


def make_function(name="fn", base=None, cpu=1.0, objects=(), memory=256, runtime="python"):
    profile = WorkloadProfile(
        base_service_s=base or {"p1": 1.0},
        cpu_bound_fraction=cpu,
        data_objects=tuple(objects),
    )
    return FunctionSpec(name=name, runtime=runtime, profile=profile,
                        replica_memory_mib=memory)


@pytest.fixture
def kernel():
    return SimKernel(seed=7)
