"""Deterministic simulation of a function delivery network: a control plane
scheduling FaaS invocations across heterogeneous target platforms, with
behavioral models, data placement and energy accounting."""

from .behavior import BehaviorModels
from .dataplane import DataPlane
from .errors import FdnError, InvariantError, SchedulingError, ValidationError
from .kernel import SimKernel, derive_rng, quantize_ms
from .knowledge import KnowledgeBase, annotate_deployment
from .model import (
    Catalog,
    DataConfig,
    FunctionSpec,
    InvocationRecord,
    NodeSpec,
    PolicySpec,
    ScenarioConfig,
    StoreSpec,
    TargetPlatform,
    WorkloadProfile,
    parse_catalog,
    parse_scenario,
    serialize_catalog,
    serialize_scenario,
)
from .monitoring import METRIC_COLUMNS, Monitor, nearest_rank, p90
from .platforms import PlatformSim, RequestCtx
from .report import compare_runs, write_run_artifacts
from .runner import RunResult, run_scenario
from .scheduler import ControlPlane, build_policy, list_policies, rank_platforms

__version__ = "0.1.0"

__all__ = [
    "BehaviorModels", "Catalog", "ControlPlane", "DataConfig", "DataPlane",
    "FdnError", "FunctionSpec", "InvariantError", "InvocationRecord",
    "KnowledgeBase", "METRIC_COLUMNS", "Monitor", "NodeSpec", "PlatformSim",
    "PolicySpec", "RequestCtx", "RunResult", "ScenarioConfig", "SchedulingError",
    "SimKernel", "StoreSpec", "TargetPlatform", "ValidationError",
    "WorkloadProfile", "annotate_deployment", "build_policy", "compare_runs",
    "derive_rng", "list_policies", "nearest_rank", "p90", "parse_catalog",
    "parse_scenario", "quantize_ms", "rank_platforms", "run_scenario",
    "serialize_catalog", "serialize_scenario", "write_run_artifacts",
    "__version__",
]
