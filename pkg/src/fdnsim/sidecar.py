"""Per-platform scheduling sidecar: node selection and local/delegate calls."""

from __future__ import annotations

from .platforms import PlatformSim


class Sidecar:
    def __init__(self, platform: PlatformSim):
        self.platform = platform

    def select_node(self, fn_name: str) -> str:
        """Warm replica first (lowest contention), then the node with the most
        free memory that fits a replica, then the least-loaded queue. Ties go
        to the lowest node_id."""
        warm = self.platform.warm_nodes(fn_name)
        if warm:
            warm.sort(key=lambda nc: (nc[1], nc[0]))
            return warm[0][0]
        space = self.platform.space_nodes(fn_name)
        if space:
            space.sort(key=lambda nf: (-nf[1], nf[0]))
            return space[0][0]
        load = self.platform.load_nodes()
        load.sort(key=lambda nqb: (nqb[1], nqb[2], nqb[0]))
        return load[0][0]

    def local_or_delegate(self, fn_name: str, predicted_p90_s: float,
                          local_slo_s: float | None) -> str:
        """Serve here unless the platform lacks capacity or would miss its SLO."""
        if not self.platform.can_host(fn_name):
            return "delegate"
        if local_slo_s is not None and predicted_p90_s > local_slo_s:
            return "delegate"
        return "local"
