"""Error types shared across the simulator.

ValidationError maps to CLI exit code 2, InvariantError to exit code 3.
"""


class FdnError(Exception):
    pass


class ValidationError(FdnError):
    """Bad input: malformed catalog/scenario, unknown ids, impossible deployments."""


class SchedulingError(FdnError):
    """Kernel misuse, e.g. scheduling an event in the past."""


class InvariantError(FdnError):
    """A runtime invariant was violated; the run is not trustworthy."""
