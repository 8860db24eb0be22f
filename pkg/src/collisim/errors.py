"""Exception types shared across the package.

Plain ``ValueError`` is used for bad arguments to library functions
(dimension mismatches, out-of-domain parameters).  The classes below
exist so the CLI can map failures to distinct exit codes.
"""


class ConfigError(ValueError):
    """Invalid or incomplete scenario configuration (CLI exit code 2)."""


class NumericError(RuntimeError):
    """Numerical failure during a run (CLI exit code 3)."""


class InvariantViolation(NumericError):
    """A state failed its density-operator invariants mid-run."""
