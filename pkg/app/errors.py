from typing import Optional


class SimulatorError(Exception):
    """Base class for all simulator errors."""


class QuantizationError(SimulatorError, ValueError):
    """Raised when a value cannot be quantized (e.g. NaN or inf)."""


class CrossbarIndexError(SimulatorError, IndexError):
    """Raised when a crossbar row/column access falls outside the array."""


class ShapeMismatchError(SimulatorError, ValueError):
    """Raised when vector or matrix shapes disagree."""


class DecodeError(SimulatorError, ValueError):
    """Raised when an encoded CM_* instruction word cannot be decoded."""


class TraceParseError(DecodeError):
    """Raised when a trace line does not match the trace grammar."""

    def __init__(self, message: str, line_no: Optional[int] = None) -> None:
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class MachineFault(SimulatorError, RuntimeError):
    """Raised when an instruction cannot be dispatched (e.g. no tile mapped to the core)."""


class DeadlockError(SimulatorError, RuntimeError):
    """Raised when no core can make progress while some are still blocked."""

    def __init__(self, blocked: dict[int, str]) -> None:
        self.blocked = dict(blocked)
        listing = ", ".join(f"core {core} on {channel}" for core, channel in sorted(blocked.items()))
        super().__init__(f"deadlock: {listing}")


class InconsistentStatsError(SimulatorError, ValueError):
    """Raised when statistics violate cycle conservation."""


class UsageError(SimulatorError, ValueError):
    """Raised for invalid experiment specifications or CLI usage."""


class MissingBaselineError(SimulatorError, KeyError):
    """Raised when a sweep group has no digital baseline run."""

    def __init__(self, group: str) -> None:
        self.group = group
        super().__init__(f"no digital baseline for group {group}")

    def __str__(self) -> str:
        return self.args[0]
