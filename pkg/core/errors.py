"""Exception hierarchy shared by every package in the repo."""
from typing import Any, Iterable, Optional


class CircuitError(Exception):
    """Base class for all errors raised by the simulator."""


class ParameterDomainError(CircuitError, ValueError):
    """A parameter lies outside the domain where a formula or model is defined."""


class NumericalError(CircuitError):
    """A numerical routine failed to reach its tolerance."""

    def __init__(self, message: str, residual: Optional[float] = None):
        if residual is not None:
            message = f"{message} (residual={residual:.3e})"
        super().__init__(message)
        self.residual = residual


class StepSizeError(NumericalError):
    """Propagator or integrator defect exceeded its tolerance."""


class ResonanceNotFoundError(NumericalError):
    """No resonance between the requested transitions inside the scan window."""


class ResourceError(CircuitError):
    """Requested Hilbert-space dimension exceeds the configured cap."""


class LabelError(CircuitError, KeyError):
    """One or more bare-state labels could not be resolved in a spectrum."""

    def __init__(self, missing: Iterable[Any], context: str = ""):
        self.missing = tuple(missing)
        names = ", ".join(str(m) for m in self.missing)
        text = f"unresolved state label(s): {names}"
        if context:
            text = f"{context}: {text}"
        super().__init__(text)

    def __str__(self) -> str:
        return self.args[0]


class SweepPointError(CircuitError):
    """Wraps a failure at one sweep point with the axis value attached."""

    def __init__(self, axis_name: str, value: float, cause: Exception):
        super().__init__(f"sweep point {axis_name}={value:.12g} failed: {type(cause).__name__}: {cause}")
        self.axis_name = axis_name
        self.value = value
        self.cause = cause


class ConfigError(CircuitError):
    """Configuration parse or validation failure."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        prefix = []
        if field:
            prefix.append(f"field '{field}'")
        if line is not None:
            prefix.append(f"line {line}")
        if prefix:
            message = f"{', '.join(prefix)}: {message}"
        super().__init__(message)
        self.field = field
        self.line = line
