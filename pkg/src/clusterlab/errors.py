"""Exception types shared across clusterlab."""

from __future__ import annotations


class ClusterLabError(Exception):
    """Base class for every error raised by this package."""


class ParseError(ClusterLabError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class SchemaVersionError(ClusterLabError):
    pass


class OpenLoop(ClusterLabError):
    pass


class InvalidSpec(ClusterLabError):
    pass


class DegenerateTriangle(ClusterLabError):
    pass


class DomainError(ClusterLabError, ValueError):
    pass


class LineSearchFailed(ClusterLabError):
    """No acceptable step.  ``at_noise_floor`` is set when the predicted
    decrease was already below the rounding noise of the perimeter, i.e. the
    iterate is stationary to working precision."""

    def __init__(self, message: str, at_noise_floor: bool = False, grad_norm: float | None = None):
        super().__init__(message)
        self.at_noise_floor = at_noise_floor
        self.grad_norm = grad_norm


class SingularConstraints(ClusterLabError):
    pass


class RestoreFailed(ClusterLabError):
    pass


class PlanarityBroken(ClusterLabError):
    pass


class LabelInconsistency(ClusterLabError):
    pass


class MissingCertificate(ClusterLabError):
    pass


class NoEligibleArc(ClusterLabError):
    pass


class InsufficientSamples(ClusterLabError):
    pass
