"""Exception taxonomy for the nhk package.

Every error raised deliberately by the library derives from NhkError so
callers (and the CLI) can distinguish usage problems from runtime/domain
failures.
"""

from __future__ import annotations


class NhkError(Exception):
    """Base class for all nhk errors."""


class ParseError(NhkError):
    """Expression text could not be parsed.

    Carries the byte offset of the offending token in ``offset``.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset


class EvalError(NhkError):
    """Singular or out-of-domain evaluation (division by near-zero,
    sqrt/ln of a non-positive value, tan/sec at a pole, unbound name).

    ``offset`` locates the offending sub-expression when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            super().__init__(f"{message} (at offset {offset})")
        else:
            super().__init__(message)
        self.message = message
        self.offset = offset


class LoadError(NhkError):
    """System definition rejected.  ``violations`` lists every problem
    found, not just the first."""

    def __init__(self, violations: list[str]):
        super().__init__(
            "invalid system definition:\n  - " + "\n  - ".join(violations)
        )
        self.violations = list(violations)


class GeometryError(NhkError):
    """A pointwise geometric invariant failed (metric not positive
    definite, constraint rank deficiency, frame singularity,
    adapted-block mismatch, degenerate restricted 2-form)."""


class DomainError(GeometryError):
    """A queried point lies outside the system's declared coordinate
    domain."""


class ParameterError(NhkError):
    """Parameters outside their validity region (e.g. non-positive mass
    or inertia)."""


class UnsupportedOperationError(NhkError):
    """Operation not defined for this system (e.g. the adapted-coordinate
    Jacobiator formula on a system without an adapted declaration)."""
