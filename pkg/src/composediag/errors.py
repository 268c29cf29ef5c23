"""Exception types shared across the toolchain."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceLocation:
    """1-based position in an input file or stream."""

    line: int
    column: int
    path: str | None = None

    def __str__(self) -> str:
        prefix = f"{self.path}:" if self.path else ""
        return f"{prefix}{self.line}:{self.column}"


class ComposeDiagError(Exception):
    """Base class for all toolchain errors."""

    def __init__(self, message: str, location: SourceLocation | None = None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class DescriptorSyntaxError(ComposeDiagError):
    """Malformed compose markup (unparseable YAML)."""


class StructureError(ComposeDiagError):
    """Parseable markup with an illegal shape (duplicate key, bad port string, ...)."""


class CycleError(ComposeDiagError):
    """Startup ordering requested on a cyclic dependency graph."""

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        path = " -> ".join(self.cycle + self.cycle[:1])
        super().__init__(f"dependency cycle: {path}")


class AmbiguityError(ComposeDiagError):
    """A rendering triple outside the role table; the diagram cannot be interpreted uniquely."""


class DacSyntaxError(ComposeDiagError):
    """Diagram-script text violating the emitted grammar."""


class UnknownConstructError(ComposeDiagError):
    """Diagram-script construct we refuse to guess a meaning for."""


class ShapeError(ComposeDiagError):
    """Diagram not in the shape the reverse transform requires."""


class PreconditionError(ComposeDiagError):
    """Operation invoked on input that fails its documented precondition."""
