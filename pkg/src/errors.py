"""
Exception hierarchy for hardcore-lab.

Library code raises these; the CLI maps them to exit code 2 with a one-line message.
"""
from typing import Any, Optional


class HardcoreLabError(Exception):
    """Base error for everything raised by the toolkit."""


class GraphError(HardcoreLabError):
    """Graph structure violates the simple undirected graph invariants."""


class EdgeListParseError(GraphError):
    """Malformed edge-list text."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class RejectionsExhaustedError(HardcoreLabError):
    """No simple pairing found within the attempt budget."""


class DomainError(HardcoreLabError):
    """Parameter outside the domain of a formula."""


class LengthMismatchError(HardcoreLabError):
    """Occupancy array length differs from the vertex count."""


class IndependenceError(HardcoreLabError):
    """Occupancy is not an independent set of the graph."""


class NotNeighborError(HardcoreLabError):
    """The given parent vertex is not adjacent to the vertex."""


class BudgetExceededError(HardcoreLabError):
    """An exact computation passed its configured size cap."""


class NonConvergenceError(HardcoreLabError):
    """A fixed-point iteration stopped at max_iter above tolerance."""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


class ZeroEntryError(HardcoreLabError):
    """A field entry that must be strictly positive is zero."""


class DegenerateFactorError(HardcoreLabError):
    """A telescoping factor estimate fell below the floor."""


class ConfigError(HardcoreLabError):
    """Experiment configuration does not match the schema."""
