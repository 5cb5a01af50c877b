"""
Real-valued fields over vertices and oriented edges, with their text dump format.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import DomainError, GraphError
from src.graph.core import Graph

_RANGE_SLACK = 1e-12


def _check_unit_interval(values: np.ndarray, what: str) -> None:
    if values.size and (not np.all(np.isfinite(values)) or values.min() < -_RANGE_SLACK or values.max() > 1 + _RANGE_SLACK):
        raise DomainError(f"{what} entries must lie in [0, 1]")


@dataclass
class VertexField:
    """ω: one value in [0, 1] per vertex."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        _check_unit_interval(self.values, "vertex field")

    @classmethod
    def constant(cls, vertex_count: int, value: float = 1.0) -> "VertexField":
        return cls(np.full(vertex_count, float(value)))

    @classmethod
    def random(cls, vertex_count: int, rng: np.random.Generator) -> "VertexField":
        return cls(rng.random(vertex_count))

    def __len__(self) -> int:
        return int(self.values.size)

    def __getitem__(self, v: int) -> float:
        return float(self.values[v])

    def dump(self) -> str:
        return "".join(f"{v} {float(x)!r}\n" for v, x in enumerate(self.values))

    @classmethod
    def load(cls, text: str, vertex_count: Optional[int] = None) -> "VertexField":
        entries = {}
        for line_number, raw in enumerate(text.splitlines(), start=1):
            parts = raw.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DomainError(f"line {line_number}: expected 'vertex value'")
            entries[int(parts[0])] = float(parts[1])
        n = vertex_count if vertex_count is not None else (max(entries) + 1 if entries else 0)
        values = np.zeros(n)
        if set(entries) != set(range(n)):
            raise DomainError("vertex field dump does not cover every vertex exactly once")
        for v, x in entries.items():
            values[v] = x
        return cls(values)


@dataclass
class DirectedMessageField:
    """ω(v, p): one value in [0, 1] per oriented edge, stored in CSR slot order."""

    graph: Graph = field(repr=False)
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.graph.indices.shape:
            raise DomainError(
                f"message field has {self.values.size} entries for {self.graph.indices.size} oriented edges"
            )
        _check_unit_interval(self.values, "message field")

    @classmethod
    def constant(cls, g: Graph, value: float = 1.0) -> "DirectedMessageField":
        return cls(g, np.full(g.indices.size, float(value)))

    @classmethod
    def random(cls, g: Graph, rng: np.random.Generator) -> "DirectedMessageField":
        return cls(g, rng.random(g.indices.size))

    def __len__(self) -> int:
        return int(self.values.size)

    def get(self, v: int, p: int) -> float:
        return float(self.values[self.graph.slot(v, p)])

    def dump(self) -> str:
        rows = self.graph.slot_rows
        cols = self.graph.indices
        return "".join(f"{int(v)} {int(p)} {float(x)!r}\n" for v, p, x in zip(rows, cols, self.values))

    @classmethod
    def load(cls, g: Graph, text: str) -> "DirectedMessageField":
        values = np.full(g.indices.size, np.nan)
        for line_number, raw in enumerate(text.splitlines(), start=1):
            parts = raw.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise DomainError(f"line {line_number}: expected 'tail head value'")
            try:
                values[g.slot(int(parts[0]), int(parts[1]))] = float(parts[2])
            except GraphError as e:
                raise DomainError(f"line {line_number}: {e}") from e
        if np.isnan(values).any():
            raise DomainError("message field dump does not cover every oriented edge")
        return cls(g, values)


@dataclass
class PhiFunction:
    """Path-coupling weights Φ ≥ 1; certified marks the regime where Φ ≤ 12 is promised."""

    values: np.ndarray
    certified: bool = False

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.size and self.values.min() < 1 - _RANGE_SLACK:
            raise DomainError("phi entries must be at least 1")
        if self.certified and self.values.size and self.values.max() > 12:
            raise DomainError("certified phi entries must not exceed 12")

    @classmethod
    def ones(cls, vertex_count: int) -> "PhiFunction":
        return cls(np.ones(vertex_count))

    def __getitem__(self, v: int) -> float:
        return float(self.values[v])
