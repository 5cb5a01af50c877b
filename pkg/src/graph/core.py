"""
Immutable simple graphs, BFS balls and the oriented view around a vertex.
"""
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import GraphError

if TYPE_CHECKING:
    import networkx as nx


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1 with sorted adjacency tuples."""

    vertex_count: int
    adjacency: Tuple[Tuple[int, ...], ...]
    max_degree: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        n = self.vertex_count
        if n < 0:
            raise GraphError(f"negative vertex count {n}")
        if len(self.adjacency) != n:
            raise GraphError(f"adjacency has {len(self.adjacency)} rows for {n} vertices")

        for v, row in enumerate(self.adjacency):
            for i, u in enumerate(row):
                if not 0 <= u < n:
                    raise GraphError(f"vertex {v} lists neighbor {u} outside 0..{n - 1}")
                if u == v:
                    raise GraphError(f"self-loop at vertex {v}")
                if i and row[i - 1] >= u:
                    raise GraphError(f"adjacency of {v} is not strictly increasing (duplicate edge?)")
        for v, row in enumerate(self.adjacency):
            for u in row:
                if v not in self._neighbor_sets[u]:
                    raise GraphError(f"edge {v}-{u} is not symmetric")

        object.__setattr__(self, "max_degree", max((len(row) for row in self.adjacency), default=0))

    # === Constructors ===

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        """Build from an edge iterable; loops, duplicates and bad indices raise GraphError."""
        rows: List[set] = [set() for _ in range(vertex_count)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise GraphError(f"edge {u}-{v} outside 0..{vertex_count - 1}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if v in rows[u]:
                raise GraphError(f"duplicate edge {u}-{v}")
            rows[u].add(v)
            rows[v].add(u)
        return cls(vertex_count, tuple(tuple(sorted(row)) for row in rows))

    @classmethod
    def empty(cls, vertex_count: int) -> "Graph":
        return cls(vertex_count, tuple(() for _ in range(vertex_count)))

    @classmethod
    def from_networkx(cls, nx_graph: "nx.Graph") -> "Graph":
        """Relabel nodes in sorted order to 0..n-1."""
        import networkx as nx

        if nx_graph.is_directed() or nx_graph.is_multigraph():
            raise GraphError("only simple undirected graphs are supported")
        try:
            relabeled = nx.convert_node_labels_to_integers(nx_graph, ordering="sorted")
        except TypeError:
            relabeled = nx.convert_node_labels_to_integers(nx_graph)
        return cls.from_edges(relabeled.number_of_nodes(), relabeled.edges())

    def to_networkx(self) -> "nx.Graph":
        import networkx as nx

        out = nx.Graph()
        out.add_nodes_from(range(self.vertex_count))
        out.add_edges_from(self.edges())
        return out

    # === Queries ===

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Each edge once as (u, v) with u < v."""
        for u, row in enumerate(self.adjacency):
            for v in row:
                if u < v:
                    yield u, v

    @property
    def edge_count(self) -> int:
        return int(self.degrees.sum()) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(row) for row in self.adjacency), dtype=np.int64, count=self.vertex_count)

    @cached_property
    def _neighbor_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(row) for row in self.adjacency)

    # === CSR layout ===

    @cached_property
    def indptr(self) -> np.ndarray:
        out = np.zeros(self.vertex_count + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=out[1:])
        return out

    @cached_property
    def indices(self) -> np.ndarray:
        return np.fromiter(
            (u for row in self.adjacency for u in row), dtype=np.int64, count=int(self.degrees.sum())
        )

    @cached_property
    def slot_rows(self) -> np.ndarray:
        """Row (tail vertex) of every CSR slot."""
        return np.repeat(np.arange(self.vertex_count, dtype=np.int64), self.degrees)

    @cached_property
    def reverse_slots(self) -> np.ndarray:
        """For the slot of (v, u), the slot of (u, v)."""
        n = max(self.vertex_count, 1)
        keys = self.slot_rows * n + self.indices
        return np.searchsorted(keys, self.indices * n + self.slot_rows).astype(np.int64)

    def csr(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.indptr, self.indices

    def slot(self, v: int, u: int) -> int:
        """CSR slot of the oriented edge (v, u)."""
        row = self.adjacency[v]
        start = int(self.indptr[v])
        pos = int(np.searchsorted(np.asarray(row), u)) if row else 0
        if pos >= len(row) or row[pos] != u:
            raise GraphError(f"{u} is not a neighbor of {v}")
        return start + pos

    def remove_vertices(self, removed: Iterable[int]) -> Tuple["Graph", np.ndarray]:
        """Induced subgraph on the remaining vertices, relabeled in increasing order.

        Returns the subgraph and the array mapping new index -> original index.
        """
        drop = set(int(v) for v in removed)
        kept = np.array([v for v in range(self.vertex_count) if v not in drop], dtype=np.int64)
        relabel = {int(v): i for i, v in enumerate(kept)}
        rows = tuple(
            tuple(relabel[u] for u in self.adjacency[int(v)] if u in relabel) for v in kept
        )
        return Graph(len(kept), rows), kept

    def __repr__(self) -> str:
        return f"Graph(n={self.vertex_count}, m={self.edge_count}, max_degree={self.max_degree})"


# === Distances ===

def distances_from(g: Graph, v: int, max_radius: Optional[int] = None) -> np.ndarray:
    """BFS distances from v; -1 for unreachable (or beyond max_radius)."""
    dist = np.full(g.vertex_count, -1, dtype=np.int64)
    dist[v] = 0
    queue = deque([v])
    while queue:
        x = queue.popleft()
        dx = dist[x]
        if max_radius is not None and dx >= max_radius:
            continue
        for y in g.adjacency[x]:
            if dist[y] < 0:
                dist[y] = dx + 1
                queue.append(y)
    return dist


def ball(g: Graph, v: int, r: int) -> FrozenSet[int]:
    """Vertices within distance r of v."""
    if r < 0:
        raise GraphError("radius must be nonnegative")
    dist = distances_from(g, v, max_radius=r)
    return frozenset(int(x) for x in np.flatnonzero(dist >= 0))


def sphere(g: Graph, v: int, r: int) -> FrozenSet[int]:
    """Vertices at distance exactly r from v."""
    if r < 0:
        raise GraphError("radius must be nonnegative")
    dist = distances_from(g, v, max_radius=r)
    return frozenset(int(x) for x in np.flatnonzero(dist == r))


def ball_size_bound(max_degree: int, r: int) -> float:
    """Closed-form cap on |B(v, r)| for graphs of the given maximum degree."""
    d = max_degree
    if r == 0 or d == 0:
        return 1.0
    if d == 1:
        return 2.0
    if d == 2:
        return 1.0 + 2.0 * r
    return 1.0 + d * ((d - 1) ** r - 1) / (d - 2) + d


# === Oriented view ===

@dataclass(frozen=True)
class OrientedView:
    """G*_w: edges within distance 2 of the root point toward it; tails ignore heads."""

    base: Graph
    root: int
    effective_in_neighbors: Tuple[Tuple[int, ...], ...]
    oriented_edges: Tuple[Tuple[int, int], ...]

    @property
    def vertex_count(self) -> int:
        return self.base.vertex_count

    def is_modified(self, x: int) -> bool:
        return len(self.effective_in_neighbors[x]) != self.base.degree(x)

    @cached_property
    def tails(self) -> FrozenSet[int]:
        return frozenset(tail for tail, _ in self.oriented_edges)

    @cached_property
    def influence(self) -> Tuple[np.ndarray, np.ndarray]:
        """CSR of z -> {x : z in N*(x)}: whose blocked counter z's occupancy feeds."""
        rows: List[List[int]] = [[] for _ in range(self.vertex_count)]
        for x, row in enumerate(self.effective_in_neighbors):
            for z in row:
                rows[z].append(x)
        return _rows_to_csr(rows)

    @cached_property
    def in_csr(self) -> Tuple[np.ndarray, np.ndarray]:
        return _rows_to_csr(self.effective_in_neighbors)


def _rows_to_csr(rows: Sequence[Sequence[int]]) -> Tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum([len(r) for r in rows], out=indptr[1:])
    indices = np.fromiter((z for r in rows for z in sorted(r)), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


def oriented_view(g: Graph, w: int, radius: int = 2) -> OrientedView:
    """Orient every edge at distance <= radius from w toward w.

    The distance of an edge is the smaller endpoint distance. Edges whose endpoints
    are equidistant from w keep both directions.
    """
    dist = distances_from(g, w)
    dropped: List[set] = [set() for _ in range(g.vertex_count)]
    oriented: List[Tuple[int, int]] = []
    for a, b in g.edges():
        da, db = dist[a], dist[b]
        if da < 0 or min(da, db) > radius or da == db:
            continue
        tail, head = (a, b) if da > db else (b, a)
        dropped[tail].add(head)
        oriented.append((tail, head))

    effective = tuple(
        tuple(u for u in g.adjacency[x] if u not in dropped[x]) for x in range(g.vertex_count)
    )
    return OrientedView(base=g, root=w, effective_in_neighbors=effective, oriented_edges=tuple(sorted(oriented)))


def identity_view(g: Graph) -> OrientedView:
    """A view with N* = N everywhere."""
    return OrientedView(base=g, root=-1, effective_in_neighbors=g.adjacency, oriented_edges=())
