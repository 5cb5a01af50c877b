"""
Cycle and distance structure: girth, short cycles through a vertex, bipartition.
"""
import math
from collections import deque
from typing import Optional

import numpy as np

from src.errors import DomainError
from src.graph.core import Graph, distances_from


def girth(g: Graph) -> float:
    """Length of a shortest cycle; ``math.inf`` for forests.

    BFS from every root; a non-tree edge at depths (a, b) closes a walk of length
    a + b + 1 through the root, and the minimum over all roots is the girth.
    """
    best = math.inf
    n = g.vertex_count
    for root in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        parent = np.full(n, -1, dtype=np.int64)
        dist[root] = 0
        queue = deque([root])
        while queue:
            x = queue.popleft()
            # nothing shorter can close past this depth
            if 2 * dist[x] + 1 >= best:
                break
            for y in g.adjacency[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, int(dist[x] + dist[y] + 1))
    return best


def short_cycle_count(g: Graph, v: int, g_max: int) -> int:
    """Number of distinct simple cycles of length < g_max through v."""
    if g_max < 3:
        raise DomainError("g_max must be at least 3")

    closed_walks = 0
    on_path = np.zeros(g.vertex_count, dtype=bool)
    on_path[v] = True
    # (vertex, edges from v, iterator over neighbors)
    stack = [(v, 0, iter(g.adjacency[v]))]
    while stack:
        x, depth, it = stack[-1]
        advanced = False
        for y in it:
            if y == v:
                if 2 <= depth <= g_max - 2:
                    closed_walks += 1
            elif not on_path[y] and depth + 2 <= g_max - 1:
                on_path[y] = True
                stack.append((y, depth + 1, iter(g.adjacency[y])))
                advanced = True
                break
        if not advanced:
            stack.pop()
            if x != v:
                on_path[x] = False
    # every cycle is traversed in both directions
    return closed_walks // 2


def short_cycle_profile(g: Graph, g_max: int) -> np.ndarray:
    """short_cycle_count for every vertex."""
    return np.array([short_cycle_count(g, v, g_max) for v in range(g.vertex_count)], dtype=np.int64)


def two_coloring(g: Graph) -> Optional[np.ndarray]:
    """0/1 coloring with every edge crossing, or None when an odd cycle exists."""
    color = np.full(g.vertex_count, -1, dtype=np.int64)
    for start in range(g.vertex_count):
        if color[start] >= 0:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in g.adjacency[x]:
                if color[y] < 0:
                    color[y] = 1 - color[x]
                    queue.append(y)
                elif color[y] == color[x]:
                    return None
    return color


def is_bipartite(g: Graph) -> bool:
    return two_coloring(g) is not None


def diameter(g: Graph) -> int:
    """Largest finite BFS distance (per component)."""
    best = 0
    for v in range(g.vertex_count):
        best = max(best, int(distances_from(g, v).max(initial=0)))
    return best
