"""
Edge-list text format.

One ``u v`` pair per line, whitespace separated, 0-based. ``#`` starts a comment.
An optional ``# vertices <n>`` header fixes the vertex count so isolated vertices
survive a round trip; without it n is the largest index plus one.
"""
import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

from src.errors import EdgeListParseError
from src.graph.core import Graph

_HEADER = re.compile(r"^#\s*vertices\s+(\d+)\s*$", re.IGNORECASE)


def load_edge_list(text: str) -> Graph:
    declared: Optional[int] = None
    edges: List[Tuple[int, int, int]] = []
    seen = set()

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        header = _HEADER.match(line)
        if header:
            declared = int(header.group(1))
            continue
        body = line.split("#", 1)[0].split()
        if not body:
            continue
        if len(body) != 2:
            raise EdgeListParseError(line_number, f"expected 'u v', got {raw.strip()!r}")
        try:
            u, v = int(body[0]), int(body[1])
        except ValueError:
            raise EdgeListParseError(line_number, f"non-integer vertex in {raw.strip()!r}") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(line_number, "negative vertex index")
        if u == v:
            raise EdgeListParseError(line_number, f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise EdgeListParseError(line_number, f"duplicate edge {key[0]}-{key[1]}")
        seen.add(key)
        edges.append((line_number, u, v))

    n = max((max(u, v) + 1 for _, u, v in edges), default=0)
    if declared is not None:
        for line_number, u, v in edges:
            if max(u, v) >= declared:
                raise EdgeListParseError(line_number, f"vertex {max(u, v)} exceeds declared count {declared}")
        n = declared
    return Graph.from_edges(n, ((u, v) for _, u, v in edges))


def save_edge_list(g: Graph) -> str:
    lines = [f"# vertices {g.vertex_count}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def read_graph(path: Union[str, Path]) -> Graph:
    return load_edge_list(Path(path).read_text(encoding="utf-8"))


def write_graph(path: Union[str, Path], g: Graph) -> None:
    Path(path).write_text(save_edge_list(g), encoding="utf-8")
