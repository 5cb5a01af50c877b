"""
Graph package: representation, structure queries, generators and edge-list IO.
"""
from .core import (
    Graph,
    OrientedView,
    ball,
    ball_size_bound,
    distances_from,
    identity_view,
    oriented_view,
    sphere,
)
from .generators import named_graph, random_regular, random_regular_bipartite, random_tree
from .io import load_edge_list, read_graph, save_edge_list, write_graph
from .structure import diameter, girth, is_bipartite, short_cycle_count, short_cycle_profile, two_coloring

__all__ = [
    "Graph",
    "OrientedView",
    "ball",
    "ball_size_bound",
    "diameter",
    "distances_from",
    "girth",
    "identity_view",
    "is_bipartite",
    "load_edge_list",
    "named_graph",
    "oriented_view",
    "random_regular",
    "random_regular_bipartite",
    "random_tree",
    "read_graph",
    "save_edge_list",
    "short_cycle_count",
    "short_cycle_profile",
    "sphere",
    "two_coloring",
    "write_graph",
]
