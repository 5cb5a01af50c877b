"""Tests for graph construction, structure queries, generators, edge lists and oriented views."""
from __future__ import annotations

import math

import networkx as nx
import numpy as np
import pytest

from src.errors import DomainError, EdgeListParseError, GraphError, RejectionsExhaustedError
from src.graph import (
    Graph,
    ball,
    ball_size_bound,
    diameter,
    distances_from,
    girth,
    identity_view,
    is_bipartite,
    load_edge_list,
    named_graph,
    oriented_view,
    random_regular,
    random_regular_bipartite,
    random_tree,
    read_graph,
    save_edge_list,
    short_cycle_count,
    short_cycle_profile,
    sphere,
    two_coloring,
    write_graph,
)
from src.graph.generators import regular_acceptance


class TestGraphConstruction:
    """Graph invariants and constructors."""

    def test_from_edges_sorts_and_symmetrizes(self) -> None:
        g = Graph.from_edges(4, [(2, 0), (0, 1), (3, 2)])
        assert g.adjacency == ((1, 2), (0,), (0, 3), (2,))
        assert g.max_degree == 2
        assert g.edge_count == 3
        assert list(g.edges()) == [(0, 1), (0, 2), (2, 3)]

    def test_self_loop_rejected(self) -> None:
        with pytest.raises(GraphError, match="self-loop"):
            Graph.from_edges(3, [(1, 1)])

    def test_duplicate_edge_rejected(self) -> None:
        with pytest.raises(GraphError, match="duplicate"):
            Graph.from_edges(3, [(0, 1), (1, 0)])

    def test_out_of_range_rejected(self) -> None:
        with pytest.raises(GraphError):
            Graph.from_edges(2, [(0, 2)])

    def test_asymmetric_adjacency_rejected(self) -> None:
        with pytest.raises(GraphError, match="symmetric"):
            Graph(2, ((1,), ()))

    def test_neighbor_queries(self, star5: Graph) -> None:
        assert star5.neighbors(0) == (1, 2, 3, 4)
        assert star5.degree(0) == 4
        assert star5.has_edge(0, 3)
        assert not star5.has_edge(1, 2)

    def test_csr_layout(self, path4: Graph) -> None:
        indptr, indices = path4.csr()
        assert indptr.tolist() == [0, 1, 3, 5, 6]
        assert indices.tolist() == [1, 0, 2, 1, 3, 2]
        assert path4.slot(2, 3) == 4
        # slot of (v, u) maps to slot of (u, v)
        for k in range(indices.size):
            back = path4.reverse_slots[k]
            assert path4.slot_rows[back] == indices[k]
            assert indices[back] == path4.slot_rows[k]

    def test_slot_of_non_edge_raises(self, path4: Graph) -> None:
        with pytest.raises(GraphError):
            path4.slot(0, 3)

    def test_networkx_round_trip(self, petersen: Graph) -> None:
        assert Graph.from_networkx(petersen.to_networkx()) == petersen

    def test_remove_vertices_relabels(self, path4: Graph) -> None:
        sub, kept = path4.remove_vertices([1])
        assert kept.tolist() == [0, 2, 3]
        assert sub.vertex_count == 3
        assert list(sub.edges()) == [(1, 2)]

    def test_empty_graph(self) -> None:
        g = Graph.empty(5)
        assert g.max_degree == 0
        assert g.edge_count == 0
        assert Graph.empty(0).vertex_count == 0


class TestDistances:
    """Balls, spheres and the ball-size bound."""

    def test_ball_radius_zero(self, petersen: Graph) -> None:
        assert ball(petersen, 3, 0) == frozenset({3})

    def test_ball_and_sphere_on_path(self, path4: Graph) -> None:
        assert ball(path4, 0, 2) == frozenset({0, 1, 2})
        assert sphere(path4, 0, 2) == frozenset({2})
        assert sphere(path4, 0, 5) == frozenset()

    def test_distances_unreachable(self) -> None:
        g = Graph.from_edges(4, [(0, 1)])
        assert distances_from(g, 0).tolist() == [0, 1, -1, -1]

    def test_negative_radius(self, path4: Graph) -> None:
        with pytest.raises(GraphError):
            ball(path4, 0, -1)

    @pytest.mark.parametrize("spec", ["petersen", "heawood", "grid:4:4", "complete:5"])
    def test_ball_size_bound_holds(self, spec: str) -> None:
        g = named_graph(spec)
        for r in range(4):
            for v in range(g.vertex_count):
                assert len(ball(g, v, r)) <= ball_size_bound(g.max_degree, r)


class TestStructure:
    """Girth, short cycles, bipartition and diameter."""

    def test_known_girths(self, heawood: Graph, petersen: Graph, k4: Graph) -> None:
        assert girth(heawood) == 6
        assert girth(petersen) == 5
        assert girth(k4) == 3

    def test_forest_girth_is_infinite(self, random_trees: list) -> None:
        for tree in random_trees:
            assert girth(tree) == math.inf

    def test_girth_matches_networkx_cycle_basis(self) -> None:
        for seed in range(5):
            g = random_regular(16, 3, seed=seed)
            shortest = min(len(c) for c in nx.minimum_cycle_basis(g.to_networkx()))
            assert girth(g) == shortest

    def test_short_cycles_in_k4(self, k4: Graph) -> None:
        assert short_cycle_count(k4, 0, 4) == 3
        assert short_cycle_count(k4, 0, 5) == 6

    def test_short_cycles_respect_bound(self, cycle5: Graph) -> None:
        assert short_cycle_count(cycle5, 0, 5) == 0
        assert short_cycle_count(cycle5, 0, 6) == 1

    def test_heawood_hexagons(self, heawood: Graph) -> None:
        assert short_cycle_profile(heawood, 6).tolist() == [0] * 14
        assert short_cycle_profile(heawood, 7).tolist() == [12] * 14

    def test_short_cycle_bound_validated(self, k4: Graph) -> None:
        with pytest.raises(DomainError):
            short_cycle_count(k4, 0, 2)

    def test_two_coloring(self, heawood: Graph, petersen: Graph) -> None:
        colors = two_coloring(heawood)
        assert colors is not None
        for u, v in heawood.edges():
            assert colors[u] != colors[v]
        assert not is_bipartite(petersen)

    def test_diameter(self, path4: Graph, petersen: Graph) -> None:
        assert diameter(path4) == 3
        assert diameter(petersen) == 2


class TestGenerators:
    """Random regular graphs, trees and named graphs."""

    def test_random_regular_is_simple_regular(self) -> None:
        g = random_regular(100, 6, seed=7)
        assert g.vertex_count == 100
        assert set(g.degrees.tolist()) == {6}

    def test_random_regular_deterministic(self) -> None:
        assert random_regular(40, 3, seed=11) == random_regular(40, 3, seed=11)

    def test_incremental_method_for_high_degree(self) -> None:
        g = random_regular(60, 12, seed=3, method="incremental")
        assert set(g.degrees.tolist()) == {12}

    def test_auto_uses_networkx_below_rejection_acceptance(self) -> None:
        assert regular_acceptance(12) < 1e-3
        auto = random_regular(60, 12, seed=3)
        assert set(auto.degrees.tolist()) == {12}
        assert auto == random_regular(60, 12, seed=3, method="networkx")
        assert auto == random_regular(60, 12, seed=3)

    def test_auto_keeps_rejection_at_low_degree(self) -> None:
        assert random_regular(40, 3, seed=11) == random_regular(40, 3, seed=11, method="rejection")

    def test_networkx_method_is_not_bipartite(self) -> None:
        with pytest.raises(DomainError):
            random_regular_bipartite(10, 3, seed=5, method="networkx")

    def test_dense_auto_goes_through_the_complement(self) -> None:
        g = random_regular(12, 8, seed=2)
        assert set(g.degrees.tolist()) == {8}
        sparse = random_regular(12, 3, seed=2)
        assert g == Graph.from_networkx(nx.complement(sparse.to_networkx()))

    def test_odd_degree_sum_rejected(self) -> None:
        with pytest.raises(DomainError):
            random_regular(7, 3, seed=0)

    def test_degree_too_large_rejected(self) -> None:
        with pytest.raises(DomainError):
            random_regular(4, 4, seed=0)

    def test_degree_zero(self) -> None:
        assert random_regular(5, 0).edge_count == 0

    def test_attempt_budget(self) -> None:
        # K4 is the only simple 3-regular graph on 4 vertices; a single pairing often fails
        failures = 0
        for seed in range(50):
            try:
                random_regular(4, 3, seed=seed, attempts=1, method="rejection")
            except RejectionsExhaustedError:
                failures += 1
        assert failures > 0

    def test_bipartite_regular(self) -> None:
        g = random_regular_bipartite(10, 3, seed=5)
        assert set(g.degrees.tolist()) == {3}
        for u, v in g.edges():
            assert u < 10 <= v
        assert is_bipartite(g)

    def test_random_tree(self) -> None:
        tree = random_tree(25, seed=4)
        assert tree.edge_count == 24
        assert nx.is_tree(tree.to_networkx())

    def test_named_graphs(self) -> None:
        assert named_graph("heawood").vertex_count == 14
        assert named_graph("cycle:6").edge_count == 6
        assert named_graph("star:3").max_degree == 3
        assert named_graph("grid:2:3").vertex_count == 6
        assert named_graph("tree:10:1") == random_tree(10, seed=1)

    def test_unknown_named_graph(self) -> None:
        with pytest.raises(GraphError):
            named_graph("dodecahedron:3")


class TestEdgeListIO:
    """Edge-list parsing and writing."""

    def test_round_trip_keeps_isolated_vertices(self, tmp_path) -> None:
        g = Graph.from_edges(5, [(0, 1), (1, 2)])
        path = tmp_path / "g.edges"
        write_graph(path, g)
        assert read_graph(path) == g

    def test_header_and_comments(self) -> None:
        g = load_edge_list("# vertices 4\n0 1  # first\n\n2 3\n")
        assert g.vertex_count == 4
        assert g.edge_count == 2

    def test_without_header_uses_largest_index(self) -> None:
        assert load_edge_list("0 3\n").vertex_count == 4

    @pytest.mark.parametrize(
        "text,line",
        [
            ("0 1\n1 1\n", 2),
            ("0 1\n1 0\n", 2),
            ("0 x\n", 1),
            ("0 1 2\n", 1),
            ("0 1\n\n-1 2\n", 3),
            ("# vertices 2\n0 1\n1 2\n", 3),
        ],
    )
    def test_errors_carry_line_numbers(self, text: str, line: int) -> None:
        with pytest.raises(EdgeListParseError) as exc:
            load_edge_list(text)
        assert exc.value.line_number == line
        assert str(exc.value).startswith(f"line {line}:")

    def test_save_format(self, path4: Graph) -> None:
        assert save_edge_list(path4) == "# vertices 4\n0 1\n1 2\n2 3\n"


class TestOrientedView:
    """G*_w orientation near the root."""

    def test_path_orientation(self) -> None:
        g = named_graph("path:5")
        view = oriented_view(g, 0)
        assert view.effective_in_neighbors == ((1,), (2,), (3,), (4,), (3,))
        assert view.oriented_edges == ((1, 0), (2, 1), (3, 2))
        assert view.tails == frozenset({1, 2, 3})
        assert not view.is_modified(0)
        assert view.is_modified(1)

    def test_equidistant_edge_stays_unoriented(self, triangle: Graph) -> None:
        view = oriented_view(triangle, 0)
        # edge 1-2 has both endpoints at distance 1
        assert 2 in view.effective_in_neighbors[1]
        assert 1 in view.effective_in_neighbors[2]
        assert view.effective_in_neighbors[0] == (1, 2)

    def test_far_edges_untouched(self) -> None:
        g = named_graph("grid:5:5")
        view = oriented_view(g, 0)
        dist = distances_from(g, 0)
        assert (dist > 3).any()
        for x in range(g.vertex_count):
            if dist[x] > 3:
                assert view.effective_in_neighbors[x] == g.adjacency[x]

    def test_influence_is_transpose_of_in_neighbors(self, petersen: Graph) -> None:
        view = oriented_view(petersen, 2)
        indptr, indices = view.influence
        pairs = {(int(z), int(x)) for z in range(10) for x in indices[indptr[z]:indptr[z + 1]]}
        expected = {(z, x) for x, row in enumerate(view.effective_in_neighbors) for z in row}
        assert pairs == expected

    def test_identity_view(self, cycle5: Graph) -> None:
        view = identity_view(cycle5)
        assert view.effective_in_neighbors == cycle5.adjacency
        assert view.oriented_edges == ()
        indptr, indices = view.influence
        assert np.array_equal(indptr, cycle5.indptr)
        assert np.array_equal(indices, cycle5.indices)
