"""Tests for Glauber chains, coupled pairs and the local statistics of configurations."""
from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from src.dynamics import (
    ChainState,
    CoupledPair,
    HeavinessClassifier,
    UpdateStream,
    above_suspicion,
    bp_residual,
    bp_residual_all,
    continuous_run,
    coupled_step,
    exact_gibbs_sample,
    glauber_step,
    hamming,
    heavy_counts,
    interpolation_path,
    is_heavy,
    oriented_glauber_step,
    r_stat,
    r_stat_all,
    record_masks,
    run,
    run_coupled,
    s_stat,
    s_stat_all,
    unblocked_indicator,
    w_stat,
    w_stat_all,
    watch_unoccupied,
    weighted_distance,
)
from src.dynamics import kernels
from src.errors import DomainError, IndependenceError, LengthMismatchError, NotNeighborError
from src.graph import Graph, ball, identity_view, named_graph, oriented_view, random_regular
from src.model import IndependentSet, greedy_maximal_independent_set, is_independent
from src.oracle import enumerate_independent_sets, exact_distribution, exact_glauber_kernel, exact_marginal


def _masks_independent(g: Graph, masks: np.ndarray) -> bool:
    for u, v in g.edges():
        if np.any(((masks >> u) & 1) & ((masks >> v) & 1)):
            return False
    return True


class TestGlauberRule:
    """The three-case heat-bath update."""

    def test_blocked_vertex_keeps_state(self, single_edge: Graph) -> None:
        state = ChainState(single_edge, 1.0, [True, False], seed=0)
        kernels.glauber_steps(state.indptr, state.indices, state.occupied, state.blocked,
                              np.array([1]), np.array([0.0]), state.p_occupy)
        assert state.occupied.tolist() == [True, False]

    def test_unblocked_vertex_follows_uniform(self, single_edge: Graph) -> None:
        state = ChainState(single_edge, 3.0, None, seed=0)
        args = (state.indptr, state.indices, state.occupied, state.blocked)
        kernels.glauber_steps(*args, np.array([0]), np.array([0.74]), state.p_occupy)
        assert state.occupied.tolist() == [True, False]
        assert state.blocked.tolist() == [0, 1]
        kernels.glauber_steps(*args, np.array([0]), np.array([0.76]), state.p_occupy)
        assert state.occupied.tolist() == [False, False]
        assert state.blocked.tolist() == [0, 0]

    def test_step_counts(self, path4: Graph) -> None:
        state = ChainState(path4, 1.0, seed=1)
        glauber_step(state)
        run(state, 9)
        assert state.step_count == 10
        assert state.stream.consumed == 10

    def test_invalid_start_rejected(self, triangle: Graph) -> None:
        with pytest.raises(IndependenceError):
            ChainState(triangle, 1.0, [True, True, False])
        with pytest.raises(LengthMismatchError):
            ChainState(triangle, 1.0, [False])
        with pytest.raises(DomainError):
            ChainState(triangle, 0.0)

    def test_single_vertex_occupancy(self, single_vertex: Graph) -> None:
        lam = 1.5
        state = ChainState(single_vertex, lam, seed=7)
        masks = record_masks(state, 1_000_000, 1)
        p = lam / (1 + lam)
        band = 4 * math.sqrt(p * (1 - p) / masks.size)
        assert abs(masks.mean() - p) <= band

    def test_independence_is_never_violated(self) -> None:
        for seed in range(3):
            g = random_regular(40, 4, seed=seed)
            state = ChainState(g, 2.0, seed=seed)
            masks = record_masks(state, 200_000, 1)
            assert _masks_independent(g, masks)
            assert is_independent(g, state.occupied)

    def test_blocked_counters_stay_consistent(self, petersen: Graph) -> None:
        state = ChainState(petersen, 1.0, seed=3)
        run(state, 5000)
        expected = state.blocked.copy()
        state.recount_blocked()
        assert np.array_equal(state.blocked, expected)

    def test_trajectories_are_reproducible(self, heawood: Graph) -> None:
        a = run(ChainState(heawood, 1.2, seed=99), 20_000)
        b = run(ChainState(heawood, 1.2, seed=99), 20_000)
        assert np.array_equal(a.occupied, b.occupied)

    def test_stream_chunking_does_not_matter(self, heawood: Graph) -> None:
        whole = run(ChainState(heawood, 1.2, seed=5), 100_000)
        pieces = ChainState(heawood, 1.2, seed=5)
        for _ in range(100):
            run(pieces, 1000)
        assert np.array_equal(whole.occupied, pieces.occupied)

    def test_small_blocks_match_default_blocks(self, path4: Graph) -> None:
        rng_a, rng_b = np.random.default_rng(1), np.random.default_rng(1)
        stream_a = UpdateStream(4, rng_a, block=8)
        stream_b = UpdateStream(4, rng_b, block=8)
        first = np.concatenate([stream_a.take(3)[0], stream_a.take(13)[0]])
        assert np.array_equal(first, stream_b.take(16)[0])

    def test_empty_graph_steps(self) -> None:
        state = ChainState(Graph.empty(0), 1.0, seed=0)
        run(state, 5)
        assert state.step_count == 5

    def test_negative_steps(self, path4: Graph) -> None:
        with pytest.raises(DomainError):
            run(ChainState(path4, 1.0), -1)

    def test_one_step_law_matches_exact_kernel(self) -> None:
        for spec in ("path:3", "star:3", "cycle:5"):
            g = named_graph(spec)
            kernel = exact_glauber_kernel(g, 1.4)
            dense = kernel.matrix.toarray()
            state = ChainState(g, 1.4, seed=11)
            start = np.array([0], dtype=np.int64)
            masks = np.concatenate([start, record_masks(state, 1_000_000, 1)])
            src = np.searchsorted(kernel.states, masks[:-1])
            dst = np.searchsorted(kernel.states, masks[1:])
            size = kernel.states.size
            counts = np.bincount(src * size + dst, minlength=size * size).reshape(size, size)
            visits = counts.sum(axis=1)
            for i in range(size):
                if visits[i] == 0:
                    continue
                freq = counts[i] / visits[i]
                band = 4 * np.sqrt(dense[i] * (1 - dense[i]) / visits[i]) + 1e-12
                assert np.all(np.abs(freq - dense[i]) <= band)


class TestContinuousTime:
    """Rate-1 global Poisson clock."""

    def test_zero_duration(self, path4: Graph) -> None:
        state = ChainState(path4, 1.0, [True, False, True, False], seed=2)
        assert continuous_run(state, 0.0) == 0
        assert state.occupied.tolist() == [True, False, True, False]
        assert state.clock == 0.0

    def test_negative_duration(self, path4: Graph) -> None:
        with pytest.raises(DomainError):
            continuous_run(ChainState(path4, 1.0), -1.0)

    def test_event_counts_are_poisson(self, path4: Graph) -> None:
        t = 2000.0
        for seed in range(20):
            state = ChainState(path4, 1.0, seed=seed)
            events = continuous_run(state, t)
            assert abs(events - t) <= 5 * math.sqrt(t)
            assert state.step_count == events
            assert state.clock == t

    def test_long_durations_span_several_clock_blocks(self, single_vertex: Graph) -> None:
        t = 200_000.0
        events = continuous_run(ChainState(single_vertex, 1.0, seed=4), t)
        assert abs(events - t) <= 5 * math.sqrt(t)

    @pytest.mark.slow
    def test_stationarity_is_preserved(self, path4: Graph) -> None:
        lam = 1.0
        replicates = 2000
        hits = 0
        for seed in range(replicates):
            start = exact_gibbs_sample(path4, lam, seed=seed)
            stream = UpdateStream(4, np.random.default_rng(10_000 + seed), block=64)
            state = ChainState(path4, lam, start.occupied, seed=seed, stream=stream)
            continuous_run(state, 3.0)
            hits += int(state.occupied[0])
        p = exact_marginal(path4, lam, 0)
        assert abs(hits / replicates - p) <= 4 * math.sqrt(p * (1 - p) / replicates)


class TestGibbsSampling:
    """Exact draws from the oracle table."""

    def test_draws_are_independent_sets(self, petersen: Graph) -> None:
        for seed in range(20):
            sigma = exact_gibbs_sample(petersen, 1.0, seed=seed)
            assert is_independent(petersen, sigma.occupied)

    def test_draws_are_reproducible(self, petersen: Graph) -> None:
        assert exact_gibbs_sample(petersen, 2.0, seed=8) == exact_gibbs_sample(petersen, 2.0, seed=8)

    def test_recorded_masks_follow_gibbs(self, cycle5: Graph) -> None:
        table = exact_distribution(cycle5, 1.0)
        state = ChainState(cycle5, 1.0, seed=21)
        run(state, 1000)
        masks = record_masks(state, 100_000, 10)
        freq = np.bincount(np.searchsorted(table.masks, masks), minlength=len(table)) / masks.size
        assert 0.5 * np.abs(freq - table.probabilities).sum() < 0.02


class TestOrientedChain:
    """Glauber dynamics on G*_w."""

    def test_identity_view_matches_plain_chain(self, heawood: Graph) -> None:
        plain = run(ChainState(heawood, 1.1, seed=6), 50_000)
        viewed = run(ChainState(heawood, 1.1, seed=6, view=identity_view(heawood)), 50_000)
        assert np.array_equal(plain.occupied, viewed.occupied)

    def test_star_leaves_are_never_blocked(self, star5: Graph) -> None:
        view = oriented_view(star5, 0)
        state = ChainState(star5, 1.0, [True, False, False, False, False], seed=0, view=view)
        for leaf in range(1, 5):
            assert not state.is_blocked(leaf)
        assert view.effective_in_neighbors[0] == star5.neighbors(0)

    def test_state_may_leave_independent_sets(self, star5: Graph) -> None:
        view = oriented_view(star5, 0)
        state = ChainState(star5, 1.0, [True, True, False, False, False], seed=0, view=view)
        oriented_glauber_step(state)
        assert state.step_count == 1

    def test_oriented_step_requires_view(self, star5: Graph) -> None:
        with pytest.raises(DomainError):
            oriented_glauber_step(ChainState(star5, 1.0))

    def test_view_must_match_graph(self, star5: Graph, path4: Graph) -> None:
        with pytest.raises(DomainError):
            ChainState(path4, 1.0, view=oriented_view(star5, 0))

    def test_disagreements_outside_ball_are_reproducible(self) -> None:
        g = random_regular(200, 6, seed=2)
        view = oriented_view(g, 0)
        inside = ball(g, 0, 3)
        outside = []
        for _ in range(2):
            pair = CoupledPair.from_sets(g, 0.5, IndependentSet.empty(200), IndependentSet.empty(200), seed=0, y_view=view)
            run_coupled(pair, 2000)
            outside.append(sorted(v for v in pair.cumulative_disagreements() if v not in inside))
        assert outside[0] == outside[1]
        assert all(0 <= v < 200 for v in outside[0])


class TestCoupling:
    """Shared-randomness pairs."""

    def test_identical_states_stay_identical(self, petersen: Graph) -> None:
        sigma = greedy_maximal_independent_set(petersen)
        pair = CoupledPair.from_sets(petersen, 1.0, sigma, sigma, seed=1)
        run_coupled(pair, 10_000)
        assert hamming(pair) == 0
        assert weighted_distance(pair) == 0.0
        assert pair.cumulative_disagreements() == frozenset()

    def test_chains_share_one_stream(self, path4: Graph) -> None:
        pair = CoupledPair.from_sets(path4, 1.0, IndependentSet.empty(4), IndependentSet.empty(4), seed=0)
        assert pair.x.stream is pair.y.stream

    def test_single_vertex_coalesces_on_first_update(self, single_vertex: Graph) -> None:
        pair = CoupledPair.from_sets(single_vertex, 1.0, IndependentSet.empty(1), IndependentSet.from_vertices(1, [0]), seed=0)
        assert hamming(pair) == 1
        coupled_step(pair)
        assert hamming(pair) == 0
        assert pair.cumulative_disagreements() == frozenset({0})

    def test_disagreement_at_updated_vertex_resolves(self) -> None:
        g = named_graph("path:3")
        x0 = IndependentSet.from_vertices(3, [0])
        y0 = IndependentSet.empty(3)
        pair = CoupledPair.from_sets(g, 1.0, x0, y0, seed=0)
        args = (pair.x.indptr, pair.x.indices, pair.x.occupied, pair.x.blocked,
                pair.y.indptr, pair.y.indices, pair.y.occupied, pair.y.blocked,
                pair.disagree, pair.ever, pair.weights, pair.distance)
        # vertex 2 sees the same neighborhood in both chains
        kernels.coupled_steps(*args, np.array([2]), np.array([0.1]), pair.x.p_occupy, np.empty(0))
        assert pair.x.occupied[2] and pair.y.occupied[2]
        assert hamming(pair) == 1
        # vertex 0 has an empty neighborhood in both chains
        kernels.coupled_steps(*args, np.array([0]), np.array([0.9]), pair.x.p_occupy, np.empty(0))
        assert hamming(pair) == 0

    def test_incremental_disagreements_match_recount(self, heawood: Graph, rng: np.random.Generator) -> None:
        x0 = greedy_maximal_independent_set(heawood)
        y0 = greedy_maximal_independent_set(heawood, order=range(13, -1, -1))
        weights = rng.uniform(1.0, 3.0, size=14)
        pair = CoupledPair.from_sets(heawood, 1.0, x0, y0, seed=4, weights=weights)
        for _ in range(200):
            run_coupled(pair, 25)
            recount = pair.recompute_disagreements()
            assert np.array_equal(pair.disagree, recount)
            assert pair.disagreement_set() <= pair.cumulative_disagreements()
            assert pair.distance[0] == recount.sum()
            assert pair.distance[1] == pytest.approx(weights[recount].sum(), abs=1e-9)

    def test_coalescence_is_absorbing(self, cycle5: Graph) -> None:
        pair = CoupledPair.from_sets(cycle5, 1.0, IndependentSet.from_vertices(5, [0, 2]), IndependentSet.empty(5), seed=3)
        trace = run_coupled(pair, 5000, trace=True)
        assert trace is not None
        hit = np.flatnonzero(trace == 0)
        assert hit.size
        assert np.all(trace[hit[0]:] == 0)

    def test_weighted_dominates_hamming(self, petersen: Graph, rng: np.random.Generator) -> None:
        phi = rng.uniform(1.0, 12.0, size=10)
        sets = [IndependentSet.from_mask(10, int(m)) for m in enumerate_independent_sets(petersen)]
        for _ in range(50):
            a, b = rng.choice(len(sets), size=2)
            pair = CoupledPair.from_sets(petersen, 1.0, sets[a], sets[b], seed=0)
            assert weighted_distance(pair, phi) >= hamming(pair)

    def test_one_disagreement_distance(self, path4: Graph) -> None:
        phi = np.array([1.0, 2.5, 1.0, 1.0])
        pair = CoupledPair.from_sets(path4, 1.0, IndependentSet.from_vertices(4, [1]), IndependentSet.empty(4), weights=phi)
        assert hamming(pair) == 1
        assert weighted_distance(pair) == 2.5

    def test_mismatched_pairs_rejected(self, path4: Graph) -> None:
        with pytest.raises(DomainError):
            CoupledPair(ChainState(path4, 1.0), ChainState(path4, 2.0))

    def test_separate_streams_rejected(self, path4: Graph) -> None:
        with pytest.raises(DomainError):
            CoupledPair(ChainState(path4, 1.0, seed=1), ChainState(path4, 1.0, seed=1))

    def test_shared_stream_accepted(self, path4: Graph) -> None:
        x = ChainState(path4, 1.0, seed=1)
        y = ChainState(path4, 1.0, IndependentSet.from_vertices(4, [0]).occupied, stream=x.stream)
        pair = CoupledPair(x, y)
        assert pair.stream is x.stream is y.stream
        assert hamming(pair) == 1


class TestStatistics:
    """U, S, W, R and the BP residual."""

    def test_unblocked_indicator(self, star5: Graph) -> None:
        empty = IndependentSet.empty(5)
        assert unblocked_indicator(star5, empty, 0) == 1
        leaf = IndependentSet.from_vertices(5, [1])
        assert unblocked_indicator(star5, leaf, 0, 1) == 1
        assert unblocked_indicator(star5, leaf, 0, 2) == 0
        with pytest.raises(NotNeighborError):
            unblocked_indicator(star5, empty, 1, 2)

    def test_s_on_empty_set(self, petersen: Graph) -> None:
        assert s_stat(petersen, IndependentSet.empty(10), 4) == 3

    def test_w_with_unit_phi(self, heawood: Graph) -> None:
        sigma = greedy_maximal_independent_set(heawood)
        for v in range(14):
            assert w_stat(heawood, sigma, v, np.ones(14)) == s_stat(heawood, sigma, v)

    def test_s_counts_blocked_leaf(self) -> None:
        # star center 0 with leaves 1..3; leaf 1 has a second neighbor 4
        g = Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (1, 4)])
        assert s_stat(g, IndependentSet.from_vertices(5, [4]), 0) == 2

    def test_r_on_empty_set(self, petersen: Graph) -> None:
        assert r_stat(petersen, IndependentSet.empty(10), 0, 2.0) == pytest.approx(3.0 ** -3)

    def test_r_when_all_neighbors_blocked(self) -> None:
        g = Graph.from_edges(5, [(0, 1), (0, 2), (1, 3), (2, 4)])
        assert r_stat(g, IndependentSet.from_vertices(5, [3, 4]), 0, 1.7) == 1.0

    def test_bp_residual_isolated(self) -> None:
        assert bp_residual(Graph.empty(1), IndependentSet.empty(1), 0, 2.0) == 0.0

    def test_bp_residual_empty_regular(self, petersen: Graph) -> None:
        lam, d = 1.3, 3
        r = (1 + lam) ** -d
        expected = abs(r - (1 - lam * r / (1 + lam)) ** d)
        assert bp_residual(petersen, IndependentSet.empty(10), 0, lam) == pytest.approx(expected, rel=1e-12)

    def test_vectorized_versions_agree(self, heawood: Graph, rng: np.random.Generator) -> None:
        lam = 0.9
        phi = rng.uniform(1.0, 5.0, size=14)
        masks = enumerate_independent_sets(heawood)
        for mask in rng.choice(masks, size=25):
            sigma = IndependentSet.from_mask(14, int(mask))
            s_all = s_stat_all(heawood, sigma)
            w_all = w_stat_all(heawood, sigma, phi)
            r_all = r_stat_all(heawood, sigma, lam)
            res_all = bp_residual_all(heawood, sigma, lam)
            for v in range(14):
                assert s_all[v] == s_stat(heawood, sigma, v)
                assert w_all[v] == pytest.approx(w_stat(heawood, sigma, v, phi), rel=1e-12)
                assert r_all[v] == pytest.approx(r_stat(heawood, sigma, v, lam), rel=1e-12)
                assert res_all[v] == pytest.approx(bp_residual(heawood, sigma, v, lam), abs=1e-12)

    def test_statistic_bounds(self, heawood: Graph, rng: np.random.Generator) -> None:
        lam = 1.0
        phi = rng.uniform(1.0, 12.0, size=14)
        for mask in enumerate_independent_sets(heawood)[::7]:
            sigma = IndependentSet.from_mask(14, int(mask))
            for v in range(14):
                assert 0 <= s_stat(heawood, sigma, v) <= 3
                assert w_stat(heawood, sigma, v, phi) <= 12 * 3
                assert (1 + lam) ** -3 <= r_stat(heawood, sigma, v, lam) <= 1

    def test_length_checked(self, path4: Graph) -> None:
        with pytest.raises(LengthMismatchError):
            s_stat(path4, np.zeros(3, dtype=bool), 0)


class TestHeaviness:
    """ρ-heavy vertices and the above-suspicion classifier."""

    def test_empty_set(self, petersen: Graph) -> None:
        empty = IndependentSet.empty(10)
        for v in range(10):
            assert not is_heavy(petersen, empty, v, 0.1)
            assert above_suspicion(petersen, empty, v, 0.1, 3)

    def test_packed_two_ball(self, heawood: Graph) -> None:
        sigma = greedy_maximal_independent_set(heawood)
        b2, _ = heavy_counts(heawood, sigma, 0)
        assert b2 > 0
        assert is_heavy(heawood, sigma, 0, b2 / 3)
        assert not above_suspicion(heawood, sigma, 0, b2 / 3, 0)

    def test_one_ball_threshold(self) -> None:
        g = named_graph("star:3")
        sigma = IndependentSet.from_vertices(4, [1, 2, 3])
        assert heavy_counts(g, sigma, 0) == (3, 3)
        # ρΔ/ln Δ = 3ρ/ln 3 ≤ 3 iff ρ ≤ ln 3
        assert is_heavy(g, sigma, 0, 0.999 * math.log(3))
        assert not is_heavy(g, sigma, 0, 1.2)

    def test_classifier_matches_scalar_version(self, petersen: Graph) -> None:
        classifier = HeavinessClassifier(petersen, 0.7)
        for mask in enumerate_independent_sets(petersen):
            sigma = IndependentSet.from_mask(10, int(mask))
            heavy = classifier.heavy_mask(sigma)
            for v in range(10):
                assert heavy[v] == is_heavy(petersen, sigma, v, 0.7)
            assert classifier.above_suspicion(sigma, 0, 1) == above_suspicion(petersen, sigma, 0, 0.7, 1)

    def test_degree_and_rho_validated(self, path4: Graph, petersen: Graph) -> None:
        with pytest.raises(DomainError):
            is_heavy(path4, IndependentSet.empty(4), 0, 1.0)
        with pytest.raises(DomainError):
            is_heavy(petersen, IndependentSet.empty(10), 0, 0.0)

    @pytest.mark.slow
    def test_interpolated_sets_are_not_twice_heavy(self, petersen: Graph) -> None:
        rho = 0.5
        light = HeavinessClassifier(petersen, rho)
        double = HeavinessClassifier(petersen, 2 * rho)
        sets = [IndependentSet.from_mask(10, int(m)) for m in enumerate_independent_sets(petersen)]
        light_masks = [light.heavy_mask(s) for s in sets]
        for (i, x), (j, y) in itertools.product(enumerate(sets), repeat=2):
            both_light = ~(light_masks[i] | light_masks[j])
            if not both_light.any():
                continue
            for z in interpolation_path(x, y):
                assert not np.any(double.heavy_mask(z) & both_light)

    def test_interpolation_path_shape(self) -> None:
        x = IndependentSet.from_vertices(5, [0, 2])
        y = IndependentSet.from_vertices(5, [2, 4])
        path = interpolation_path(x, y)
        assert path[0] == x
        assert path[-1] == y
        assert len(path) == 3
        for a, b in zip(path, path[1:]):
            assert int(np.sum(a.occupied != b.occupied)) == 1


class TestWatching:
    """Checkpoint helpers used by the estimators."""

    def test_watch_unoccupied_on_single_vertex(self, single_vertex: Graph) -> None:
        lam = 1.0
        state = ChainState(single_vertex, lam, seed=12)
        hits = watch_unoccupied(state, 0, 200_000, 1)
        assert abs(hits / 200_000 - 0.5) <= 4 * math.sqrt(0.25 / 200_000)
        assert state.step_count == 200_000

    def test_record_masks_spacing(self, path4: Graph) -> None:
        state = ChainState(path4, 1.0, seed=2)
        masks = record_masks(state, 10, 7)
        assert masks.size == 10
        assert state.step_count == 70
        assert masks[-1] == sum(1 << v for v in state.occupied_vertices())

    def test_record_masks_limits(self) -> None:
        with pytest.raises(DomainError):
            record_masks(ChainState(Graph.empty(63), 1.0), 1, 1)
        with pytest.raises(DomainError):
            watch_unoccupied(ChainState(Graph.empty(2), 1.0), 0, 1, 0)
