"""
Glauber dynamics states, the shared randomness stream and coupled pairs.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.errors import DomainError, IndependenceError, LengthMismatchError
from src.graph.core import Graph, OrientedView
from src.model.hardcore import IndependentSet, is_independent
from src.oracle.exact import exact_distribution
from src.dynamics import kernels
from src.utils.logging import get_sampler_logger
from src.utils.rng import SeedLike, make_rng, split_rng

logger = get_sampler_logger()

STREAM_BLOCK = 1 << 16


class UpdateStream:
    """Pre-drawn (vertex, uniform) pairs handed out in order.

    Blocks are always drawn the same way, so the sequence depends only on the seed and
    not on how callers chunk their requests.
    """

    def __init__(self, vertex_count: int, rng: np.random.Generator, block: int = STREAM_BLOCK):
        self.vertex_count = vertex_count
        self.rng = rng
        self.block = block
        self._vertices = np.empty(0, dtype=np.int64)
        self._uniforms = np.empty(0, dtype=np.float64)
        self._pos = 0
        self.consumed = 0

    def _refill(self) -> None:
        self._vertices = self.rng.integers(0, self.vertex_count, size=self.block, dtype=np.int64)
        self._uniforms = self.rng.random(self.block)
        self._pos = 0

    def take(self, count: int) -> Tuple[np.ndarray, np.ndarray]:
        if self.vertex_count == 0 or count <= 0:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
        parts_v: List[np.ndarray] = []
        parts_u: List[np.ndarray] = []
        need = count
        while need:
            if self._pos >= self._vertices.size:
                self._refill()
            k = min(need, self._vertices.size - self._pos)
            parts_v.append(self._vertices[self._pos:self._pos + k])
            parts_u.append(self._uniforms[self._pos:self._pos + k])
            self._pos += k
            need -= k
        self.consumed += count
        if len(parts_v) == 1:
            return parts_v[0], parts_u[0]
        return np.concatenate(parts_v), np.concatenate(parts_u)


def _influence_rows(indptr: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(indptr.size - 1, dtype=np.int64), np.diff(indptr))


class ChainState:
    """X_t: occupancy, occupied-neighbor counters, randomness and time.

    Over an OrientedView the blocked counter of x counts occupied vertices of N*(x),
    and the occupancy need not be independent in the base graph.
    """

    def __init__(
        self,
        graph: Graph,
        lam: float,
        occupied: Optional[Sequence[bool] | np.ndarray] = None,
        seed: SeedLike = None,
        view: Optional[OrientedView] = None,
        stream: Optional[UpdateStream] = None,
    ):
        if not lam > 0:
            raise DomainError(f"lambda must be positive, got {lam}")
        if view is not None and view.base is not graph and view.base != graph:
            raise DomainError("oriented view belongs to a different graph")
        n = graph.vertex_count
        self.graph = graph
        self.lam = float(lam)
        self.p_occupy = self.lam / (1.0 + self.lam)
        self.view = view

        occ = np.zeros(n, dtype=bool) if occupied is None else np.array(occupied, dtype=bool)
        if occ.shape != (n,):
            raise LengthMismatchError(f"occupancy has length {occ.size}, graph has {n} vertices")
        if view is None and not is_independent(graph, occ):
            raise IndependenceError("start state is not an independent set")
        self.occupied = occ

        self.indptr, self.indices = view.influence if view is not None else graph.csr()
        self.blocked = np.zeros(n, dtype=np.int64)
        self.recount_blocked()

        updates_rng, clock_rng = split_rng(seed, 2)
        self.stream = stream if stream is not None else UpdateStream(n, updates_rng)
        self.clock_rng = clock_rng
        self.step_count = 0
        self.clock = 0.0

    @classmethod
    def from_set(cls, graph: Graph, lam: float, sigma: IndependentSet, seed: SeedLike = None, view: Optional[OrientedView] = None) -> "ChainState":
        return cls(graph, lam, sigma.occupied, seed=seed, view=view)

    def recount_blocked(self) -> None:
        rows = _influence_rows(self.indptr)
        counts = np.bincount(self.indices, weights=self.occupied[rows].astype(np.float64), minlength=self.graph.vertex_count)
        self.blocked[:] = counts.astype(np.int64)

    @property
    def current(self) -> IndependentSet:
        return IndependentSet(self.occupied.copy())

    def occupied_vertices(self) -> List[int]:
        return [int(v) for v in np.flatnonzero(self.occupied)]

    def is_blocked(self, v: int) -> bool:
        return bool(self.blocked[v] > 0)

    def snapshot(self) -> str:
        """One trajectory record: step index followed by the occupied vertices."""
        return " ".join([str(self.step_count), *map(str, self.occupied_vertices())])

    def _apply(self, vertices: np.ndarray, uniforms: np.ndarray) -> None:
        kernels.glauber_steps(self.indptr, self.indices, self.occupied, self.blocked, vertices, uniforms, self.p_occupy)
        self.step_count += int(vertices.size)


def run(state: ChainState, steps: int) -> ChainState:
    """Apply ``steps`` discrete updates."""
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    remaining = steps
    while remaining > 0:
        chunk = min(remaining, STREAM_BLOCK)
        vertices, uniforms = state.stream.take(chunk)
        state._apply(vertices, uniforms)
        remaining -= chunk
    if state.graph.vertex_count == 0:
        state.step_count += steps
    return state


def glauber_step(state: ChainState) -> ChainState:
    """Pick v uniformly; blocked keeps X; otherwise occupy v w.p. λ/(1+λ)."""
    return run(state, 1)


def oriented_glauber_step(state: ChainState) -> ChainState:
    """Same rule with N*(v) deciding whether v is blocked."""
    if state.view is None:
        raise DomainError("oriented step needs a state built over an OrientedView")
    return run(state, 1)


def continuous_run(state: ChainState, duration: float) -> int:
    """Rate-1 global Poisson clock for ``duration`` time units; returns the number of events."""
    if duration < 0:
        raise DomainError("duration must be nonnegative")
    events = 0
    remaining = float(duration)
    while remaining > 0:
        waits = np.cumsum(state.clock_rng.standard_exponential(STREAM_BLOCK))
        k = int(np.searchsorted(waits, remaining, side="right"))
        events += k
        if k < waits.size:
            break
        remaining -= float(waits[-1])
    run(state, events)
    state.clock += float(duration)
    return events


def exact_gibbs_sample(g: Graph, lam: float, seed: SeedLike = None) -> IndependentSet:
    """One exact draw from μ through the oracle table."""
    table = exact_distribution(g, lam)
    mask = int(table.sample(make_rng(seed)))
    return IndependentSet.from_mask(g.vertex_count, mask)


# === Coupled pairs ===

class CoupledPair:
    """Two chains driven by one stream: same vertex and same uniform each step."""

    def __init__(self, x: ChainState, y: ChainState, weights: Optional[np.ndarray] = None):
        if x.graph.vertex_count != y.graph.vertex_count or x.lam != y.lam:
            raise DomainError("coupled chains need the same graph size and lambda")
        if y.stream is not x.stream:
            raise DomainError("coupled chains must share one stream; build y with stream=x.stream")
        n = x.graph.vertex_count
        self.x = x
        self.y = y
        self.stream = x.stream
        self.weights = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
        self.disagree = x.occupied != y.occupied
        self.ever = self.disagree.copy()
        self.distance = np.array([float(self.disagree.sum()), float(self.weights[self.disagree].sum())])
        self.step_count = 0

    @classmethod
    def from_sets(
        cls,
        graph: Graph,
        lam: float,
        x0: IndependentSet | np.ndarray,
        y0: IndependentSet | np.ndarray,
        seed: SeedLike = None,
        x_view: Optional[OrientedView] = None,
        y_view: Optional[OrientedView] = None,
        weights: Optional[np.ndarray] = None,
    ) -> "CoupledPair":
        occ_x = x0.occupied if isinstance(x0, IndependentSet) else x0
        occ_y = y0.occupied if isinstance(y0, IndependentSet) else y0
        x = ChainState(graph, lam, occ_x, seed=seed, view=x_view)
        y = ChainState(graph, lam, occ_y, seed=seed, view=y_view, stream=x.stream)
        return cls(x, y, weights)

    def recompute_disagreements(self) -> np.ndarray:
        return self.x.occupied != self.y.occupied

    def disagreement_set(self) -> frozenset:
        return frozenset(int(v) for v in np.flatnonzero(self.disagree))

    def cumulative_disagreements(self) -> frozenset:
        return frozenset(int(v) for v in np.flatnonzero(self.ever))


def run_coupled(pair: CoupledPair, steps: int, trace: bool = False) -> Optional[np.ndarray]:
    """``steps`` coupled updates; with trace, the weighted distance after every step."""
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    out = np.empty(steps if trace else 0, dtype=np.float64)
    done = 0
    while done < steps:
        chunk = min(steps - done, STREAM_BLOCK)
        vertices, uniforms = pair.stream.take(chunk)
        kernels.coupled_steps(
            pair.x.indptr, pair.x.indices, pair.x.occupied, pair.x.blocked,
            pair.y.indptr, pair.y.indices, pair.y.occupied, pair.y.blocked,
            pair.disagree, pair.ever, pair.weights, pair.distance,
            vertices, uniforms, pair.x.p_occupy,
            out[done:done + chunk] if trace else out,
        )
        pair.x.step_count += int(vertices.size)
        pair.y.step_count += int(vertices.size)
        pair.step_count += int(vertices.size)
        done += chunk
    return out if trace else None


def coupled_step(pair: CoupledPair) -> CoupledPair:
    run_coupled(pair, 1)
    return pair


def hamming(pair: CoupledPair) -> int:
    """|X_t ⊕ Y_t|."""
    return int(pair.disagree.sum())


def weighted_distance(pair: CoupledPair, phi: Optional[np.ndarray] = None) -> float:
    """Σ_{v ∈ X_t ⊕ Y_t} Φ(v)."""
    weights = pair.weights if phi is None else np.asarray(getattr(phi, "values", phi), dtype=np.float64)
    return float(weights[pair.disagree].sum())


def record_masks(state: ChainState, count: int, spacing: int) -> np.ndarray:
    """Run count·spacing steps, returning the occupancy bitmask after every spacing-th step."""
    n = state.graph.vertex_count
    if n > 62:
        raise DomainError("bitmask recording supports at most 62 vertices")
    if spacing < 1:
        raise DomainError("spacing must be at least 1")
    out = np.empty(count, dtype=np.int64)
    mask_state = np.array([sum(1 << v for v in state.occupied_vertices())], dtype=np.int64)
    total = count * spacing
    done = written = 0
    while done < total:
        chunk = min(total - done, STREAM_BLOCK)
        vertices, uniforms = state.stream.take(chunk)
        written += kernels.glauber_steps_record(
            state.indptr, state.indices, state.occupied, state.blocked, vertices, uniforms,
            state.p_occupy, spacing, done, mask_state, out[written:],
        )
        state.step_count += chunk
        done += chunk
    return out


def watch_unoccupied(state: ChainState, target: int, count: int, spacing: int) -> int:
    """Run count·spacing steps; how many of the count checkpoints found target unoccupied."""
    if spacing < 1:
        raise DomainError("spacing must be at least 1")
    total = count * spacing
    done = hits = 0
    while done < total:
        chunk = min(total - done, STREAM_BLOCK)
        vertices, uniforms = state.stream.take(chunk)
        _, empty_hits = kernels.glauber_steps_watch(
            state.indptr, state.indices, state.occupied, state.blocked, vertices, uniforms,
            state.p_occupy, target, spacing, done,
        )
        hits += int(empty_hits)
        state.step_count += chunk
        done += chunk
    return hits
