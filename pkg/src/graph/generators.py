"""
Random regular, random bipartite regular and named graphs.
"""
import math
from collections import defaultdict
from typing import Dict, Literal, Optional, Set, Tuple

import networkx as nx
import numpy as np

from src.config import settings
from src.errors import DomainError, GraphError, RejectionsExhaustedError
from src.graph.core import Graph
from src.utils.logging import get_graph_logger
from src.utils.rng import SeedLike, make_rng

logger = get_graph_logger()

PairingMethod = Literal["auto", "rejection", "incremental", "networkx"]

# Below this estimated acceptance of a whole pairing, rejection is hopeless.
MIN_REJECTION_ACCEPTANCE = 1e-3

Edge = Tuple[int, int]


def regular_acceptance(max_degree: int, bipartite: bool = False) -> float:
    """Asymptotic probability that a uniform pairing is simple."""
    d = max_degree
    if bipartite:
        return math.exp(-((d - 1) ** 2) / 2)
    return math.exp(-(d * d - 1) / 4)


def _pick_method(method: PairingMethod, acceptance: float, bipartite: bool) -> str:
    if method == "networkx" and bipartite:
        raise DomainError("the networkx generator covers plain regular graphs only")
    if method == "auto":
        if acceptance >= MIN_REJECTION_ACCEPTANCE:
            return "rejection"
        return "incremental" if bipartite else "networkx"
    return method


# === Whole-pairing rejection ===

def _try_pairing(rng: np.random.Generator, left: np.ndarray, right: Optional[np.ndarray], n: int) -> Optional[np.ndarray]:
    if right is None:
        pairs = rng.permutation(left).reshape(-1, 2)
    else:
        pairs = np.column_stack([left, rng.permutation(right)])
    lo = pairs.min(axis=1)
    hi = pairs.max(axis=1)
    if np.any(lo == hi):
        return None
    keys = lo * n + hi
    if np.unique(keys).size != keys.size:
        return None
    return np.column_stack([lo, hi])


# === Incremental pairing (keep good pairs, re-pair the leftovers) ===

def _suitable(edges: Set[Edge], potential: Dict[int, int], bipartite_split: Optional[int]) -> bool:
    if not potential:
        return True
    nodes = list(potential)
    for i, s1 in enumerate(nodes):
        for s2 in nodes[:i]:
            a, b = (s1, s2) if s1 < s2 else (s2, s1)
            if bipartite_split is not None and not (a < bipartite_split <= b):
                continue
            if (a, b) not in edges:
                return True
    return False


def _try_incremental(rng: np.random.Generator, n: int, d: int, bipartite_split: Optional[int]) -> Optional[Set[Edge]]:
    edges: Set[Edge] = set()
    if bipartite_split is None:
        stubs = list(range(n)) * d
        right_stubs: list = []
    else:
        stubs = list(range(bipartite_split)) * d
        right_stubs = list(range(bipartite_split, n)) * d

    while stubs:
        potential: Dict[int, int] = defaultdict(int)
        if bipartite_split is None:
            rng.shuffle(stubs)
            pairs = zip(stubs[0::2], stubs[1::2])
        else:
            rng.shuffle(right_stubs)
            pairs = zip(stubs, right_stubs)
        for s1, s2 in pairs:
            a, b = (s1, s2) if s1 < s2 else (s2, s1)
            if a != b and (a, b) not in edges:
                edges.add((a, b))
            else:
                potential[s1] += 1
                potential[s2] += 1

        if not _suitable(edges, potential, bipartite_split):
            return None

        leftovers = [node for node, count in sorted(potential.items()) for _ in range(count)]
        if bipartite_split is None:
            stubs = leftovers
        else:
            stubs = [x for x in leftovers if x < bipartite_split]
            right_stubs = [x for x in leftovers if x >= bipartite_split]
    return edges


def _generate(n: int, d: int, seed: SeedLike, attempts: Optional[int], method: PairingMethod, bipartite_split: Optional[int]) -> Graph:
    rng = make_rng(seed)
    budget = attempts or settings.regular_attempts
    chosen = _pick_method(method, regular_acceptance(d, bipartite_split is not None), bipartite_split is not None)
    if chosen == "networkx":
        graph = Graph.from_networkx(nx.random_regular_graph(d, n, seed=int(rng.integers(2**31))))
        logger.debug("✅ Regular graph generated", n=n, degree=d, method=chosen)
        return graph

    if bipartite_split is None:
        left = np.repeat(np.arange(n, dtype=np.int64), d)
        right = None
    else:
        left = np.repeat(np.arange(bipartite_split, dtype=np.int64), d)
        right = np.repeat(np.arange(bipartite_split, n, dtype=np.int64), d)

    for attempt in range(1, budget + 1):
        if chosen == "rejection":
            pairs = _try_pairing(rng, left, right, n)
            if pairs is not None:
                logger.debug("✅ Pairing accepted", n=n, degree=d, attempts=attempt, method=chosen)
                return Graph.from_edges(n, map(tuple, pairs.tolist()))
        else:
            edges = _try_incremental(rng, n, d, bipartite_split)
            if edges is not None:
                logger.debug("✅ Pairing accepted", n=n, degree=d, attempts=attempt, method=chosen)
                return Graph.from_edges(n, sorted(edges))

    logger.error("❌ No simple pairing found", n=n, degree=d, attempts=budget, method=chosen)
    raise RejectionsExhaustedError(
        f"no simple {d}-regular pairing on {n} vertices within {budget} attempts ({chosen})"
    )


def random_regular(
    n: int,
    degree: int,
    seed: SeedLike = None,
    attempts: Optional[int] = None,
    method: PairingMethod = "auto",
) -> Graph:
    """Random simple ``degree``-regular graph by configuration-model pairing.

    ``rejection`` redraws the whole pairing until it is simple (exactly uniform).
    ``incremental`` keeps the simple pairs and re-pairs the leftover stubs under an
    attempt budget. ``networkx`` hands the same scheme to ``nx.random_regular_graph``;
    both are only asymptotically uniform, for degree O(n^(1/3−ε)).
    ``auto`` picks rejection while its acceptance estimate is at least 1e-3 and
    ``networkx`` below that, and builds dense graphs (2·degree > n−1) as the
    complement of a random (n−1−degree)-regular graph.
    """
    if n < 0 or degree < 0:
        raise DomainError("n and degree must be nonnegative")
    if (n * degree) % 2:
        raise DomainError(f"n * degree must be even (got {n} * {degree})")
    if degree >= max(n, 1):
        raise DomainError(f"degree {degree} must be smaller than n={n}")
    if degree == 0:
        return Graph.empty(n)
    if method == "auto" and 2 * degree > n - 1:
        sparse = random_regular(n, n - 1 - degree, seed, attempts, method)
        return Graph.from_networkx(nx.complement(sparse.to_networkx()))
    return _generate(n, degree, seed, attempts, method, None)


def random_regular_bipartite(
    n_per_side: int,
    degree: int,
    seed: SeedLike = None,
    attempts: Optional[int] = None,
    method: PairingMethod = "auto",
) -> Graph:
    """Random simple bipartite regular graph; sides are 0..N-1 and N..2N-1.

    At degrees where whole-pairing rejection is hopeless ``auto`` falls back to
    incremental pairing, which is not uniform.
    """
    if n_per_side < 0 or degree < 0:
        raise DomainError("n_per_side and degree must be nonnegative")
    if degree > n_per_side:
        raise DomainError(f"degree {degree} exceeds side size {n_per_side}")
    if degree == 0:
        return Graph.empty(2 * n_per_side)
    return _generate(2 * n_per_side, degree, seed, attempts, method, n_per_side)


def random_tree(n: int, seed: SeedLike = None) -> Graph:
    """Uniform labeled tree on n vertices via a random Prüfer sequence."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n <= 2:
        return Graph.from_edges(n, [(0, 1)] if n == 2 else [])
    rng = make_rng(seed)
    sequence = rng.integers(0, n, size=n - 2).tolist()
    return Graph.from_networkx(nx.from_prufer_sequence(sequence))


def named_graph(spec: str) -> Graph:
    """Build a graph from a short name.

    Supported: heawood, petersen, cycle:n, path:n, star:k (k leaves, center 0),
    complete:n, empty:n, grid:a:b, tree:n:seed.
    """
    name, *args = spec.strip().lower().split(":")
    try:
        numbers = [int(a) for a in args]
    except ValueError as e:
        raise GraphError(f"bad graph spec {spec!r}: {e}") from e

    builders = {
        ("heawood", 0): lambda: nx.heawood_graph(),
        ("petersen", 0): lambda: nx.petersen_graph(),
        ("cycle", 1): lambda: nx.cycle_graph(numbers[0]),
        ("path", 1): lambda: nx.path_graph(numbers[0]),
        ("star", 1): lambda: nx.star_graph(numbers[0]),
        ("complete", 1): lambda: nx.complete_graph(numbers[0]),
        ("empty", 1): lambda: nx.empty_graph(numbers[0]),
        ("grid", 2): lambda: nx.grid_2d_graph(numbers[0], numbers[1]),
    }
    if name == "tree" and len(numbers) == 2:
        return random_tree(numbers[0], seed=numbers[1])
    builder = builders.get((name, len(numbers)))
    if builder is None:
        raise GraphError(f"unknown graph spec {spec!r}")
    if any(x < 0 for x in numbers):
        raise GraphError(f"bad graph spec {spec!r}: negative size")
    return Graph.from_networkx(builder())
