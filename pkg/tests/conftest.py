"""Shared fixtures for the hardcore-lab test suite."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pytest

from src.graph.core import Graph
from src.graph.generators import named_graph, random_tree

PINS_PATH = Path(__file__).parent / "data" / "regression_pins.json"


@pytest.fixture
def triangle() -> Graph:
    """K3."""
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path4() -> Graph:
    """Path 0-1-2-3."""
    return named_graph("path:4")


@pytest.fixture
def star5() -> Graph:
    """Star with center 0 and four leaves."""
    return named_graph("star:4")


@pytest.fixture
def cycle4() -> Graph:
    return named_graph("cycle:4")


@pytest.fixture
def cycle5() -> Graph:
    return named_graph("cycle:5")


@pytest.fixture
def k4() -> Graph:
    return named_graph("complete:4")


@pytest.fixture
def heawood() -> Graph:
    """3-regular, girth 6, 14 vertices."""
    return named_graph("heawood")


@pytest.fixture
def petersen() -> Graph:
    return named_graph("petersen")


@pytest.fixture
def single_vertex() -> Graph:
    return Graph.empty(1)


@pytest.fixture
def single_edge() -> Graph:
    return Graph.from_edges(2, [(0, 1)])


@pytest.fixture
def random_trees() -> List[Graph]:
    """Seeded random trees with 2..30 vertices."""
    return [random_tree(n, seed=100 + n) for n in (2, 5, 9, 14, 22, 30)]


@pytest.fixture
def small_connected() -> List[Graph]:
    """A handful of small connected graphs with cycles."""
    return [named_graph(spec) for spec in ("cycle:4", "cycle:5", "complete:4", "grid:2:3", "petersen")]


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator for random fields and starts."""
    return np.random.default_rng(12345)


def load_pin(name: str) -> Dict[str, Any]:
    """Frozen regression pin; a missing pin or metric value is a failure."""
    pins = json.loads(PINS_PATH.read_text(encoding="utf-8"))
    pin = pins.get(name)
    if pin is None:
        pytest.fail(f"regression pin {name!r} is missing from {PINS_PATH.name}")
    missing = [metric for metric, value in pin.get("metrics", {}).items() if value is None]
    if not pin.get("metrics") or missing:
        pytest.fail(f"regression pin {name!r} has no value for {missing or 'any metric'}")
    return pin
