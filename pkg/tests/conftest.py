"""Shared fixtures for the test suite."""

import json
import logging
from pathlib import Path

import numpy as np
import pytest

from treesieve.graph import Graph

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def deterministic_env(monkeypatch):
    """Pin environment settings so tests do not depend on the host."""
    monkeypatch.setenv("TREESIEVE_WORKERS", "1")
    monkeypatch.setenv("TREESIEVE_SEED", "0")
    monkeypatch.setenv("TREESIEVE_LOG_LEVEL", "WARNING")
    monkeypatch.delenv("TREESIEVE_COLOR_SUBSET_CAP", raising=False)
    package_logger = logging.getLogger("treesieve")
    package_logger.handlers.clear()
    package_logger.propagate = True
    package_logger.setLevel(logging.NOTSET)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def oracle_cases():
    """Hand-counted admissible walks."""
    return json.loads((FIXTURES / "oracle_cases.json").read_text())


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, v) for v in range(1, leaves + 1)])


@pytest.fixture
def p3() -> Graph:
    return path_graph(3)


@pytest.fixture
def p5() -> Graph:
    return path_graph(5)


@pytest.fixture
def k3() -> Graph:
    return complete_graph(3)


@pytest.fixture
def c4() -> Graph:
    return cycle_graph(4)


@pytest.fixture
def star3() -> Graph:
    return star_graph(3)
