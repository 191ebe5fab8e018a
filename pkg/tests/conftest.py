import os
from pathlib import Path

import numpy as np
import pytest

from netpoison.graph import Graph, build_graph

REPO_ROOT = Path(__file__).resolve().parents[1]


def data_dir() -> Path:
    return Path(os.environ.get("NETPOISON_DATA", REPO_ROOT / "data"))


def require_dataset(name: str) -> tuple[str, str]:
    """Paths of a real-world dataset, skipping the test when absent."""
    edges = data_dir() / f"{name}.edges"
    labels = data_dir() / f"{name}.labels"
    if not (edges.exists() and labels.exists()):
        pytest.skip(f"dataset '{name}' not present under {data_dir()} "
                    "(run scripts/fetch_datasets.py on a networked machine)")
    return str(edges), str(labels)


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    """Erdos-Renyi style test graph."""
    mask = rng.random((n, n)) < p
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if mask[u, v]]
    return build_graph(n, edges)


@pytest.fixture
def two_triangles() -> Graph:
    return build_graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


@pytest.fixture
def karate() -> Graph:
    import networkx as nx
    g = nx.karate_club_graph()
    return build_graph(g.number_of_nodes(), list(g.edges()))
