import math

import numpy as np
import pytest

from energame.graph import Graph

SQRT2 = math.sqrt(2.0)


def random_graph(rng: np.random.Generator, n: int, density: float = 0.5) -> Graph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return Graph.from_edges(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
