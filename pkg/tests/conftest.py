import pytest

from acsbm import Graph, Partition


@pytest.fixture
def triangle_pair() -> Graph:
    """Two disjoint triangles on nodes {0,1,2} and {3,4,5}."""
    return Graph(6, [(0, 1, 1), (1, 2, 1), (0, 2, 1),
                     (3, 4, 1), (4, 5, 1), (3, 5, 1)])


@pytest.fixture
def triangle_split(triangle_pair) -> Partition:
    return Partition(2, [0, 0, 0, 1, 1, 1])
