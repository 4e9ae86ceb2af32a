import pytest

from encsel.graph import DirectedGraph, parse_facts

#: The 4-node, 6-arc example graph used throughout the test suite.
G4_TEXT = (
    "node(1..4).\n"
    "link(1,2).link(1,3).link(2,1).link(3,4).link(4,2).link(4,3).\n"
)


@pytest.fixture
def g4() -> DirectedGraph:
    return parse_facts(G4_TEXT)
