import pytest

from distsketch import Rng, WeightedGraph, all_pairs, generate, load_edge_list

P3 = "0 1 1\n1 2 1"
T3 = "0 1 1\n1 2 1\n0 2 10"
P4 = "0 1 1\n1 2 1\n2 3 1"


@pytest.fixture(scope="session")
def p3() -> WeightedGraph:
    return load_edge_list(P3)


@pytest.fixture(scope="session")
def t3() -> WeightedGraph:
    return load_edge_list(T3)


@pytest.fixture(scope="session")
def p4() -> WeightedGraph:
    return load_edge_list(P4)


@pytest.fixture(scope="session")
def er32() -> WeightedGraph:
    return generate("erdos_renyi", {"n": 32, "p": 0.2, "wmin": 1, "wmax": 16}, Rng(7))


@pytest.fixture(scope="session")
def er64() -> WeightedGraph:
    return generate("erdos_renyi", {"n": 64, "p": 0.12, "wmin": 1, "wmax": 16}, Rng(7))


@pytest.fixture(scope="session")
def er32_dist(er32):
    return all_pairs(er32)


@pytest.fixture(scope="session")
def er64_dist(er64):
    return all_pairs(er64)
