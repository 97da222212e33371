from fractions import Fraction

import pytest

from qcsched.ldpc import data_path, layer_stats, load_base_graph, nr_base_graph, select_rate


@pytest.fixture(scope="session")
def toy4():
    return load_base_graph(data_path("toy4.txt"))


@pytest.fixture(scope="session")
def toy4_stats(toy4):
    return layer_stats(toy4)


@pytest.fixture(scope="session")
def hamming84():
    return load_base_graph(data_path("hamming84.txt"))


@pytest.fixture(scope="session")
def tree7():
    return load_base_graph(data_path("tree7.txt"))


@pytest.fixture(scope="session")
def bg1():
    return nr_base_graph("bg1", 384)


@pytest.fixture(scope="session")
def bg1_half(bg1):
    return select_rate(bg1, Fraction(1, 2))
