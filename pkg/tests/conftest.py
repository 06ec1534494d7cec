import numpy as np
import pytest

from nlgnn.graph_data import Graph
from nlgnn.synthetic import generate_synthetic
from nlgnn.tensor import get_tape


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="运行耗时较长的验收测试")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 耗时较长的验收测试，需 --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="需要 --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def clean_tape():
    get_tape().clear()
    yield
    get_tape().clear()


def make_random_graph(n: int = 12, d: int = 4, num_classes: int = 3, p: float = 0.3,
                      seed: int = 0, name: str = "random") -> Graph:
    """Erdős–Rényi 随机图，标签轮流分配以保证每类都有节点"""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    edges = np.argwhere(upper)
    features = rng.normal(size=(n, d))
    labels = rng.permutation(np.arange(n) % num_classes)
    return Graph.from_edges(n, edges, features, labels, num_classes, name)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_graph():
    return make_random_graph()


@pytest.fixture
def path_graph():
    """0 - 1 - 2，标签 [0, 1, 0]"""
    features = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return Graph.from_edges(3, [[0, 1], [1, 2]], features, [0, 1, 0], 2, "path")


@pytest.fixture(scope="session")
def disassortative_graph():
    return generate_synthetic(n=300, num_classes=3, target_h=0.1, d=12, mean_degree=4.0,
                              feature_noise=0.2, seed=7, name="dis")
