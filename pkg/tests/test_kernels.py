import numpy as np
import pytest

from iotdefense import kernels
from iotdefense.harm import PathCounter
from iotdefense.network import build_network
from iotdefense.optimizer import DeploymentProblem
from iotdefense.scenarios import scaled_network

needs_compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="extension not built")


def _args(network, dvs):
    c = PathCounter(network)
    return (c.counts, c.adj, c.is_target, c.is_entry, c.patch_col, c.order, dvs, c.max_len)


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")


@needs_compiled
@pytest.mark.parametrize("n_iot", [50, 125])
def test_count_paths_backends_agree(n_iot, pacs):
    for net in (pacs, build_network(scaled_network(n_iot))):
        dvs = DeploymentProblem(net).valid_space()[:700]
        r_py, d_py = kernels.python_backend.count_paths(*_args(net, dvs))
        r_c, d_c = kernels.compiled_backend.count_paths(*_args(net, dvs))
        assert np.array_equal(r_py, r_c) and np.array_equal(d_py, d_c)


@needs_compiled
def test_ranks_backends_agree():
    rng = np.random.default_rng(0)
    for n in (1, 2, 17, 300):
        F = rng.integers(0, 5, size=(n, 3)).astype(float)
        assert np.array_equal(kernels.python_backend.nondominated_ranks(F), kernels.compiled_backend.nondominated_ranks(F))
