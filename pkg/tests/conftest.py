import numpy as np
import pytest

import hypertv as hv


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so individual tests time only the math."""
    if "numba" in hv.available_backends():
        h = hv.Hypergraph(4, ((0, 1), (0, 1, 2), (0, 1, 2, 3)))
        model = hv.TvModel.from_hypergraph(h)
        f = np.linspace(0.1, 0.9, 4)
        hv.tv_total(model.operators, model.transform, f)
        hv.tv_gradient(model.operators, model.transform, f)
        obs = hv.Observation((0, 2), np.array([0.95, 0.05]))
        hv.recover(hv.SolverConfig(max_iters=3), obs, model)


@pytest.fixture
def demo7() -> hv.Hypergraph:
    """7 vertices; hyperedges of cardinality 3, 4, 2, 2."""
    return hv.Hypergraph(7, ((0, 1, 4), (1, 2, 3, 4), (2, 5), (5, 6)))


@pytest.fixture
def demo7_model(demo7) -> hv.TvModel:
    return hv.TvModel.from_hypergraph(demo7)


@pytest.fixture(scope="session")
def zoo():
    from importlib import resources

    data = resources.files("hypertv") / "data"
    schema = hv.load_schema(data / "zoo.schema.json")
    ds = hv.load_dataset(data / "zoo.csv", schema)
    return ds, schema
