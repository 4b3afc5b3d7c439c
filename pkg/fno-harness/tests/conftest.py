import pytest
from synthpde import BoundaryCondition, FieldSpec, Grid, generate_dataset


def _make(tmp_path_factory, tag, bc, n, seed, res=17, m_max=6):
    out = tmp_path_factory.mktemp("ds") / tag
    spec = FieldSpec(bc, 1, m_max, master_seed=seed)
    generate_dataset(spec, tag, Grid(res), n, out)
    return out / "manifest.json"


@pytest.fixture(scope="session")
def poisson_manifest(tmp_path_factory):
    return _make(tmp_path_factory, "poisson", BoundaryCondition.DIRICHLET, 24, 77)


@pytest.fixture(scope="session")
def neumann_manifest(tmp_path_factory):
    return _make(tmp_path_factory, "poisson", BoundaryCondition.NEUMANN, 8, 78)


@pytest.fixture(scope="session")
def param_manifest(tmp_path_factory):
    return _make(tmp_path_factory, "divform-param", BoundaryCondition.DIRICHLET, 8, 79)
