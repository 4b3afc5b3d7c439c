import pytest

from synthpde import BoundaryCondition, FieldSpec, Grid, generate_dataset


@pytest.fixture
def dataset_factory(tmp_path):
    """Build small datasets in a temp dir; returns (manifest_path, manifest)."""

    counter = {"n": 0}

    def make(
        tag="poisson",
        bc=BoundaryCondition.DIRICHLET,
        n=5,
        res=17,
        dtype="float64",
        seed=1234,
        m_min=1,
        m_max=8,
        workers=1,
        npy_mirror=False,
    ):
        counter["n"] += 1
        out = tmp_path / f"ds{counter['n']}"
        spec = FieldSpec(bc, m_min, m_max, master_seed=seed)
        manifest = generate_dataset(
            spec,
            tag,
            Grid(res),
            n,
            out,
            dtype=dtype,
            workers=workers,
            npy_mirror=npy_mirror,
        )
        return out / "manifest.json", manifest

    return make
