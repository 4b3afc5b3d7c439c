import json

import numpy as np
import pytest

from synthpde.basis import BoundaryCondition
from synthpde.dataset import (
    MANIFEST_FILENAME,
    DatasetError,
    MissingArrayFileError,
    RandomField,
    ShapeMismatchError,
    UnknownVersionError,
    generate_dataset,
    load_arrays,
    ood_rhs,
    operator_for,
    read_dataset,
    read_manifest,
    render_sample,
    sha256_of_file,
)
from synthpde.fields import FieldSpec
from synthpde.grid import Grid
from synthpde.operators import Operator

DIRICHLET = BoundaryCondition.DIRICHLET
NEUMANN = BoundaryCondition.NEUMANN


# ---------------------------------------------------------------- grids


def test_boundary_grid_coordinates():
    g = Grid(5)
    np.testing.assert_array_equal(g.coords(), [0.0, 0.25, 0.5, 0.75, 1.0])
    assert g.spacing == 0.25
    assert g.shape == (5, 5)


def test_interior_grid_coordinates():
    g = Grid(4, includes_boundary=False)
    np.testing.assert_array_equal(g.coords(), [0.25, 0.5, 0.75])
    assert g.spacing == 0.25
    assert g.shape == (3, 3)


def test_grid_coordinates_monotone_in_unit_interval():
    for g in (Grid(64), Grid(64, includes_boundary=False), Grid(3)):
        c = g.coords()
        assert np.all(np.diff(c) > 0)
        assert c[0] >= 0.0 and c[-1] <= 1.0
        # each coordinate is the correctly rounded k/(S-1), so consecutive
        # differences match the nominal spacing only to rounding
        np.testing.assert_allclose(np.diff(c), g.spacing, rtol=1e-14)


def test_grid_rejects_too_small():
    with pytest.raises(ValueError):
        Grid(2)


def test_refined_grids_nest_bitwise():
    for g in (Grid(33), Grid(64, includes_boundary=False)):
        fine = g.refined()
        assert fine.spacing == pytest.approx(g.spacing / 2, rel=1e-15)
        coarse_in_fine = fine.coords()[::2] if g.includes_boundary else fine.coords()[1::2]
        np.testing.assert_array_equal(coarse_in_fine, g.coords())


def test_meshgrid_axis_convention():
    X, Y = Grid(3).meshgrid()
    np.testing.assert_array_equal(X[:, 0], [0.0, 0.5, 1.0])  # x varies along axis 0
    np.testing.assert_array_equal(Y[0, :], [0.0, 0.5, 1.0])


# ---------------------------------------------------------------- rendering


def test_zero_coefficient_field_renders_all_zeros():
    zero = RandomField(DIRICHLET, np.zeros((1, 1)))
    f, u = render_sample(zero, Operator.poisson(), Grid(5))
    assert np.all(f == 0.0)
    assert np.all(u == 0.0)


def test_operator_for_tags():
    assert operator_for("poisson").kind.value == "poisson"
    assert operator_for("semilinear").kind.value == "semilinear"
    assert operator_for("divform-fixed").matrix.family.value == "fixed"
    assert operator_for("divform-param", (1, 2, 3, 4)).matrix.params == (1.0, 2.0, 3.0, 4.0)
    with pytest.raises(ValueError):
        operator_for("divform-param")  # params required
    with pytest.raises(ValueError):
        operator_for("heat-equation")


# ---------------------------------------------------------------- round trips


@pytest.mark.parametrize("dtype", ["float32", "float64"])
def test_write_read_round_trip_bit_exact(dataset_factory, dtype):
    path, manifest = dataset_factory(tag="poisson", n=4, res=9, dtype=dtype)
    records = list(read_dataset(path))
    assert len(records) == 4
    spec = manifest.field_spec
    grid = manifest.grid
    from synthpde.fields import sample_field

    for rec in records:
        fld = sample_field(spec, rec.sample_index)
        f, u = render_sample(fld, operator_for("poisson"), grid)
        np.testing.assert_array_equal(rec.f_grid, f.astype(dtype))
        np.testing.assert_array_equal(rec.u_grid, u.astype(dtype))
        assert rec.n_modes == fld.n_modes
        assert rec.f_grid.dtype == np.dtype(dtype)


def test_parametric_dataset_carries_coefficient_channels(dataset_factory):
    path, manifest = dataset_factory(tag="divform-param", n=3, res=9)
    grid = manifest.grid
    X, Y = grid.meshgrid()
    for rec in read_dataset(path):
        m1, m2, m3, m4 = rec.matrix_params
        assert all(0.1 <= m <= 5.0 for m in rec.matrix_params)
        np.testing.assert_array_equal(rec.alpha_grid, m1 * X + m2 * Y)
        np.testing.assert_array_equal(rec.delta_grid, m3 * X + m4 * Y)


def test_nonparametric_dataset_has_no_coefficient_channels(dataset_factory):
    path, _ = dataset_factory(tag="semilinear", n=2, res=9)
    rec = next(iter(read_dataset(path)))
    assert rec.alpha_grid is None
    assert rec.delta_grid is None
    assert rec.matrix_params is None


def test_dirichlet_records_have_exact_zero_boundaries(dataset_factory):
    for dtype in ("float32", "float64"):
        path, _ = dataset_factory(tag="poisson", bc=DIRICHLET, n=4, res=9, dtype=dtype)
        for rec in read_dataset(path):
            u = rec.u_grid
            assert np.all(u[0, :] == 0.0)
            assert np.all(u[-1, :] == 0.0)
            assert np.all(u[:, 0] == 0.0)
            assert np.all(u[:, -1] == 0.0)


# ---------------------------------------------------------------- determinism


def test_identical_runs_are_byte_identical(tmp_path):
    spec = FieldSpec(NEUMANN, 1, 10, master_seed=77)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        generate_dataset(spec, "divform-param", Grid(9), 6, out, dtype="float32")
        outs.append(out)
    for fname in ("f.bin", "u.bin", "alpha.bin", "delta.bin", "modes.bin", "matrix_params.bin"):
        assert sha256_of_file(outs[0] / fname) == sha256_of_file(outs[1] / fname)
    m0 = read_manifest(outs[0] / MANIFEST_FILENAME).to_dict()
    m1 = read_manifest(outs[1] / MANIFEST_FILENAME).to_dict()
    m0.pop("created_at")
    m1.pop("created_at")
    assert m0 == m1


def test_worker_count_does_not_change_bytes(tmp_path):
    spec = FieldSpec(DIRICHLET, 1, 8, master_seed=13)
    generate_dataset(spec, "poisson", Grid(9), 10, tmp_path / "w1", workers=1, chunk_size=3)
    generate_dataset(spec, "poisson", Grid(9), 10, tmp_path / "w2", workers=2, chunk_size=3)
    for fname in ("f.bin", "u.bin", "modes.bin"):
        assert sha256_of_file(tmp_path / "w1" / fname) == sha256_of_file(tmp_path / "w2" / fname)


def test_chunk_size_does_not_change_bytes(tmp_path):
    spec = FieldSpec(DIRICHLET, 1, 8, master_seed=13)
    generate_dataset(spec, "semilinear", Grid(9), 7, tmp_path / "c2", chunk_size=2)
    generate_dataset(spec, "semilinear", Grid(9), 7, tmp_path / "c7", chunk_size=7)
    for fname in ("f.bin", "u.bin", "modes.bin"):
        assert sha256_of_file(tmp_path / "c2" / fname) == sha256_of_file(tmp_path / "c7" / fname)


# ---------------------------------------------------------------- validation and errors


def test_generate_validates_arguments(tmp_path):
    spec = FieldSpec(DIRICHLET, 1, 5, master_seed=0)
    with pytest.raises(ValueError):
        generate_dataset(spec, "burgers", Grid(9), 1, tmp_path / "x")
    with pytest.raises(ValueError):
        generate_dataset(spec, "poisson", Grid(9), 0, tmp_path / "x")
    with pytest.raises(ValueError):
        generate_dataset(spec, "poisson", Grid(9), 1, tmp_path / "x", dtype="float16")
    with pytest.raises(ValueError):
        generate_dataset(spec, "poisson", Grid(9), 1, tmp_path / "x", workers=0)


def test_missing_array_file_is_distinct_error(dataset_factory):
    path, _ = dataset_factory(n=2, res=9)
    (path.parent / "u.bin").unlink()
    with pytest.raises(MissingArrayFileError, match="u.bin"):
        list(read_dataset(path))


def test_truncated_array_file_is_shape_mismatch(dataset_factory):
    path, manifest = dataset_factory(n=2, res=9)
    fbin = path.parent / "f.bin"
    data = fbin.read_bytes()
    fbin.write_bytes(data[:-8])  # drop one float64 element
    with pytest.raises(ShapeMismatchError, match="f.bin"):
        list(read_dataset(path))


def test_unknown_manifest_version_rejected(dataset_factory):
    path, _ = dataset_factory(n=2, res=9)
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(UnknownVersionError, match="99"):
        read_manifest(path)


def test_missing_manifest_reported_with_path(tmp_path):
    with pytest.raises(MissingArrayFileError, match="manifest"):
        read_manifest(tmp_path / "nope" / "manifest.json")


def test_corrupt_manifest_json_reported(dataset_factory):
    path, _ = dataset_factory(n=2, res=9)
    path.write_text("{not json")
    with pytest.raises(DatasetError, match="JSON"):
        read_manifest(path)


def test_failed_generation_removes_partial_arrays(tmp_path, monkeypatch):
    import synthpde.dataset as ds

    calls = {"n": 0}
    real = ds._render_chunk

    def explode_on_second(*args):
        calls["n"] += 1
        if calls["n"] == 2:
            raise RuntimeError("synthetic failure")
        return real(*args)

    monkeypatch.setattr(ds, "_render_chunk", explode_on_second)
    spec = FieldSpec(DIRICHLET, 1, 5, master_seed=0)
    out = tmp_path / "broken"
    with pytest.raises(RuntimeError):
        generate_dataset(spec, "poisson", Grid(9), 6, out, chunk_size=3)
    assert not (out / "f.bin").exists()
    assert not (out / MANIFEST_FILENAME).exists()


# ---------------------------------------------------------------- npy mirror


def test_npy_mirror_matches_raw_arrays(dataset_factory):
    path, manifest = dataset_factory(tag="divform-param", n=3, res=9, npy_mirror=True)
    base = path.parent
    _, arrays = load_arrays(path)
    for name, info in manifest.arrays.items():
        mirrored = np.load(base / (info.file.replace(".bin", ".npy")))
        np.testing.assert_array_equal(mirrored, arrays[name])


# ---------------------------------------------------------------- ood right-hand sides


def test_ood_rhs_pinned_values():
    g = Grid(3)  # coords 0, 0.5, 1
    linear = ood_rhs("linear_diff", g)
    corner = ood_rhs("corner_abs", g)
    assert linear[1, 1] == 0.0  # x = y = 0.5
    assert linear[2, 0] == 1.0  # x = 1, y = 0
    assert corner[1, 1] == 0.0
    assert corner[0, 0] == 0.25
    assert linear.shape == corner.shape == (3, 3)
    with pytest.raises(ValueError):
        ood_rhs("sinusoid", g)
