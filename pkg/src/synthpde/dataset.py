"""Dataset assembly and bit-exact serialization.

A dataset is a directory: one JSON manifest plus raw little-endian arrays,
one file per tensor, stacked sample-major as [N, S, S].  The manifest (a
versioned schema under a top-level ``"version"`` key) records everything
needed to regenerate or verify the data: operator tag, boundary family,
grid geometry, mode range, master seed, dtype, and the shape of every
array file.

Generation is deterministic: sample k is a pure function of
(master_seed, k), so reruns and different worker counts produce
byte-identical array files.  Workers only compute; the parent process
writes each output file serially in index order.  The manifest is written
last via an atomic rename, so a directory without a readable manifest is
never a valid dataset.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

import multiprocessing
import numpy as np

from .basis import BoundaryCondition
from .fields import FieldSpec, ModeTables, RandomField, eval_field_grid, sample_field_and_stream
from .grid import Grid
from .operators import CoefficientMatrix, Operator, sample_coefficient_matrix

__all__ = [
    "OPERATOR_TAGS",
    "MANIFEST_VERSION",
    "MANIFEST_FILENAME",
    "DatasetError",
    "MissingArrayFileError",
    "ShapeMismatchError",
    "UnknownVersionError",
    "ArrayInfo",
    "DatasetManifest",
    "SampleRecord",
    "operator_for",
    "render_sample",
    "generate_dataset",
    "read_manifest",
    "read_dataset",
    "load_arrays",
    "ood_rhs",
    "sha256_of_file",
]

OPERATOR_TAGS = ("poisson", "divform-fixed", "divform-param", "semilinear")
MANIFEST_VERSION = 1
MANIFEST_FILENAME = "manifest.json"

_DTYPES = {"float32": np.float32, "float64": np.float64, "int32": np.int32}


class DatasetError(Exception):
    """Base for dataset layout and serialization problems."""


class MissingArrayFileError(DatasetError):
    """The manifest references an array file that does not exist."""


class ShapeMismatchError(DatasetError):
    """An array file's byte length disagrees with its manifest shape."""


class UnknownVersionError(DatasetError):
    """The manifest schema version is not supported by this reader."""


def operator_for(tag: str, params=None) -> Operator:
    """Build the operator a tag denotes; params only for divform-param."""
    if tag == "poisson":
        return Operator.poisson()
    if tag == "semilinear":
        return Operator.semilinear()
    if tag == "divform-fixed":
        return Operator.divergence_form(CoefficientMatrix.fixed())
    if tag == "divform-param":
        if params is None:
            raise ValueError("divform-param needs 4 matrix parameters")
        return Operator.divergence_form(CoefficientMatrix.diagonal_linear(*params))
    raise ValueError(f"unknown operator tag {tag!r}; expected one of {OPERATOR_TAGS}")


@dataclass(frozen=True)
class ArrayInfo:
    """Location and layout of one raw array file."""

    file: str
    shape: tuple[int, ...]
    dtype: str

    @property
    def nbytes(self) -> int:
        n = 1
        for s in self.shape:
            n *= s
        return n * np.dtype(_DTYPES[self.dtype]).itemsize


@dataclass
class DatasetManifest:
    """Everything needed to read, regenerate, or verify a dataset."""

    operator: str
    bc: str
    points_per_side: int
    includes_boundary: bool
    n_samples: int
    min_modes: int
    max_modes: int
    master_seed: int
    dtype: str
    arrays: dict[str, ArrayInfo] = field(default_factory=dict)
    created_at: str = ""
    version: int = MANIFEST_VERSION

    @property
    def grid(self) -> Grid:
        return Grid(self.points_per_side, self.includes_boundary)

    @property
    def field_spec(self) -> FieldSpec:
        return FieldSpec(
            bc=BoundaryCondition(self.bc),
            min_modes=self.min_modes,
            max_modes=self.max_modes,
            master_seed=self.master_seed,
        )

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "operator": self.operator,
            "bc": self.bc,
            "points_per_side": self.points_per_side,
            "includes_boundary": self.includes_boundary,
            "n_samples": self.n_samples,
            "min_modes": self.min_modes,
            "max_modes": self.max_modes,
            "master_seed": self.master_seed,
            "dtype": self.dtype,
            "arrays": {
                name: {"file": a.file, "shape": list(a.shape), "dtype": a.dtype}
                for name, a in self.arrays.items()
            },
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        version = d.get("version")
        if version != MANIFEST_VERSION:
            raise UnknownVersionError(
                f"manifest version {version!r} not supported (reader handles {MANIFEST_VERSION})"
            )
        arrays = {
            name: ArrayInfo(file=a["file"], shape=tuple(a["shape"]), dtype=a["dtype"])
            for name, a in d["arrays"].items()
        }
        return cls(
            operator=d["operator"],
            bc=d["bc"],
            points_per_side=d["points_per_side"],
            includes_boundary=d["includes_boundary"],
            n_samples=d["n_samples"],
            min_modes=d["min_modes"],
            max_modes=d["max_modes"],
            master_seed=d["master_seed"],
            dtype=d["dtype"],
            arrays=arrays,
            created_at=d.get("created_at", ""),
            version=version,
        )

    def save(self, path: Path) -> None:
        """Write atomically: temp file in the same directory, then rename."""
        path = Path(path)
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise


def read_manifest(manifest_path) -> DatasetManifest:
    manifest_path = Path(manifest_path)
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise MissingArrayFileError(f"manifest not found: {manifest_path}") from None
    except json.JSONDecodeError as exc:
        raise DatasetError(f"manifest is not valid JSON: {manifest_path}: {exc}") from None
    return DatasetManifest.from_dict(data)


@dataclass
class SampleRecord:
    """One (f, u) pair plus per-sample metadata; grids are [ix, iy]."""

    sample_index: int
    f_grid: np.ndarray
    u_grid: np.ndarray
    n_modes: int
    alpha_grid: np.ndarray | None = None
    delta_grid: np.ndarray | None = None
    matrix_params: tuple[float, float, float, float] | None = None


def render_sample(
    field: RandomField,
    operator: Operator,
    grid: Grid,
    tables: ModeTables | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate (f_grid, u_grid) for one field in float64.

    The right-hand side comes from the analytic derivative channels; no
    discrete operator is involved anywhere in generation.
    """
    coords = grid.coords()
    d = eval_field_grid(field, coords, coords, tables)
    f = operator.apply(d, coords[:, None], coords[None, :])
    return np.ascontiguousarray(f), np.ascontiguousarray(d.u)


def _render_chunk(spec: FieldSpec, tag: str, grid: Grid, start: int, stop: int, dtype: str):
    """Compute samples [start, stop) and return their arrays.

    Runs in worker processes; returns plain arrays so the parent alone
    touches the output files.
    """
    np_dtype = _DTYPES[dtype]
    coords = grid.coords()
    tables = ModeTables(spec.max_modes, coords, coords)
    n = stop - start
    side = grid.shape[0]
    f_out = np.empty((n, side, side), dtype=np_dtype)
    u_out = np.empty((n, side, side), dtype=np_dtype)
    modes = np.empty(n, dtype=np.int32)
    parametric = tag == "divform-param"
    alpha = np.empty((n, side, side), dtype=np_dtype) if parametric else None
    delta = np.empty((n, side, side), dtype=np_dtype) if parametric else None
    params = np.empty((n, 4), dtype=np.float64) if parametric else None
    fixed_op = None if parametric else operator_for(tag)
    X, Y = coords[:, None], coords[None, :]
    for k in range(n):
        fld, gen = sample_field_and_stream(spec, start + k)
        if parametric:
            matrix = sample_coefficient_matrix(gen)
            op = Operator.divergence_form(matrix)
            a11, _, _, a22 = matrix.entries(X, Y)
            alpha[k] = np.broadcast_to(a11, (side, side))
            delta[k] = np.broadcast_to(a22, (side, side))
            params[k] = matrix.params
        else:
            op = fixed_op
        f, u = render_sample(fld, op, grid, tables)
        f_out[k] = f
        u_out[k] = u
        modes[k] = fld.n_modes
    out = {"f": f_out, "u": u_out, "modes": modes}
    if parametric:
        out["alpha"] = alpha
        out["delta"] = delta
        out["matrix_params"] = params
    return start, out


def generate_dataset(
    spec: FieldSpec,
    operator_tag: str,
    grid: Grid,
    n_samples: int,
    out_dir,
    dtype: str = "float32",
    workers: int = 1,
    npy_mirror: bool = False,
    chunk_size: int = 512,
) -> DatasetManifest:
    """Generate n_samples records and write them under out_dir.

    Sample k depends only on (spec.master_seed, k), and the parent writes
    chunks in index order, so the output bytes are independent of both
    ``workers`` and ``chunk_size``.  The manifest lands last, atomically;
    on failure the partial array files are removed.
    """
    if operator_tag not in OPERATOR_TAGS:
        raise ValueError(f"unknown operator tag {operator_tag!r}; expected one of {OPERATOR_TAGS}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if dtype not in ("float32", "float64"):
        raise ValueError(f"dtype must be float32 or float64, got {dtype!r}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    side = grid.shape[0]
    parametric = operator_tag == "divform-param"

    grid_shape = (n_samples, side, side)
    array_infos = {
        "f": ArrayInfo("f.bin", grid_shape, dtype),
        "u": ArrayInfo("u.bin", grid_shape, dtype),
        "modes": ArrayInfo("modes.bin", (n_samples,), "int32"),
    }
    if parametric:
        array_infos["alpha"] = ArrayInfo("alpha.bin", grid_shape, dtype)
        array_infos["delta"] = ArrayInfo("delta.bin", grid_shape, dtype)
        array_infos["matrix_params"] = ArrayInfo("matrix_params.bin", (n_samples, 4), "float64")

    bounds = list(range(0, n_samples, chunk_size)) + [n_samples]
    chunk_args = [
        (spec, operator_tag, grid, lo, hi, dtype)
        for lo, hi in zip(bounds[:-1], bounds[1:])
    ]

    paths = {name: out_dir / info.file for name, info in array_infos.items()}
    handles = {}
    try:
        for name, p in paths.items():
            try:
                handles[name] = open(p, "wb")
            except OSError as exc:
                raise DatasetError(f"cannot open array file for writing: {p}: {exc}") from exc

        def write_chunk(chunk_out: dict) -> None:
            for name, arr in chunk_out.items():
                handles[name].write(arr.tobytes())

        if workers == 1:
            for args in chunk_args:
                _, chunk_out = _render_chunk(*args)
                write_chunk(chunk_out)
        else:
            ctx = multiprocessing.get_context("spawn")
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                for _, chunk_out in pool.map(_render_chunk, *zip(*chunk_args)):
                    write_chunk(chunk_out)
        for fh in handles.values():
            fh.close()
        handles.clear()
    except BaseException:
        for fh in handles.values():
            fh.close()
        for p in paths.values():
            try:
                os.unlink(p)
            except OSError:
                pass
        raise

    if npy_mirror:
        for name, info in array_infos.items():
            arr = np.memmap(paths[name], dtype=_DTYPES[info.dtype], mode="r", shape=info.shape)
            np.save(out_dir / (Path(info.file).stem + ".npy"), arr)

    manifest = DatasetManifest(
        operator=operator_tag,
        bc=spec.bc.value,
        points_per_side=grid.points_per_side,
        includes_boundary=grid.includes_boundary,
        n_samples=n_samples,
        min_modes=spec.min_modes,
        max_modes=spec.max_modes,
        master_seed=spec.master_seed,
        dtype=dtype,
        arrays=array_infos,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    manifest.save(out_dir / MANIFEST_FILENAME)
    return manifest


def load_arrays(manifest_path) -> tuple[DatasetManifest, dict[str, np.ndarray]]:
    """Open every array as a read-only memmap after validating the layout."""
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    arrays = {}
    for name, info in manifest.arrays.items():
        p = base / info.file
        if not p.exists():
            raise MissingArrayFileError(f"missing array file: {p} (array {name!r})")
        actual = p.stat().st_size
        if actual != info.nbytes:
            raise ShapeMismatchError(
                f"array file {info.file}: shape {info.shape} and dtype {info.dtype} "
                f"imply {info.nbytes} bytes, file has {actual}"
            )
        arrays[name] = np.memmap(p, dtype=_DTYPES[info.dtype], mode="r", shape=info.shape)
    return manifest, arrays


def read_dataset(manifest_path) -> Iterator[SampleRecord]:
    """Yield SampleRecords in index order, validating files up front."""
    manifest, arrays = load_arrays(manifest_path)
    parametric = "alpha" in arrays
    for k in range(manifest.n_samples):
        yield SampleRecord(
            sample_index=k,
            f_grid=np.array(arrays["f"][k]),
            u_grid=np.array(arrays["u"][k]),
            n_modes=int(arrays["modes"][k]),
            alpha_grid=np.array(arrays["alpha"][k]) if parametric else None,
            delta_grid=np.array(arrays["delta"][k]) if parametric else None,
            matrix_params=tuple(arrays["matrix_params"][k]) if parametric else None,
        )


OOD_NAMES = ("linear_diff", "corner_abs")


def ood_rhs(name: str, grid: Grid) -> np.ndarray:
    """Closed-form right-hand sides used for out-of-distribution tests.

    ``linear_diff`` is f = x - y (smooth); ``corner_abs`` is
    f = |x - 1/2|*|y - 1/2| (kinked along the midlines).  Neither comes
    from the trigonometric family, and no paired u exists.
    """
    X, Y = grid.meshgrid()
    if name == "linear_diff":
        return X - Y
    if name == "corner_abs":
        return np.abs(X - 0.5) * np.abs(Y - 0.5)
    raise ValueError(f"unknown OOD right-hand side {name!r}; expected one of {OOD_NAMES}")


def sha256_of_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()
