import json

import numpy as np
import pytest

from synthpde.cli import main
from synthpde.dataset import read_manifest, sha256_of_file


def generate_args(out, n=4, res=9, op="poisson", bc="dirichlet", seed=5, extra=()):
    return [
        "generate",
        "--op", op,
        "--bc", bc,
        "--n", str(n),
        "--res", str(res),
        "--seed", str(seed),
        "--out", str(out),
        *extra,
    ]


def test_generate_inspect_verify_happy_path(tmp_path, capsys):
    # the residual check needs the grid to resolve the field (M << S),
    # so cap the mode range on these small grids
    out = tmp_path / "ds"
    assert main(generate_args(out, res=17, extra=["--precision", "64", "--m-max", "4"])) == 0
    printed = capsys.readouterr().out.strip()
    assert printed.endswith("manifest.json")

    assert main(["inspect", str(out / "manifest.json")]) == 0
    text = capsys.readouterr().out
    assert "poisson" in text and "dirichlet" in text and "f.bin" in text

    assert main(["verify", str(out / "manifest.json")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["all_passed"]


def test_generate_defaults_to_float32(tmp_path):
    out = tmp_path / "ds"
    assert main(generate_args(out)) == 0
    manifest = read_manifest(out / "manifest.json")
    assert manifest.dtype == "float32"
    assert manifest.points_per_side == 9
    assert manifest.min_modes == 1 and manifest.max_modes == 20


def test_generate_same_flags_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(generate_args(a, op="divform-param", bc="neumann")) == 0
    assert main(generate_args(b, op="divform-param", bc="neumann")) == 0
    for fname in ("f.bin", "u.bin", "alpha.bin", "delta.bin", "modes.bin"):
        assert sha256_of_file(a / fname) == sha256_of_file(b / fname)


def test_generate_rejects_unknown_operator(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(generate_args(tmp_path / "x", op="wave"))
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err


def test_generate_rejects_out_of_range_seed(tmp_path, capsys):
    rc = main(generate_args(tmp_path / "x", extra=["--m-min", "0"]))
    assert rc == 2
    assert capsys.readouterr().err.startswith("error: invalid-value:")
    rc = main(["generate", "--op", "poisson", "--bc", "dirichlet", "--n", "1",
               "--seed", str(2**64), "--out", str(tmp_path / "y")])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error: invalid-value:")


def test_inspect_missing_manifest_categorized(tmp_path, capsys):
    rc = main(["inspect", str(tmp_path / "absent" / "manifest.json")])
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("error: missing-array-file:")


def test_inspect_hashes_flag(tmp_path, capsys):
    out = tmp_path / "ds"
    main(generate_args(out))
    assert main(["inspect", str(out / "manifest.json"), "--hashes"]) == 0
    assert capsys.readouterr().out.count("sha256") >= 3


def test_verify_report_file_and_refine(tmp_path, capsys):
    out = tmp_path / "ds"
    main(generate_args(out, res=17, extra=["--precision", "64", "--m-max", "4"]))
    capsys.readouterr()  # drop generate's stdout
    report_path = tmp_path / "report.json"
    rc = main(["verify", str(out / "manifest.json"), "--refine",
               "--report", str(report_path), "--limit", "2"])
    assert rc == 0
    assert capsys.readouterr().out == ""
    report = json.loads(report_path.read_text())
    assert report["refined"]
    assert report["summary"]["records_checked"] == 2


def test_verify_fails_on_corrupted_dataset(tmp_path, capsys):
    out = tmp_path / "ds"
    main(generate_args(out, n=2, res=33, extra=["--precision", "64", "--m-max", "1"]))
    capsys.readouterr()  # drop generate's stdout
    fbin = out / "f.bin"
    raw = np.fromfile(fbin, dtype=np.float64).reshape(2, 33, 33).copy()
    raw[0, 10, 10] += 1.0
    raw.tofile(fbin)
    rc = main(["verify", str(out / "manifest.json")])
    assert rc == 1
    captured = capsys.readouterr()
    assert "error: verification-failed:" in captured.err
    report = json.loads(captured.out)
    assert not report["summary"]["all_passed"]


def test_verify_shape_mismatch_categorized(tmp_path, capsys):
    out = tmp_path / "ds"
    main(generate_args(out))
    fbin = out / "u.bin"
    fbin.write_bytes(fbin.read_bytes()[:-4])
    rc = main(["verify", str(out / "manifest.json")])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error: shape-mismatch:")


def test_generate_npy_flag(tmp_path):
    out = tmp_path / "ds"
    assert main(generate_args(out, extra=["--npy"])) == 0
    mirrored = np.load(out / "f.npy")
    raw = np.fromfile(out / "f.bin", dtype=np.float32).reshape(4, 9, 9)
    np.testing.assert_array_equal(mirrored, raw)


def test_generate_workers_flag_identical_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(generate_args(a, n=6)) == 0
    assert main(generate_args(b, n=6, extra=["--workers", "2"])) == 0
    for fname in ("f.bin", "u.bin", "modes.bin"):
        assert sha256_of_file(a / fname) == sha256_of_file(b / fname)
