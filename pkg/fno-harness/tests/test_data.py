import json
import shutil
from pathlib import Path

import hashlib
import numpy as np
import pytest
import torch
from synthpde import load_arrays

from fno_harness import ChannelMismatchError, input_channels, load_tensors, manifest_sha256


def test_single_channel_shapes(poisson_manifest):
    manifest, x, y = load_tensors(poisson_manifest)
    assert x.dtype == torch.float32 and y.dtype == torch.float32
    assert x.shape == (24, 17, 17, 1)
    assert y.shape == (24, 17, 17, 1)
    assert manifest.operator == "poisson"


def test_parametric_three_channels(param_manifest):
    manifest, x, y = load_tensors(param_manifest)
    assert x.shape == (8, 17, 17, 3)
    # channel order is f, alpha, delta
    _, arrays = load_arrays(param_manifest)
    for k, name in enumerate(("f", "alpha", "delta")):
        np.testing.assert_array_equal(
            x[..., k].numpy(), np.array(arrays[name], dtype=np.float32)
        )


def test_input_channels_table():
    assert input_channels("poisson") == 1
    assert input_channels("semilinear") == 1
    assert input_channels("divform-fixed") == 1
    assert input_channels("divform-param") == 3
    with pytest.raises(ChannelMismatchError):
        input_channels("heat")


def _edit_manifest(src_manifest, tmp_path, mutate):
    """Copy a dataset directory and apply a JSON-level manifest edit."""
    dst = tmp_path / "edited"
    shutil.copytree(Path(src_manifest).parent, dst)
    doc = json.loads((dst / "manifest.json").read_text())
    mutate(doc)
    (dst / "manifest.json").write_text(json.dumps(doc))
    return dst / "manifest.json"


def test_unknown_operator_rejected(poisson_manifest, tmp_path):
    edited = _edit_manifest(poisson_manifest, tmp_path,
                            lambda d: d.update(operator="heat"))
    with pytest.raises(ChannelMismatchError, match="heat"):
        load_tensors(edited)


def test_missing_channel_rejected(param_manifest, tmp_path):
    edited = _edit_manifest(param_manifest, tmp_path,
                            lambda d: d["arrays"].pop("alpha"))
    with pytest.raises(ChannelMismatchError, match="alpha"):
        load_tensors(edited)


def test_missing_target_rejected(poisson_manifest, tmp_path):
    edited = _edit_manifest(poisson_manifest, tmp_path,
                            lambda d: d["arrays"].pop("u"))
    with pytest.raises(ChannelMismatchError, match="'u'"):
        load_tensors(edited)


def test_inconsistent_shape_rejected(poisson_manifest, tmp_path):
    # same element count (so the raw file still maps) but a layout that
    # cannot be one grid per sample
    edited = _edit_manifest(
        poisson_manifest, tmp_path,
        lambda d: d["arrays"]["u"].update(shape=[17, 24, 17]),
    )
    with pytest.raises(ChannelMismatchError, match="shape"):
        load_tensors(edited)


def test_manifest_sha256(poisson_manifest):
    expect = hashlib.sha256(Path(poisson_manifest).read_bytes()).hexdigest()
    assert manifest_sha256(poisson_manifest) == expect
