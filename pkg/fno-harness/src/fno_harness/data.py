"""Dataset loading for the training harness.

The harness never computes f or u itself: everything comes off disk
through the generator's public readers.  ``load_tensors`` turns a dataset
directory into channels-last float32 torch tensors, with the input-channel
layout fixed by the operator recorded in the manifest: a single f channel
for the non-parametric operators, and (f, alpha, delta) for the
parametric divergence-form family, whose coefficient fields are part of
the problem statement the network must see.
"""

import hashlib
from pathlib import Path

import numpy as np
import torch
from synthpde import DatasetError, load_arrays

# input-channel layout per operator tag
CHANNELS = {
    "poisson": ("f",),
    "divform-fixed": ("f",),
    "semilinear": ("f",),
    "divform-param": ("f", "alpha", "delta"),
}


class ChannelMismatchError(DatasetError):
    """Manifest's arrays do not match the operator's channel layout."""


def input_channels(operator: str) -> int:
    try:
        return len(CHANNELS[operator])
    except KeyError:
        raise ChannelMismatchError(f"unknown operator tag {operator!r}") from None


def load_tensors(manifest_path):
    """Read a dataset into (manifest, inputs, targets) torch tensors.

    inputs: [N, S, S, C] float32; targets: [N, S, S, 1] float32.
    """
    manifest, arrays = load_arrays(manifest_path)
    names = CHANNELS.get(manifest.operator)
    if names is None:
        raise ChannelMismatchError(f"unknown operator tag {manifest.operator!r}")
    missing = [n for n in names if n not in manifest.arrays]
    if missing:
        raise ChannelMismatchError(
            f"operator {manifest.operator!r} needs input channels {names}, "
            f"manifest lacks {missing}"
        )
    if "u" not in manifest.arrays:
        raise ChannelMismatchError("manifest lacks the target array 'u'")
    grid_shape = (manifest.n_samples, *manifest.grid.shape)
    for name in (*names, "u"):
        if manifest.arrays[name].shape != grid_shape:
            raise ChannelMismatchError(
                f"array {name!r} has shape {manifest.arrays[name].shape}, "
                f"expected {grid_shape}"
            )
    # np.array copies: the memmaps are read-only and torch wants writable
    x = np.stack([np.array(arrays[n], dtype=np.float32) for n in names], axis=-1)
    y = np.array(arrays["u"], dtype=np.float32)[..., None]
    return manifest, torch.from_numpy(x), torch.from_numpy(y)


def manifest_sha256(manifest_path) -> str:
    h = hashlib.sha256()
    with open(Path(manifest_path), "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()
