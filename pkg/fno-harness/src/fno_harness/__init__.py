"""Fourier-neural-operator training harness for generated elliptic datasets."""

from .data import CHANNELS, ChannelMismatchError, input_channels, load_tensors, manifest_sha256
from .model import FNO2d, SpectralConv2d
from .ood import OOD_CHOICES, evaluate_ood, reference_solution
from .training import EvalResult, TrainConfig, predict, relative_l2, train

__version__ = "0.1.0"

__all__ = [
    "CHANNELS",
    "ChannelMismatchError",
    "input_channels",
    "load_tensors",
    "manifest_sha256",
    "FNO2d",
    "SpectralConv2d",
    "OOD_CHOICES",
    "evaluate_ood",
    "reference_solution",
    "EvalResult",
    "TrainConfig",
    "predict",
    "relative_l2",
    "train",
    "__version__",
]
