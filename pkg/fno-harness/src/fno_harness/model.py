"""2-d Fourier neural operator.

The standard spectral-convolution architecture: lift pointwise to a wide
channel space, apply four Fourier layers (truncated spectral convolution
plus a pointwise linear bypass, GELU between layers), project back down.
Inputs and outputs are channels-last grids, [batch, S, S, channels], with
grid axis 0 being x to match the dataset convention.  Two coordinate
channels are appended inside ``forward``, so the lift sees
``in_channels + 2`` features per point.
"""

import torch
import torch.nn as nn


class SpectralConv2d(nn.Module):
    """Linear map acting on the lowest Fourier modes of a 2-d signal."""

    def __init__(self, in_channels: int, out_channels: int, modes: int):
        super().__init__()
        if modes < 1:
            raise ValueError("modes must be >= 1")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.modes = modes
        scale = 1.0 / (in_channels * out_channels)
        self.weights1 = nn.Parameter(
            scale * torch.randn(in_channels, out_channels, modes, modes, dtype=torch.cfloat)
        )
        self.weights2 = nn.Parameter(
            scale * torch.randn(in_channels, out_channels, modes, modes, dtype=torch.cfloat)
        )

    @staticmethod
    def _mul(inp, weights):
        return torch.einsum("bixy,ioxy->boxy", inp, weights)

    def forward(self, x):
        # x: [batch, channels, S, S]
        b, _, s1, s2 = x.shape
        m = self.modes
        if m > s1 // 2 or m > s2 // 2:
            raise ValueError(
                f"modes={m} too large for a {s1}x{s2} grid (needs S >= {2 * m})"
            )
        x_ft = torch.fft.rfft2(x)
        out_ft = torch.zeros(
            b, self.out_channels, s1, s2 // 2 + 1,
            dtype=torch.cfloat, device=x.device,
        )
        out_ft[:, :, :m, :m] = self._mul(x_ft[:, :, :m, :m], self.weights1)
        out_ft[:, :, -m:, :m] = self._mul(x_ft[:, :, -m:, :m], self.weights2)
        return torch.fft.irfft2(out_ft, s=(s1, s2))


class FNO2d(nn.Module):
    def __init__(self, modes: int = 12, width: int = 64, in_channels: int = 1):
        super().__init__()
        if width < 1 or in_channels < 1:
            raise ValueError("width and in_channels must be >= 1")
        self.modes = modes
        self.width = width
        self.in_channels = in_channels
        self.fc0 = nn.Linear(in_channels + 2, width)
        self.convs = nn.ModuleList(SpectralConv2d(width, width, modes) for _ in range(4))
        self.bypasses = nn.ModuleList(nn.Conv2d(width, width, 1) for _ in range(4))
        self.fc1 = nn.Linear(width, 128)
        self.fc2 = nn.Linear(128, 1)

    @staticmethod
    def _coordinate_channels(shape, device):
        b, s1, s2 = shape
        gx = torch.linspace(0.0, 1.0, s1, device=device).reshape(1, s1, 1, 1)
        gy = torch.linspace(0.0, 1.0, s2, device=device).reshape(1, 1, s2, 1)
        return gx.expand(b, s1, s2, 1), gy.expand(b, s1, s2, 1)

    def forward(self, x):
        # x: [batch, S, S, in_channels] -> [batch, S, S, 1]
        if x.ndim != 4 or x.shape[-1] != self.in_channels:
            raise ValueError(
                f"expected [batch, S, S, {self.in_channels}] input, got {tuple(x.shape)}"
            )
        gx, gy = self._coordinate_channels(x.shape[:3], x.device)
        x = torch.cat((x, gx, gy), dim=-1)
        x = self.fc0(x)
        x = x.permute(0, 3, 1, 2)
        for layer, (conv, bypass) in enumerate(zip(self.convs, self.bypasses)):
            x = conv(x) + bypass(x)
            if layer < 3:
                x = torch.nn.functional.gelu(x)
        x = x.permute(0, 2, 3, 1)
        x = torch.nn.functional.gelu(self.fc1(x))
        return self.fc2(x)
