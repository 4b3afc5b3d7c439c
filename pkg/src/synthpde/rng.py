"""Deterministic per-sample random streams.

Every sample in a dataset owns an independent stream keyed by
``(master_seed, sample_index)`` through a splitmix64-style bit mixer.  The
mixed key seeds a counter-based Philox generator, so the draws for sample k
are a pure function of the key: they do not depend on how many samples were
generated before k, on chunking, or on which worker process produced them.

Gaussian variates are produced by an explicit Box-Muller transform on the
raw uniform stream rather than by ``Generator.standard_normal``, so the
bytes written to disk are pinned by this module alone and cannot drift with
numpy's internal ziggurat tables.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15  # splitmix64 increment


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit word.

    Feeding ``mix64(seed + k * _GOLDEN)`` for k = 1, 2, ... reproduces the
    reference splitmix64 output stream, which is how the per-sample keys
    are derived.
    """
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_stream_key(master_seed: int, sample_index: int) -> int:
    """Map (master_seed, sample_index) to a well-mixed 64-bit stream key."""
    if not 0 <= master_seed <= _MASK64:
        raise ValueError(f"master_seed must fit in 64 bits, got {master_seed}")
    if sample_index < 0:
        raise ValueError(f"sample_index must be >= 0, got {sample_index}")
    z = (master_seed + (sample_index + 1) * _GOLDEN) & _MASK64
    # Two rounds: a single finalizer leaves correlations between keys whose
    # inputs differ only in high bits of the index.
    return mix64(mix64(z))


def sample_stream(master_seed: int, sample_index: int) -> np.random.Generator:
    """Counter-based generator dedicated to one sample."""
    key = derive_stream_key(master_seed, sample_index)
    return np.random.Generator(np.random.Philox(key=key))


def uniforms(gen: np.random.Generator, n: int) -> np.ndarray:
    """n doubles uniform on [0, 1)."""
    return gen.random(n)


def standard_normals(gen: np.random.Generator, n: int) -> np.ndarray:
    """n standard normal variates via the Box-Muller transform.

    Consumes ceil(n/2) pairs of uniforms; the trailing variate of an odd
    request is discarded, so requesting n and n+1 variates agrees on the
    first n.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    pairs = (n + 1) // 2
    if pairs == 0:
        return np.empty(0)
    u1 = 1.0 - gen.random(pairs)  # (0, 1]: safe log argument
    u2 = gen.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = (2.0 * np.pi) * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n]


def uniform_int(gen: np.random.Generator, lo: int, hi: int) -> int:
    """One integer uniform on {lo, ..., hi}, from a single double draw."""
    if lo > hi:
        raise ValueError(f"need lo <= hi, got [{lo}, {hi}]")
    span = hi - lo + 1
    k = int(gen.random() * span)
    return lo + min(k, span - 1)
