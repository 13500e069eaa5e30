"""Numeric primitives shared by every module: bounds, clipping and seeding.

Inputs are plain ``numpy.ndarray`` objects of dtype float64. Their shape is
the model's ``input_shape``; most attacks work on the flat view.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, ShapeMismatch


@dataclass(frozen=True)
class Bounds:
    min: float
    max: float

    def __post_init__(self):
        if not (np.isfinite(self.min) and np.isfinite(self.max)) or not self.min < self.max:
            raise InvalidParameter(f"invalid bounds [{self.min}, {self.max}]")

    @property
    def range(self) -> float:
        return self.max - self.min

    @property
    def mid(self) -> float:
        return (self.min + self.max) / 2.0

    def __iter__(self):
        yield self.min
        yield self.max


def as_bounds(bounds) -> Bounds:
    if isinstance(bounds, Bounds):
        return bounds
    lo, hi = bounds
    return Bounds(float(lo), float(hi))


def as_input(x, shape=None) -> np.ndarray:
    """Convert ``x`` to a finite float64 array, optionally checking its shape."""
    arr = np.asarray(x, dtype=np.float64)
    if shape is not None and arr.shape != tuple(shape):
        if arr.size == int(np.prod(shape)) and arr.ndim == 1:
            arr = arr.reshape(shape)
        else:
            raise ShapeMismatch(f"expected shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter("input contains NaN or Inf")
    return arr


def clip(x, bounds) -> np.ndarray:
    """Saturate ``x`` at the bounds; in-range elements are returned unchanged."""
    lo, hi = as_bounds(bounds)
    return np.clip(np.asarray(x, dtype=np.float64), lo, hi)


def seeded_rng(global_seed: int, sample_index: int) -> np.random.Generator:
    """Per-sample generator derived from ``(global_seed, sample_index)``.

    ``SeedSequence`` hashes the pair, so neighbouring sample indices give
    unrelated streams and the result does not depend on execution order.
    """
    seq = np.random.SeedSequence([int(global_seed) & 0xFFFFFFFFFFFFFFFF, int(sample_index)])
    return np.random.Generator(np.random.PCG64(seq))


def substream(base_seed: int, key: float) -> np.random.Generator:
    """Deterministic child stream keyed by the bit pattern of a float ``key``."""
    bits = int(np.float64(key).view(np.uint64))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(base_seed), bits])))


def spatial_dims(shape) -> tuple[int, int, int]:
    """Return ``(height, width, channels)`` for image-like shapes, else raise."""
    shape = tuple(shape)
    if len(shape) == 2:
        return shape[0], shape[1], 1
    if len(shape) == 3:
        return shape
    raise ValueError(f"shape {shape} is not spatial")
