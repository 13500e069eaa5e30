"""Perturbation size measures, normalized by the width of the input bounds."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import as_bounds
from .errors import ConfigError, ShapeMismatch


class DistanceMeasure(enum.Enum):
    MSE = "mse"
    MAE = "mae"
    LINF = "linf"
    L0 = "l0"

    @classmethod
    def parse(cls, name) -> "DistanceMeasure":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ConfigError(
                f"unknown distance {name!r}; choose from {[m.value for m in cls]}"
            ) from None


MeanSquaredDistance = DistanceMeasure.MSE
MeanAbsoluteDistance = DistanceMeasure.MAE
Linfinity = DistanceMeasure.LINF
L0 = DistanceMeasure.L0


@dataclass(frozen=True, order=True)
class DistanceValue:
    """A distance that orders by value only; ``inf`` means nothing found yet."""

    value: float
    measure: DistanceMeasure | None = field(default=None, compare=False)

    def __float__(self):
        return float(self.value)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    @classmethod
    def infinity(cls, measure=None) -> "DistanceValue":
        return cls(math.inf, measure)


def distance(measure, x, y, bounds) -> DistanceValue:
    measure = DistanceMeasure.parse(measure)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeMismatch(f"cannot compare shapes {x.shape} and {y.shape}")
    if measure is DistanceMeasure.L0:
        return DistanceValue(float(np.count_nonzero(x != y)), measure)
    span = as_bounds(bounds).range
    diff = x / span - y / span
    if measure is DistanceMeasure.MSE:
        value = np.mean(diff * diff)
    elif measure is DistanceMeasure.MAE:
        value = np.mean(np.abs(diff))
    else:
        value = np.max(np.abs(diff))
    return DistanceValue(float(value), measure)
