"""Scalar hyperparameter search: a coarse grid sweep followed by bisection.

Most attacks reduce to "find the smallest epsilon for which candidate(eps) is
adversarial". The predicate is not guaranteed to be monotone, so the grid
locates the first feasible cell before bisection narrows it down.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidBracket, InvalidParameter


@dataclass(frozen=True)
class ScalarSearchConfig:
    grid_size: int = 100
    refine_steps: int = 20
    max_scale: float = 1.0

    def __post_init__(self):
        if self.grid_size < 2:
            raise InvalidParameter("grid_size must be at least 2")
        if self.refine_steps < 0:
            raise InvalidParameter("refine_steps must be non-negative")
        if not self.max_scale > 0:
            raise InvalidParameter("max_scale must be positive")

    @property
    def tolerance(self) -> float:
        return self.max_scale / (self.grid_size * 2**self.refine_steps)


def bisect(probe, lo, hi, steps, check=False):
    """Shrink ``[lo, hi]`` around the adversarial threshold of ``probe``.

    ``probe(hi)`` must be true and ``probe(lo)`` false. With ``check=True``
    both endpoints are probed first and :class:`InvalidBracket` is raised if
    they do not bracket a transition. Returns the final ``hi``.
    """
    if check and (not probe(hi) or (lo > 0 and probe(lo))):
        raise InvalidBracket(f"[{lo}, {hi}] does not bracket an adversarial threshold")
    for _ in range(steps):
        mid = (lo + hi) / 2.0
        if probe(mid):
            hi = mid
        else:
            lo = mid
    return hi


def minimal_epsilon(probe, config: ScalarSearchConfig = ScalarSearchConfig()):
    """Smallest ``eps`` in ``(0, max_scale]`` with ``probe(eps)`` true, or ``None``."""
    prev = 0.0
    for k in range(1, config.grid_size + 1):
        eps = config.max_scale * k / config.grid_size
        if probe(eps):
            return bisect(probe, prev, eps, config.refine_steps)
        prev = eps
    return None


def line_search_minimal_epsilon(state, candidate_at, config: ScalarSearchConfig = ScalarSearchConfig()):
    """Grid-then-bisect search where every probe is evaluated on ``state``."""
    return minimal_epsilon(lambda eps: state.try_candidate(candidate_at(eps))[0], config)


def binary_search_refine(state, lo, hi, candidate_at, steps):
    """Bisection on an explicit bracket; raises if ``[lo, hi]`` is not a bracket."""
    probe = lambda eps: state.try_candidate(candidate_at(eps))[0]  # noqa: E731
    if steps == 0:
        return hi
    return bisect(probe, lo, hi, steps, check=True)
