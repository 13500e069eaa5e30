"""Decision-based attacks: they only look at the criterion's verdict."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from ..core import spatial_dims, substream
from ..errors import InputNotInTable, InvalidParameter, NotSpatialInput, StartingPointNotFound
from ..tuning import line_search_minimal_epsilon, minimal_epsilon
from .base import Attack, search_config


@dataclass(frozen=True)
class DecisionAttackConfig:
    boundary_iterations: int = 5000
    boundary_spherical_step: float = 0.01
    boundary_source_step: float = 0.01
    boundary_step_adaptation: float = 1.5
    boundary_window: int = 30
    boundary_init_tries: int = 1000
    boundary_init_blend_steps: int = 10
    grid_size: int = 100
    refine_steps: int = 20
    max_scale: float = 1.0
    salt_pepper_draws: int = 10
    blur_sigma_max: float = 5.0
    pointwise_rounds: int = 10

    def __post_init__(self):
        if not (self.boundary_spherical_step > 0 and self.boundary_source_step > 0):
            raise ValueError("boundary step sizes must be positive")
        if not self.boundary_step_adaptation > 1:
            raise ValueError("boundary_step_adaptation must exceed 1")


class _DecisionAttack(Attack):
    Config = DecisionAttackConfig


class BoundaryAttack(_DecisionAttack):
    """Random walk along the decision boundary towards the original input.

    Each iteration makes an orthogonal step on the sphere around the original
    input followed by a contraction towards it, and keeps the result when it
    is still adversarial. Step sizes adapt to the recent success rates
    (window ``boundary_window``; up above 50%, down below 20%).
    """

    name = "boundary"

    def __init__(self, config=None, starting_point=None, **overrides):
        super().__init__(config, **overrides)
        self.starting_point = None if starting_point is None else np.asarray(starting_point, float)

    def _initialize(self, state, rng, tuned):
        if state.best_input is not None:
            tuned["start"] = "existing_best"
            return state.best_input.copy()
        if self.starting_point is not None:
            x = np.clip(self.starting_point.reshape(state.original_input.shape), *state.bounds)
            if not state.try_candidate(x)[0]:
                raise StartingPointNotFound("the supplied starting point is not adversarial")
            tuned["start"] = "supplied"
            return x
        x0 = state.original_input
        lo, hi = state.bounds
        for i in range(self.config.boundary_init_tries):
            x = rng.uniform(lo, hi, size=x0.shape)
            if state.try_candidate(x)[0]:
                tuned["start"] = f"uniform_noise_{i + 1}"
                break
        else:
            raise StartingPointNotFound(
                f"no adversarial among {self.config.boundary_init_tries} uniform noise images"
            )
        # blend towards the original while staying adversarial
        a, b = 0.0, 1.0  # b: blend weight of the noise image that is adversarial
        for _ in range(self.config.boundary_init_blend_steps):
            mid = (a + b) / 2.0
            if state.try_candidate((1 - mid) * x0 + mid * x)[0]:
                b = mid
            else:
                a = mid
        return np.clip((1 - b) * x0 + b * x, lo, hi)

    def run(self, state, rng, tuned):
        cfg = self.config
        x0 = state.original_input
        lo, hi = state.bounds
        current = self._initialize(state, rng, tuned)
        spherical, source = cfg.boundary_spherical_step, cfg.boundary_source_step
        factor = cfg.boundary_step_adaptation
        sph_stats = deque(maxlen=cfg.boundary_window)
        step_stats = deque(maxlen=cfg.boundary_window)
        accepted = 0

        for _ in range(cfg.boundary_iterations):
            diff = x0 - current
            source_norm = np.linalg.norm(diff)
            if source_norm == 0:
                break
            source_dir = diff / source_norm
            eta = rng.standard_normal(x0.shape)
            eta -= np.vdot(eta, source_dir) * source_dir
            eta *= spherical * source_norm / max(np.linalg.norm(eta), 1e-300)
            scale = 1.0 / math.sqrt(spherical**2 + 1.0)
            sph_candidate = np.clip(x0 + scale * (eta - diff), lo, hi)

            new_dir = x0 - sph_candidate
            new_norm = np.linalg.norm(new_dir)
            length = max(0.0, source * source_norm + new_norm - source_norm)
            candidate = sph_candidate
            if new_norm > 0:
                candidate = np.clip(sph_candidate + (length / new_norm) * new_dir, lo, hi)

            sph_adv = state.try_candidate(sph_candidate)[0]
            sph_stats.append(sph_adv)
            if sph_adv:
                adv = state.try_candidate(candidate)[0]
                step_stats.append(adv)
                if adv:
                    current = candidate
                    accepted += 1

            if len(sph_stats) == sph_stats.maxlen:
                rate = sum(sph_stats) / len(sph_stats)
                if rate > 0.5:
                    spherical *= factor
                    source *= factor
                elif rate < 0.2:
                    spherical /= factor
                    source /= factor
                sph_stats.clear()
            if len(step_stats) == step_stats.maxlen:
                rate = sum(step_stats) / len(step_stats)
                if rate > 0.5:
                    source *= factor
                elif rate < 0.2:
                    source /= factor
                step_stats.clear()

        tuned["accepted_steps"] = accepted
        tuned["final_spherical_step"] = spherical
        tuned["final_source_step"] = source


def _base_seed(rng) -> int:
    return int(rng.integers(0, 2**63 - 1))


class AdditiveNoiseAttack(_DecisionAttack):
    """Line search over the scale of i.i.d. additive noise.

    The noise for a given scale is drawn from a substream keyed by that
    scale, so re-probing the same scale reproduces the same candidate.
    """

    name = "additive_noise"
    distribution = "uniform"

    def __init__(self, config=None, distribution=None, **overrides):
        super().__init__(config, **overrides)
        if distribution is not None:
            if distribution not in ("uniform", "gaussian"):
                raise InvalidParameter(f"unknown noise distribution {distribution!r}")
            self.distribution = distribution

    def _noise(self, r, shape):
        if self.distribution == "uniform":
            return r.uniform(-1.0, 1.0, size=shape)
        return r.standard_normal(shape)

    def run(self, state, rng, tuned):
        x0 = state.original_input
        span = state.bounds.range
        base = _base_seed(rng)

        def candidate_at(eps):
            return x0 + eps * span * self._noise(substream(base, eps), x0.shape)

        tuned["distribution"] = self.distribution
        tuned["epsilon"] = line_search_minimal_epsilon(state, candidate_at, search_config(self.config))


class AdditiveUniformNoiseAttack(AdditiveNoiseAttack):
    name = "additive_uniform"
    distribution = "uniform"


class AdditiveGaussianNoiseAttack(AdditiveNoiseAttack):
    name = "additive_gaussian"
    distribution = "gaussian"


def salt_and_pepper(x0, p, r, lo, hi):
    flat = x0.reshape(-1).copy()
    selected = r.random(flat.size) < p
    values = np.where(r.random(flat.size) < 0.5, lo, hi)
    flat[selected] = values[selected]
    return flat.reshape(x0.shape)


class SaltAndPepperNoiseAttack(_DecisionAttack):
    """Line search over the fraction of elements replaced by an extreme value."""

    name = "salt_and_pepper"

    def run(self, state, rng, tuned):
        x0 = state.original_input
        lo, hi = state.bounds
        base = _base_seed(rng)
        draws = self.config.salt_pepper_draws

        def probe(p):
            r = substream(base, p)
            for _ in range(draws):
                if state.try_candidate(salt_and_pepper(x0, p, r, lo, hi))[0]:
                    return True
            return False

        tuned["fraction"] = minimal_epsilon(probe, search_config(self.config))


class PointwiseAttack(_DecisionAttack):
    """Greedy L0 reduction: resets perturbed elements to their original value.

    Starts from the state's best adversarial or, if there is none, from a
    salt-and-pepper adversarial. A reset is kept only if the input stays
    adversarial.
    """

    name = "pointwise"

    def run(self, state, rng, tuned):
        from ..errors import AttackError

        x0 = state.original_input.reshape(-1)
        if state.best_input is None:
            try:
                SaltAndPepperNoiseAttack(self.config)(state, rng)
            except AttackError:
                return
            tuned["start"] = "salt_and_pepper"
        else:
            tuned["start"] = "existing_best"
        x = state.best_input.reshape(-1).copy()
        shape = state.original_input.shape
        tuned["initial_l0"] = int(np.count_nonzero(x != x0))
        # re-register the start so the run owns at least this adversarial
        state.try_candidate(x.reshape(shape))
        rounds = 0
        for _ in range(self.config.pointwise_rounds):
            rounds += 1
            changed = False
            for i in rng.permutation(np.flatnonzero(x != x0)):
                old = x[i]
                x[i] = x0[i]
                if state.try_candidate(x.reshape(shape))[0]:
                    changed = True
                else:
                    x[i] = old
            if not changed:
                break
        tuned["rounds"] = rounds
        tuned["final_l0"] = int(np.count_nonzero(x != x0))


class ContrastReductionAttack(_DecisionAttack):
    """Blends the input towards the constant mid-range image."""

    name = "contrast_reduction"

    def run(self, state, rng, tuned):
        x0 = state.original_input
        mid = state.bounds.mid
        tuned["epsilon"] = line_search_minimal_epsilon(
            state, lambda e: (1.0 - e) * x0 + e * mid, search_config(self.config)
        )


def gaussian_blur(image, sigma, shape):
    """Blur the spatial axes of ``image`` with reflection at the edges.

    The kernel is truncated at three standard deviations and normalized.
    """
    h, w, c = spatial_dims(shape)
    img = np.asarray(image, dtype=np.float64).reshape(h, w, c)
    out = gaussian_filter(img, sigma=(sigma, sigma, 0.0), mode="reflect", truncate=3.0)
    return out.reshape(shape)


class GaussianBlurAttack(_DecisionAttack):
    name = "gaussian_blur"

    def run(self, state, rng, tuned):
        x0 = state.original_input
        try:
            spatial_dims(x0.shape)
        except ValueError:
            raise NotSpatialInput(f"input shape {x0.shape} is not spatial") from None
        sigma_max = self.config.blur_sigma_max
        eps = line_search_minimal_epsilon(
            state, lambda e: gaussian_blur(x0, e * sigma_max, x0.shape), search_config(self.config)
        )
        tuned["epsilon"] = eps
        tuned["sigma"] = None if eps is None else eps * sigma_max


def _key(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return x.shape, x.tobytes()


class PrecomputedImagesAttack(Attack):
    """Looks up a precomputed candidate for the original input and tests it."""

    name = "precomputed"

    def __init__(self, inputs, candidates):
        super().__init__()
        inputs = list(inputs)
        candidates = list(candidates)
        if not inputs or len(inputs) != len(candidates):
            raise InvalidParameter("need a non-empty table of paired inputs and candidates")
        self.table = {_key(a): np.asarray(b, dtype=np.float64) for a, b in zip(inputs, candidates)}

    def run(self, state, rng, tuned):
        candidate = self.table.get(_key(state.original_input))
        if candidate is None:
            raise InputNotInTable("no precomputed candidate for this input")
        state.try_candidate(candidate.reshape(state.original_input.shape))
