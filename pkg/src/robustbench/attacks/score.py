"""Score-based attacks: they query logits/probabilities but never gradients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import spatial_dims
from ..errors import NotSpatialInput
from ..models import softmax
from .base import Attack


def _image_view(state):
    try:
        h, w, c = spatial_dims(state.original_input.shape)
    except ValueError:
        raise NotSpatialInput(
            f"input shape {state.original_input.shape} is not (height, width[, channels])"
        ) from None
    return h, w, c


@dataclass(frozen=True)
class SinglePixelConfig:
    max_pixels: int | None = None


class SinglePixelAttack(Attack):
    """Sets one pixel (all its channels) to the upper, then the lower bound.

    Every pixel is visited in a seeded random order, so the state ends up
    with the closest single-pixel adversarial rather than the first one.
    """

    name = "single_pixel"
    Config = SinglePixelConfig

    def run(self, state, rng, tuned):
        h, w, c = _image_view(state)
        x0 = state.original_input.reshape(h, w, c)
        lo, hi = state.bounds
        order = rng.permutation(h * w)
        if self.config.max_pixels is not None:
            order = order[: self.config.max_pixels]
        hits = 0
        for p in order:
            row, col = divmod(int(p), w)
            for value in (hi, lo):
                x = x0.copy()
                x[row, col, :] = value
                if state.try_candidate(x.reshape(state.original_input.shape))[0]:
                    hits += 1
        tuned["pixels_probed"] = int(len(order))
        tuned["adversarial_hits"] = hits


@dataclass(frozen=True)
class ScoreAttackConfig:
    ls_neighborhood: int = 5
    ls_rounds: int = 150
    ls_p: float = 1.0
    ls_top_t: int = 5
    ls_init_fraction: float = 0.1

    def __post_init__(self):
        if self.ls_neighborhood < 1:
            raise ValueError("ls_neighborhood must be at least 1")
        if not 0 < self.ls_p <= 1:
            raise ValueError("ls_p must lie in (0, 1]")
        if self.ls_top_t < 1 or self.ls_rounds < 1:
            raise ValueError("ls_top_t and ls_rounds must be positive")


class LocalSearchAttack(Attack):
    """Greedy pixel search driven by the drop in original-class probability.

    Each round probes the active pixels with an extreme perturbation in both
    directions, commits the ``ls_top_t`` most damaging ones to the working
    image and restricts the next round to their neighbourhoods. Pixels whose
    perturbation does not lower the probability are never committed; a round
    without any such pixel redraws the active set at random.
    """

    name = "local_search"
    Config = ScoreAttackConfig

    def run(self, state, rng, tuned):
        cfg = self.config
        h, w, c = _image_view(state)
        shape = state.original_input.shape
        label = state.original_label
        lo, hi = state.bounds
        magnitude = cfg.ls_p * state.bounds.range
        work = state.original_input.reshape(h, w, c).copy()

        n_init = max(1, int(round(cfg.ls_init_fraction * h * w)))
        active = np.sort(rng.choice(h * w, size=n_init, replace=False))
        perturbed = set()
        logits, is_adv = state.predictions(work.reshape(shape))
        for rnd in range(cfg.ls_rounds):
            if is_adv:
                break
            p_now = softmax(logits)[label]
            scores = []
            for p in active:
                row, col = divmod(int(p), w)
                best = None
                for sign in (1.0, -1.0):
                    cand = work.copy()
                    cand[row, col, :] = np.clip(work[row, col, :] + sign * magnitude, lo, hi)
                    if np.array_equal(cand[row, col, :], work[row, col, :]):
                        continue
                    lg, _ = state.predictions(cand.reshape(shape))
                    drop = p_now - softmax(lg)[label]
                    if best is None or drop > best[0]:
                        best = (drop, cand[row, col, :].copy())
                if best is not None and best[0] > 0:
                    scores.append((best[0], int(p), best[1]))
            if not scores:
                # nothing sensitive nearby: restart from a fresh random sample
                pool = np.setdiff1d(np.arange(h * w), list(perturbed))
                if pool.size == 0:
                    break
                active = np.sort(rng.choice(pool, size=min(n_init, pool.size), replace=False))
                tuned["restarts"] = tuned.get("restarts", 0) + 1
                continue
            # stable on ties: larger drop first, then smaller pixel index
            scores.sort(key=lambda s: (-s[0], s[1]))
            chosen = scores[: cfg.ls_top_t]
            for _, p, value in chosen:
                row, col = divmod(p, w)
                work[row, col, :] = value
                perturbed.add(p)
            logits, is_adv = state.predictions(work.reshape(shape))
            r = cfg.ls_neighborhood
            nbrs = set()
            for _, p, _ in chosen:
                row, col = divmod(p, w)
                for i in range(max(0, row - r), min(h, row + r + 1)):
                    for j in range(max(0, col - r), min(w, col + r + 1)):
                        nbrs.add(i * w + j)
            active = np.array(sorted(nbrs), dtype=int)
            tuned["rounds"] = rnd + 1
        tuned["perturbed_pixels"] = sorted(perturbed)
