"""Common machinery for attacks: configuration handling and outcome assembly."""
from __future__ import annotations

import dataclasses
import time

from ..adversarial import Adversarial, AttackOutcome
from ..core import seeded_rng
from ..errors import AttackError, AttackFailed, ConfigError
from ..tuning import ScalarSearchConfig


class Attack:
    """An attack is called on an :class:`Adversarial` and returns an outcome.

    Subclasses set ``name``, ``Config`` (a dataclass) and implement
    ``run(state, rng, tuned)``, recording tuned hyperparameters in ``tuned``.
    The call raises :class:`AttackFailed` when the run produced no adversarial
    of its own; the partial outcome is attached to the exception.
    """

    name = "attack"
    Config = None
    uses_gradients = False

    def __init__(self, config=None, **overrides):
        if self.Config is None:
            if config is not None or overrides:
                raise ConfigError(f"attack {self.name!r} takes no parameters")
            self.config = None
            self.overrides = {}
            return
        base = config if config is not None else self.Config()
        known = {f.name for f in dataclasses.fields(self.Config)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"attack {self.name!r}: unknown parameters {sorted(unknown)}")
        try:
            self.config = dataclasses.replace(base, **overrides)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"attack {self.name!r}: {exc}") from None
        default = self.Config()
        self.overrides = {
            k: getattr(self.config, k)
            for k in sorted(known)
            if getattr(self.config, k) != getattr(default, k)
        }

    def run(self, state: Adversarial, rng, tuned: dict) -> None:
        raise NotImplementedError

    def __call__(self, state: Adversarial, rng=None) -> AttackOutcome:
        if rng is None:
            rng = seeded_rng(0, 0)
        pred0, grad0 = state.prediction_calls, state.gradient_calls
        tuned = dataclasses.asdict(self.config) if self.config is not None else {}
        state.begin_run()
        start = time.perf_counter()
        error = None
        try:
            self.run(state, rng, tuned)
        except AttackError as exc:
            error = exc
        outcome = AttackOutcome(
            state=state,
            attack_name=self.name,
            tuned_parameters=tuned,
            overrides=dict(self.overrides),
            wall_time=time.perf_counter() - start,
            prediction_calls=state.prediction_calls - pred0,
            gradient_calls=state.gradient_calls - grad0,
            own_distance=state.run_best_distance.value,
        )
        if error is None and not outcome.success:
            error = AttackFailed(f"{self.name}: no adversarial found")
        if error is not None:
            outcome.error = f"{type(error).__name__}: {error}"
            error.outcome = outcome
            raise error
        return outcome

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.overrides.items())
        return f"{type(self).__name__}({args})"


def search_config(config) -> ScalarSearchConfig:
    return ScalarSearchConfig(config.grid_size, config.refine_steps, config.max_scale)
