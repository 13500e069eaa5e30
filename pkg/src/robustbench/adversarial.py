"""Book-keeping for one attack problem.

An :class:`Adversarial` binds a model, a criterion, a distance measure and a
reference input. All model queries made by attacks go through it, so it can
count them, clip every candidate to the bounds and keep the closest
adversarial seen so far. Passing the same object to another attack resumes
from that best.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import as_input, clip
from .criteria import as_criterion
from .distances import DistanceMeasure, DistanceValue, distance
from .errors import AlreadyAdversarial, ShapeMismatch
from .models import Model


class Adversarial:
    def __init__(self, model: Model, criterion, measure, original_input, original_label,
                 *, check_original=True):
        self.model = model
        self.criterion = as_criterion(criterion)
        self.measure = DistanceMeasure.parse(measure)
        self.original_input = as_input(original_input, model.input_shape)
        self.original_input.setflags(write=False)
        self.original_label = model._check_label(original_label)
        self.bounds = model.bounds

        self.best_input: np.ndarray | None = None
        self.best_distance = DistanceValue.infinity(self.measure)
        self.prediction_calls = 0
        self.gradient_calls = 0
        # smallest adversarial distance among candidates evaluated since the
        # last ``begin_run``; lets a resumed attack report its own result
        self.run_best_distance = DistanceValue.infinity(self.measure)
        # best distance after every improvement, for monotonicity checks
        self.trace: list[float] = []

        if np.any(self.original_input < self.bounds.min) or np.any(
            self.original_input > self.bounds.max
        ):
            raise ValueError("original input lies outside the model bounds")
        if check_original:
            # not counted: counters start at zero for a fresh state
            logits = model.predictions(self.original_input)
            if self.criterion(logits, self.original_label):
                raise AlreadyAdversarial("the original input already satisfies the criterion")

    # -- queries ------------------------------------------------------------

    def _prepare(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.original_input.shape:
            if x.size == self.original_input.size:
                x = x.reshape(self.original_input.shape)
            else:
                raise ShapeMismatch(
                    f"candidate shape {x.shape} != original shape {self.original_input.shape}"
                )
        return clip(x, self.bounds)

    def _register(self, x, logits):
        is_adv = bool(self.criterion(logits, self.original_label))
        d = distance(self.measure, self.original_input, x, self.bounds)
        if is_adv:
            if d < self.run_best_distance:
                self.run_best_distance = d
            if d < self.best_distance:
                self.best_input = x.copy()
                self.best_input.setflags(write=False)
                self.best_distance = d
                self.trace.append(d.value)
        return is_adv, d

    def try_candidate(self, x):
        """Clip ``x``, query the model once and return ``(is_adversarial, distance)``."""
        x = self._prepare(x)
        logits = self.model.predictions(x)
        self.prediction_calls += 1
        return self._register(x, logits)

    def predictions(self, x):
        """Logits of the clipped candidate plus its verdict; updates the best."""
        x = self._prepare(x)
        logits = self.model.predictions(x)
        self.prediction_calls += 1
        is_adv, _ = self._register(x, logits)
        return logits, is_adv

    def forward_and_gradient(self, x, label=None):
        """Logits, verdict and the loss gradient for ``label`` (default: original)."""
        x = self._prepare(x)
        label = self.original_label if label is None else label
        logits, grad = self.model.forward_and_gradient(x, label)
        self.prediction_calls += 1
        self.gradient_calls += 1
        is_adv, _ = self._register(x, logits)
        return logits, grad, is_adv

    def gradient(self, x=None, label=None):
        x = self.original_input if x is None else self._prepare(x)
        label = self.original_label if label is None else label
        self.gradient_calls += 1
        return self.model.gradient(x, label)

    def backward(self, x, logit_weights):
        self.gradient_calls += 1
        return self.model.backward(self._prepare(x), logit_weights)

    # -- helpers for attacks -------------------------------------------------

    def begin_run(self):
        self.run_best_distance = DistanceValue.infinity(self.measure)

    def is_adversarial(self, x) -> bool:
        return self.try_candidate(x)[0]

    def distance_to(self, x) -> DistanceValue:
        return distance(self.measure, self.original_input, self._prepare(x), self.bounds)

    @property
    def has_gradients(self) -> bool:
        from .models import DecisionOnlyModel

        return not isinstance(self.model, DecisionOnlyModel)

    @property
    def perturbation(self):
        if self.best_input is None:
            return None
        return self.best_input - self.original_input

    def inherit(self, other: "Adversarial"):
        """Adopt the best adversarial of another state for the same problem."""
        if other.best_input is not None and other.best_distance < self.best_distance:
            self.best_input = other.best_input
            self.best_distance = other.best_distance
            self.trace.append(self.best_distance.value)

    def __repr__(self):
        return (
            f"Adversarial(label={self.original_label}, best={self.best_distance.value:.6g}, "
            f"queries={self.prediction_calls}+{self.gradient_calls})"
        )


def new_adversarial(model, criterion, measure, x0, label0) -> Adversarial:
    return Adversarial(model, criterion, measure, x0, label0)


AdversarialState = Adversarial


@dataclass
class AttackOutcome:
    state: Adversarial
    attack_name: str
    tuned_parameters: dict[str, Any] = field(default_factory=dict)
    overrides: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0
    prediction_calls: int = 0
    gradient_calls: int = 0
    own_distance: float = math.inf
    error: str | None = None

    @property
    def success(self) -> bool:
        return math.isfinite(self.own_distance)

    @property
    def failed(self) -> bool:
        return not self.success

    @property
    def distance(self) -> float:
        return self.state.best_distance.value

    @property
    def adversarial(self):
        return self.state.best_input


def resume(state: Adversarial, attack, **kwargs) -> AttackOutcome:
    """Run ``attack`` on an existing state, continuing from its current best."""
    return attack(state, **kwargs)
