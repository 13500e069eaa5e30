"""Criteria decide whether a logit vector counts as adversarial.

A criterion is any callable ``(logits, original_label) -> bool``. The classes
below cover the built-in cases; attacks accept plain functions as well.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError, InvalidParameter, LabelOutOfRange
from .models import softmax


def top1(logits) -> int:
    # np.argmax returns the first maximal index, i.e. ties go to the smallest
    return int(np.argmax(logits))


def _check(logits, label):
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    label = int(label)
    if not 0 <= label < logits.size:
        raise LabelOutOfRange(f"label {label} not in [0, {logits.size})")
    return logits, label


def _check_prob(p):
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InvalidParameter(f"probability threshold must lie in (0, 1), got {p}")
    return p


class Criterion:
    name = "custom"
    target_class: int | None = None

    def is_adversarial(self, logits, original) -> bool:
        raise NotImplementedError

    def __call__(self, logits, original) -> bool:
        return self.is_adversarial(logits, original)

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"name": self.name, **self.params()}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"

    def __eq__(self, other):
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self):
        return hash((type(self), tuple(self.params().items())))


class Misclassification(Criterion):
    """The predicted class differs from the original class."""

    name = "misclassification"

    def is_adversarial(self, logits, original):
        logits, original = _check(logits, original)
        return top1(logits) != original


class TopKMisclassification(Criterion):
    """The original class is not among the ``k`` largest logits."""

    name = "top_k"

    def __init__(self, k: int):
        if int(k) < 1:
            raise InvalidParameter("k must be positive")
        self.k = int(k)

    def params(self):
        return {"k": self.k}

    def is_adversarial(self, logits, original):
        logits, original = _check(logits, original)
        if self.k >= logits.size:
            raise InvalidParameter(f"k={self.k} must be smaller than the number of classes")
        # stable sort on -logits keeps the smallest-index tie-break of top1
        order = np.argsort(-logits, kind="stable")
        return original not in order[: self.k]


class OriginalClassProbability(Criterion):
    """Softmax probability of the original class is strictly below ``p``."""

    name = "original_class_probability"

    def __init__(self, p: float):
        self.p = _check_prob(p)

    def params(self):
        return {"p": self.p}

    def is_adversarial(self, logits, original):
        logits, original = _check(logits, original)
        return bool(softmax(logits)[original] < self.p)


class TargetClass(Criterion):
    """The predicted class equals ``target``."""

    name = "target_class"

    def __init__(self, target: int):
        self.target_class = int(target)

    def params(self):
        return {"target": self.target_class}

    def is_adversarial(self, logits, original):
        logits, original = _check(logits, original)
        _check(logits, self.target_class)
        return top1(logits) == self.target_class


class TargetClassProbability(Criterion):
    """Softmax probability of ``target`` is strictly above ``p``."""

    name = "target_class_probability"

    def __init__(self, target: int, p: float):
        self.target_class = int(target)
        self.p = _check_prob(p)

    def params(self):
        return {"target": self.target_class, "p": self.p}

    def is_adversarial(self, logits, original):
        logits, original = _check(logits, original)
        _check(logits, self.target_class)
        return bool(softmax(logits)[self.target_class] > self.p)


class FunctionCriterion(Criterion):
    """Adapter turning a plain predicate into a :class:`Criterion`."""

    def __init__(self, fn, name="custom", target_class=None):
        self.fn = fn
        self.name = name
        self.target_class = target_class

    def is_adversarial(self, logits, original):
        return bool(self.fn(np.asarray(logits, dtype=np.float64), int(original)))

    def __eq__(self, other):
        return self is other

    __hash__ = object.__hash__


CRITERIA = {
    cls.name: cls
    for cls in (
        Misclassification,
        TopKMisclassification,
        OriginalClassProbability,
        TargetClass,
        TargetClassProbability,
    )
}


def as_criterion(criterion) -> Criterion:
    if criterion is None:
        return Misclassification()
    if isinstance(criterion, Criterion):
        return criterion
    if callable(criterion):
        return FunctionCriterion(criterion)
    raise TypeError(f"not a criterion: {criterion!r}")


def criterion_from_config(spec) -> Criterion:
    """Build a criterion from ``"name"`` or ``{"name": ..., <params>}``."""
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict) or "name" not in spec:
        raise ConfigError(f"criterion must be a name or an object with 'name': {spec!r}")
    params = dict(spec)
    name = params.pop("name")
    if name not in CRITERIA:
        raise ConfigError(f"unknown criterion {name!r}; choose from {sorted(CRITERIA)}")
    try:
        return CRITERIA[name](**params)
    except (TypeError, InvalidParameter) as exc:
        raise ConfigError(f"criterion {name!r}: {exc}") from None
