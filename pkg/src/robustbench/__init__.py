"""Minimal adversarial perturbations and robustness benchmarks for classifiers."""

__version__ = "0.1.0"

from . import attacks, criteria, distances, models
from .adversarial import Adversarial, AdversarialState, AttackOutcome, new_adversarial, resume
from .core import Bounds, clip, seeded_rng
from .criteria import (
    Misclassification,
    OriginalClassProbability,
    TargetClass,
    TargetClassProbability,
    TopKMisclassification,
)
from .distances import DistanceMeasure, DistanceValue, distance
from .models import (
    CompositeModel,
    DecisionOnlyModel,
    LinearSoftmaxModel,
    MlpModel,
    NumericalGradientModel,
    load_model,
    save_model,
)
from .tuning import ScalarSearchConfig, binary_search_refine, line_search_minimal_epsilon
