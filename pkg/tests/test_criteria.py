import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robustbench.criteria import (
    Misclassification,
    OriginalClassProbability,
    TargetClass,
    TargetClassProbability,
    TopKMisclassification,
    criterion_from_config,
)
from robustbench.errors import ConfigError, InvalidParameter, LabelOutOfRange


def test_examples():
    assert not Misclassification()([1, 3, 2], 1)
    assert not TopKMisclassification(2)([0.1, 0.5, 0.4], 2)
    assert TopKMisclassification(2)([0.1, 0.5, 0.4], 0)
    # softmax([0, 4]) = [0.0180, 0.9820]
    assert TargetClassProbability(1, 0.9)([0.0, 4.0], 0)
    assert not TargetClassProbability(1, 0.99)([0.0, 4.0], 0)
    assert OriginalClassProbability(0.5)([0.0, 4.0], 0)
    assert TargetClass(2)([0, 1, 5], 0)


def test_ties_go_to_smallest_index():
    assert not Misclassification()([2.0, 2.0], 0)
    assert Misclassification()([2.0, 2.0], 1)


def test_thresholds_are_strict():
    assert not OriginalClassProbability(0.5)([0.0, 0.0], 0)
    assert not TargetClassProbability(1, 0.5)([0.0, 0.0], 0)


def test_invalid_parameters():
    with pytest.raises(InvalidParameter):
        TopKMisclassification(3)([1, 2, 3], 0)
    with pytest.raises(InvalidParameter):
        OriginalClassProbability(1.0)
    with pytest.raises(InvalidParameter):
        TargetClassProbability(0, 0.0)
    with pytest.raises(LabelOutOfRange):
        Misclassification()([1, 2], 2)


def test_config_names():
    assert criterion_from_config("misclassification") == Misclassification()
    assert criterion_from_config({"name": "top_k", "k": 2}) == TopKMisclassification(2)
    assert criterion_from_config({"name": "target_class_probability", "target": 1, "p": 0.8}) == \
        TargetClassProbability(1, 0.8)
    with pytest.raises(ConfigError):
        criterion_from_config("nonsense")
    with pytest.raises(ConfigError):
        criterion_from_config({"name": "top_k"})


logit_vectors = arrays(np.float64, st.integers(3, 8), elements=st.floats(-20, 20))


@given(logit_vectors, st.data())
def test_misclassification_equals_top1(logits, data):
    label = data.draw(st.integers(0, logits.size - 1))
    assert Misclassification()(logits, label) == TopKMisclassification(1)(logits, label)


@given(logit_vectors, st.floats(-50, 50), st.data())
def test_shift_invariance(logits, shift, data):
    label = data.draw(st.integers(0, logits.size - 1))
    target = data.draw(st.integers(0, logits.size - 1))
    shifted = logits + shift
    # a shift can create or break exact ties through rounding; only test clear cases
    if np.min(np.diff(np.sort(logits))) < 1e-6:
        return
    for c in (Misclassification(), TopKMisclassification(2), TargetClass(target)):
        assert c(logits, label) == c(shifted, label)
    for c in (OriginalClassProbability(0.3), TargetClassProbability(target, 0.4)):
        p = c.p
        probs = np.exp(logits - logits.max()) / np.exp(logits - logits.max()).sum()
        idx = label if isinstance(c, OriginalClassProbability) else target
        if abs(probs[idx] - p) > 1e-9:
            assert c(logits, label) == c(shifted, label)


@given(logit_vectors, st.data())
def test_target_implies_misclassification(logits, data):
    label = data.draw(st.integers(0, logits.size - 1))
    target = data.draw(st.integers(0, logits.size - 1).filter(lambda t: t != label))
    if TargetClass(target)(logits, label):
        assert Misclassification()(logits, label)
