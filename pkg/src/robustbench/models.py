"""Models expose logits and input gradients through one small interface.

Every attack talks to a model only through :class:`Model`: ``predictions``
returns unnormalized logits and ``backward`` returns the input gradient of a
linear combination of the logits. The cross-entropy gradient used by the
gradient-based attacks is built on top of ``backward``.
"""
from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from pathlib import Path

import numpy as np

from .core import Bounds, as_bounds, as_input
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    LabelOutOfRange,
    ParseError,
    ShapeMismatch,
)

ACTIVATIONS = ("relu", "identity")


def softmax(logits):
    logits = np.asarray(logits, dtype=np.float64)
    e = np.exp(logits - logits.max())
    return e / e.sum()


def cross_entropy(logits, label: int) -> float:
    """``-log softmax(logits)[label]`` computed with a stable log-sum-exp."""
    logits = np.asarray(logits, dtype=np.float64)
    top = int(np.argmax(logits))
    shifted = np.exp(logits - logits[top])
    # log1p keeps tiny losses accurate when the label dominates
    rest = shifted.sum() - shifted[top]
    return float(logits[top] - logits[label]) + math.log1p(rest)


class Model(ABC):
    """Base class for classifiers with bounded inputs."""

    def __init__(self, num_classes: int, bounds, input_shape):
        self.num_classes = int(num_classes)
        self.bounds: Bounds = as_bounds(bounds)
        self.input_shape = tuple(int(s) for s in input_shape)
        if self.num_classes < 1:
            raise InvalidParameter("num_classes must be positive")
        if any(s <= 0 for s in self.input_shape):
            raise InvalidParameter(f"bad input shape {self.input_shape}")

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.input_shape))

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.input_shape:
            raise ShapeMismatch(f"expected input shape {self.input_shape}, got {x.shape}")
        return x

    def _check_label(self, label) -> int:
        label = int(label)
        if not 0 <= label < self.num_classes:
            raise LabelOutOfRange(f"label {label} not in [0, {self.num_classes})")
        return label

    @abstractmethod
    def predictions(self, x) -> np.ndarray:
        """Logits for a single input."""

    @abstractmethod
    def backward(self, x, logit_weights) -> np.ndarray:
        """Gradient of ``logit_weights @ logits(x)`` with respect to ``x``."""

    def loss(self, x, label) -> float:
        label = self._check_label(label)
        return cross_entropy(self.predictions(x), label)

    def gradient(self, x, label) -> np.ndarray:
        """Gradient of the cross-entropy loss with respect to the input."""
        return self.forward_and_gradient(x, label)[1]

    def forward_and_gradient(self, x, label):
        label = self._check_label(label)
        logits = self.predictions(x)
        return logits, self.backward(x, _loss_weights(logits, label))


def _loss_weights(logits, label):
    # d CE / d logits; the label entry is -sum(others) rather than p - 1,
    # which would round to zero once the softmax saturates
    w = softmax(logits)
    w[label] = 0.0
    w[label] = -w.sum()
    return w


class MlpModel(Model):
    """Fully connected network; ``layers`` is a list of ``(W, b, activation)``.

    Weights have shape ``(out, in)``. The last layer produces the logits.
    ReLU uses the subgradient 0 at the kink.
    """

    def __init__(self, layers, bounds=(0.0, 1.0), input_shape=None):
        parsed = []
        for i, (w, b, act) in enumerate(layers):
            w = np.array(w, dtype=np.float64, ndmin=2)
            b = np.array(b, dtype=np.float64).reshape(-1)
            if act not in ACTIVATIONS:
                raise InvalidParameter(f"layer {i}: unknown activation {act!r}")
            if w.shape[0] != b.shape[0]:
                raise DimensionMismatch(f"layer {i}: weights {w.shape} vs biases {b.shape}")
            if parsed and parsed[-1][0].shape[0] != w.shape[1]:
                raise DimensionMismatch(
                    f"layer {i}: expects {w.shape[1]} inputs, previous layer gives "
                    f"{parsed[-1][0].shape[0]}"
                )
            w.setflags(write=False)
            b.setflags(write=False)
            parsed.append((w, b, act))
        if not parsed:
            raise InvalidParameter("model needs at least one layer")
        if input_shape is None:
            input_shape = (parsed[0][0].shape[1],)
        super().__init__(parsed[-1][0].shape[0], bounds, input_shape)
        if self.input_dim != parsed[0][0].shape[1]:
            raise DimensionMismatch(
                f"input shape {self.input_shape} does not match first layer width "
                f"{parsed[0][0].shape[1]}"
            )
        self.layers = tuple(parsed)

    def _forward(self, x):
        h = self._check_input(x).reshape(-1)
        pre = []
        for w, b, act in self.layers:
            z = w @ h + b
            pre.append(z)
            h = np.maximum(z, 0.0) if act == "relu" else z
        return h, pre

    def predictions(self, x):
        return self._forward(x)[0]

    def _backward(self, pre, logit_weights):
        g = np.asarray(logit_weights, dtype=np.float64).reshape(-1)
        if g.shape != (self.num_classes,):
            raise ShapeMismatch(f"logit weights must have length {self.num_classes}")
        for (w, _, act), z in zip(reversed(self.layers), reversed(pre)):
            if act == "relu":
                g = g * (z > 0)
            g = w.T @ g
        return g.reshape(self.input_shape)

    def backward(self, x, logit_weights):
        return self._backward(self._forward(x)[1], logit_weights)

    def forward_and_gradient(self, x, label):
        label = self._check_label(label)
        logits, pre = self._forward(x)
        return logits, self._backward(pre, _loss_weights(logits, label))


class LinearSoftmaxModel(MlpModel):
    """``logits = W x + b``; a single identity layer."""

    def __init__(self, weights, biases, bounds=(0.0, 1.0), input_shape=None):
        super().__init__([(weights, biases, "identity")], bounds, input_shape)

    @property
    def weights(self):
        return self.layers[0][0]

    @property
    def biases(self):
        return self.layers[0][1]


class CompositeModel(Model):
    """Predictions from ``forward_model``, gradients from ``backward_model``."""

    def __init__(self, forward_model: Model, backward_model: Model):
        for attr in ("num_classes", "bounds", "input_shape"):
            if getattr(forward_model, attr) != getattr(backward_model, attr):
                raise DimensionMismatch(f"submodels disagree on {attr}")
        super().__init__(forward_model.num_classes, forward_model.bounds, forward_model.input_shape)
        self.forward_model = forward_model
        self.backward_model = backward_model

    def predictions(self, x):
        return self.forward_model.predictions(x)

    def backward(self, x, logit_weights):
        return self.backward_model.backward(x, logit_weights)

    def gradient(self, x, label):
        return self.backward_model.gradient(x, label)

    def forward_and_gradient(self, x, label):
        label = self._check_label(label)
        return self.forward_model.predictions(x), self.backward_model.gradient(x, label)


class NumericalGradientModel(Model):
    """Wraps a model and replaces its gradients by central differences.

    Probes are clipped to the bounds, so at a saturated element the
    difference degenerates to a one-sided one. ``step`` is relative to the
    bounds range.
    """

    def __init__(self, inner: Model, step: float = 1e-5):
        super().__init__(inner.num_classes, inner.bounds, inner.input_shape)
        if step <= 0:
            raise InvalidParameter("step must be positive")
        self.inner = inner
        self.step = float(step)

    def predictions(self, x):
        return self.inner.predictions(x)

    def _differences(self, x, fn):
        x = self._check_input(x)
        flat = x.reshape(-1)
        h = self.step * self.bounds.range
        lo, hi = self.bounds
        grad = np.empty(flat.size)
        for i in range(flat.size):
            up = flat.copy()
            down = flat.copy()
            up[i] = min(flat[i] + h, hi)
            down[i] = max(flat[i] - h, lo)
            grad[i] = (fn(up.reshape(x.shape)) - fn(down.reshape(x.shape))) / (up[i] - down[i])
        return grad.reshape(x.shape)

    def backward(self, x, logit_weights):
        c = np.asarray(logit_weights, dtype=np.float64)
        return self._differences(x, lambda z: float(c @ self.inner.predictions(z)))

    def gradient(self, x, label):
        label = self._check_label(label)
        return self._differences(x, lambda z: cross_entropy(self.inner.predictions(z), label))

    def forward_and_gradient(self, x, label):
        return self.predictions(x), self.gradient(x, label)


class DecisionOnlyModel(Model):
    """Exposes only the top-1 decision as a one-hot logit vector."""

    def __init__(self, inner: Model):
        super().__init__(inner.num_classes, inner.bounds, inner.input_shape)
        self.inner = inner

    def predictions(self, x):
        out = np.zeros(self.num_classes)
        out[int(np.argmax(self.inner.predictions(x)))] = 1.0
        return out

    def backward(self, x, logit_weights):
        raise NotImplementedError("decision-only models have no gradients")


# -- serialization -----------------------------------------------------------


def model_to_dict(model: MlpModel) -> dict:
    if not isinstance(model, MlpModel):
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {
        "type": "linear" if isinstance(model, LinearSoftmaxModel) else "mlp",
        "num_classes": model.num_classes,
        "input_shape": list(model.input_shape),
        "bounds": [model.bounds.min, model.bounds.max],
        "layers": [
            {"weights": w.tolist(), "biases": b.tolist(), "activation": act}
            for w, b, act in model.layers
        ],
    }


def save_model(model: MlpModel, path) -> None:
    # json writes floats with repr, which round-trips float64 exactly
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1))


def _field(doc, key, kind, where="model"):
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ParseError(f"{where}: field {key!r} has wrong type {type(value).__name__}")
    return value


def model_from_dict(doc) -> MlpModel:
    if not isinstance(doc, dict):
        raise ParseError("model: top level must be an object")
    kind = _field(doc, "type", str)
    if kind not in ("linear", "mlp"):
        raise ParseError(f"model: field 'type' must be 'linear' or 'mlp', got {kind!r}")
    num_classes = _field(doc, "num_classes", int)
    shape = _field(doc, "input_shape", list)
    bounds = _field(doc, "bounds", list)
    if len(bounds) != 2:
        raise ParseError("model: field 'bounds' must have two entries")
    layers = []
    for i, layer in enumerate(_field(doc, "layers", list)):
        where = f"model.layers[{i}]"
        if not isinstance(layer, dict):
            raise ParseError(f"{where}: must be an object")
        try:
            w = np.array(_field(layer, "weights", list, where), dtype=np.float64)
            b = np.array(_field(layer, "biases", list, where), dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"{where}: non-numeric or ragged array ({exc})") from None
        if w.ndim != 2 or b.ndim != 1:
            raise ParseError(f"{where}: weights must be 2-D and biases 1-D")
        layers.append((w, b, layer.get("activation", "identity")))
    if kind == "linear" and (len(layers) != 1 or layers[0][2] != "identity"):
        raise ParseError("model: a linear model has exactly one identity layer")
    try:
        if kind == "linear":
            model = LinearSoftmaxModel(layers[0][0], layers[0][1], bounds, shape)
        else:
            model = MlpModel(layers, bounds, shape)
    except InvalidParameter as exc:
        raise ParseError(f"model: {exc}") from None
    if model.num_classes != num_classes:
        raise DimensionMismatch(
            f"model: num_classes={num_classes} but last layer has {model.num_classes} outputs"
        )
    return model


def load_model(path) -> MlpModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return model_from_dict(doc)


def random_mlp(rng, sizes, bounds=(0.0, 1.0), scale=1.0) -> MlpModel:
    """ReLU network with He-style random weights; handy for tests and demos."""
    layers = []
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        w = rng.normal(0.0, scale * math.sqrt(2.0 / n_in), size=(n_out, n_in))
        b = rng.normal(0.0, 0.1 * scale, size=n_out)
        layers.append((w, b, "identity" if i == len(sizes) - 2 else "relu"))
    return MlpModel(layers, bounds)


__all__ = [
    "Model",
    "MlpModel",
    "LinearSoftmaxModel",
    "CompositeModel",
    "NumericalGradientModel",
    "DecisionOnlyModel",
    "softmax",
    "cross_entropy",
    "load_model",
    "save_model",
    "model_from_dict",
    "model_to_dict",
    "random_mlp",
    "as_input",
]
