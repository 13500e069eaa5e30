"""Small problems with known answers, used by the tests and the demos.

For a linear softmax model the set of inputs classified as ``label`` is a
polyhedron, so the exact minimal L2 (or Linf) perturbation is the distance
to the nearest facet, ``min_k (f_label - f_k) / ||w_label - w_k||``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import LinearSoftmaxModel, Model


@dataclass
class LinearProblem:
    model: LinearSoftmaxModel
    x0: np.ndarray
    label: int
    margin_l2: float
    margin_linf: float
    nearest_class: int


def linear_margins(model: LinearSoftmaxModel, x0, label):
    """Exact (L2, Linf) distances to the decision boundary of ``label``.

    Only valid when the minimizer stays inside the bounds.
    """
    w, b = model.weights, model.biases
    f = w @ np.asarray(x0).reshape(-1) + b
    l2, linf, nearest = np.inf, np.inf, None
    for k in range(model.num_classes):
        if k == label:
            continue
        d = w[k] - w[label]
        gap = f[label] - f[k]
        if gap / np.linalg.norm(d) < l2:
            l2, nearest = gap / np.linalg.norm(d), k
        linf = min(linf, gap / np.abs(d).sum())
    return float(l2), float(linf), nearest


def random_linear_problem(rng, n_classes, dim, margin, logit_scale=20.0, min_logit_gap=8.0):
    """Linear model plus an input of class 0 whose nearest boundary is ``margin`` away.

    The input sits in the centre of the unit box so that the optimal
    perturbation does not touch the bounds. Every other boundary is at least
    1.5 times farther away and at least ``min_logit_gap`` logits further, so
    the nearest boundary is unambiguous and dominates the softmax.
    """
    w = logit_scale * rng.normal(size=(n_classes, dim)) / np.sqrt(dim)
    x0 = rng.uniform(0.45, 0.55, size=dim)
    nearest = int(rng.integers(1, n_classes))
    f0 = w[0] @ x0
    gaps = np.zeros(n_classes)
    norms = np.linalg.norm(w - w[0], axis=1)
    gaps[nearest] = margin * norms[nearest]
    for k in range(1, n_classes):
        if k != nearest:
            far = margin * rng.uniform(1.5, 3.0) * norms[k]
            gaps[k] = max(far, gaps[nearest] + min_logit_gap)
    b = f0 - w @ x0 - gaps
    b[0] = 0.0
    model = LinearSoftmaxModel(w, b, bounds=(0.0, 1.0))
    l2, linf, k = linear_margins(model, x0, 0)
    return LinearProblem(model, x0, 0, l2, linf, k)


def linear_suite(seed=0, count=50, classes=(2, 5), dims=(2, 20), margins=(0.05, 0.4), **kw):
    rng = np.random.default_rng(seed)
    return [
        random_linear_problem(
            rng,
            int(rng.integers(classes[0], classes[1] + 1)),
            int(rng.integers(dims[0], dims[1] + 1)),
            float(rng.uniform(*margins)),
            **kw,
        )
        for _ in range(count)
    ]


class PredicateModel(Model):
    """Two-class model whose class-1 logit is ``score(x)``; no gradients.

    Useful for decision and score attacks with a hand-made notion of
    "adversarial": the input is misclassified exactly when ``score(x) > 0``.
    """

    def __init__(self, score, input_shape, bounds=(0.0, 1.0)):
        super().__init__(2, bounds, input_shape)
        self.score = score

    def predictions(self, x):
        x = self._check_input(x)
        return np.array([0.0, float(self.score(x))])

    def backward(self, x, logit_weights):
        raise NotImplementedError("predicate models have no gradients")


def balanced_mlp(rng, sizes=(2, 10, 2), bounds=(0.0, 1.0), scale=3.0, min_share=0.1, probes=400):
    """Random ReLU network whose classes all occupy a share of the input box.

    Networks where one class covers (nearly) the whole box are redrawn, so
    decision boundaries are guaranteed to cross the domain.
    """
    from .models import MlpModel, random_mlp

    lo, hi = bounds
    while True:
        net = random_mlp(rng, list(sizes), bounds, scale)
        # re-centre the first layer on the middle of the box
        (w1, b1, a1), *rest = net.layers
        centre = np.full(w1.shape[1], (lo + hi) / 2.0)
        net = MlpModel([(w1 / (hi - lo), b1 - w1 @ centre / (hi - lo), a1), *rest], bounds)
        pts = rng.uniform(lo, hi, size=(probes, w1.shape[1]))
        counts = np.bincount([int(np.argmax(net.predictions(p))) for p in pts],
                             minlength=net.num_classes)
        if counts.min() >= min_share * probes:
            return net
