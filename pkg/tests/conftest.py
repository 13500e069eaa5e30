import numpy as np
import pytest

from robustbench.models import LinearSoftmaxModel, Model
from robustbench.toys import balanced_mlp


class CountingModel(Model):
    """Forwards to ``inner`` and counts every call made through the interface."""

    def __init__(self, inner):
        super().__init__(inner.num_classes, inner.bounds, inner.input_shape)
        self.inner = inner
        self.forward_calls = 0
        self.backward_calls = 0

    def predictions(self, x):
        self.forward_calls += 1
        return self.inner.predictions(x)

    def backward(self, x, logit_weights):
        self.backward_calls += 1
        return self.inner.backward(x, logit_weights)

    def gradient(self, x, label):
        self.backward_calls += 1
        return self.inner.gradient(x, label)

    def forward_and_gradient(self, x, label):
        self.forward_calls += 1
        self.backward_calls += 1
        return self.inner.forward_and_gradient(x, label)


@pytest.fixture
def hand_linear():
    # the 2-class, 2-dim model used in the hand-worked examples
    return LinearSoftmaxModel([[1.0, 0.0], [-1.0, 0.0]], [0.0, 0.0])


@pytest.fixture
def half_linear():
    # class 0 iff x[0] > 0.5; decision boundary inside the unit box
    return LinearSoftmaxModel([[1.0, 0.0], [-1.0, 0.0]], [-0.5, 0.5])


@pytest.fixture
def mlp():
    return balanced_mlp(np.random.default_rng(11), (2, 10, 3))


@pytest.fixture
def mlp_sample(mlp):
    rng = np.random.default_rng(5)
    x0 = rng.uniform(0.2, 0.8, size=2)
    return mlp, x0, int(np.argmax(mlp.predictions(x0)))


def write_workspace(root, n_samples=8, attacks=None, seed=3):
    """Model file, CSV dataset and config JSON for end-to-end runs."""
    import json

    from robustbench.datasets import write_csv
    from robustbench.models import save_model

    net = balanced_mlp(np.random.default_rng(seed), (2, 10, 3))
    save_model(net, root / "model.json")
    xs = np.random.default_rng(seed + 1).uniform(0.05, 0.95, size=(n_samples, 2))
    labels = [int(np.argmax(net.predictions(x))) for x in xs]
    write_csv(root / "data.csv", xs, labels, header=True)
    config = {
        "model": "model.json",
        "dataset": {"path": "data.csv", "format": "csv"},
        "attacks": attacks
        or [
            {"name": "fgsm", "params": {"grid_size": 50}},
            "deepfool_l2",
            {"name": "boundary", "params": {"boundary_iterations": 200}},
        ],
        "criterion": "misclassification",
        "distance": "mse",
        "seed": 7,
    }
    (root / "config.json").write_text(json.dumps(config))
    return root / "config.json"


@pytest.fixture
def workspace(tmp_path):
    return write_workspace(tmp_path)


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
