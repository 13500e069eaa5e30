import numpy as np
import pytest

from robustbench.adversarial import Adversarial
from robustbench.attacks import (
    AdditiveGaussianNoiseAttack,
    AdditiveUniformNoiseAttack,
    BoundaryAttack,
    ContrastReductionAttack,
    GaussianBlurAttack,
    PointwiseAttack,
    PrecomputedImagesAttack,
    SaltAndPepperNoiseAttack,
)
from robustbench.attacks.decision import gaussian_blur, salt_and_pepper
from robustbench.core import seeded_rng
from robustbench.criteria import Misclassification
from robustbench.errors import (
    AttackFailed,
    InputNotInTable,
    InvalidParameter,
    NotSpatialInput,
    StartingPointNotFound,
)
from robustbench.models import DecisionOnlyModel, LinearSoftmaxModel, Model
from robustbench.toys import PredicateModel
from robustbench.tuning import ScalarSearchConfig


class Watch(Model):
    def __init__(self, inner):
        super().__init__(inner.num_classes, inner.bounds, inner.input_shape)
        self.inner = inner
        self.seen = []

    def predictions(self, x):
        self.seen.append(np.array(x))
        return self.inner.predictions(x)

    def backward(self, x, w):
        return self.inner.backward(x, w)


def _state(model, x0, measure="mse"):
    return Adversarial(model, Misclassification(), measure, x0, 0)


def test_boundary_monotone_and_close(half_linear):
    st = _state(half_linear, np.array([0.7, 0.4]))
    out = BoundaryAttack(boundary_iterations=1000)(st, seeded_rng(0, 0))
    assert out.tuned_parameters["start"].startswith("uniform_noise_")
    assert all(b <= a for a, b in zip(st.trace, st.trace[1:]))
    l2 = np.linalg.norm(st.best_input - st.original_input)
    assert 0.2 <= l2 <= 0.4


def test_boundary_supplied_start(half_linear):
    st = _state(half_linear, np.array([0.7, 0.4]))
    out = BoundaryAttack(starting_point=[0.1, 0.4], boundary_iterations=50)(st)
    assert out.tuned_parameters["start"] == "supplied"
    st = _state(half_linear, np.array([0.7, 0.4]))
    with pytest.raises(StartingPointNotFound):
        BoundaryAttack(starting_point=[0.9, 0.4])(st)


def test_boundary_without_any_adversarial():
    m = PredicateModel(lambda x: -1.0, (3,))
    with pytest.raises(StartingPointNotFound):
        BoundaryAttack(boundary_init_tries=20)(_state(m, np.full(3, 0.5)))


@pytest.mark.parametrize(
    "attack",
    [
        lambda: BoundaryAttack(boundary_iterations=300),
        lambda: PointwiseAttack(),
        lambda: AdditiveUniformNoiseAttack(),
        lambda: AdditiveGaussianNoiseAttack(),
        lambda: SaltAndPepperNoiseAttack(),
        lambda: ContrastReductionAttack(),
        lambda: GaussianBlurAttack(),
    ],
)
def test_decision_only_trajectory_identical(attack):
    rng = np.random.default_rng(2)
    w = rng.normal(size=(3, 16))
    base = LinearSoftmaxModel(w, [2.0, 0.0, 0.0], input_shape=(4, 4))
    x0 = np.full((4, 4), 0.5)
    runs = []
    for model in (base, DecisionOnlyModel(base)):
        watch = Watch(model)
        st = _state(watch, x0)
        try:
            attack()(st, seeded_rng(9, 4))
        except AttackFailed:
            pass
        runs.append((watch.seen, st.best_input))
    (a, best_a), (b, best_b) = runs
    assert len(a) == len(b) > 1
    assert all(np.array_equal(u, v) for u, v in zip(a, b))
    assert (best_a is None and best_b is None) or np.array_equal(best_a, best_b)


def _touch5(x0):
    return PredicateModel(lambda x: 1.0 if x.reshape(-1)[5] != x0.reshape(-1)[5] else -1.0, x0.shape)


def test_pointwise_reduces_to_single_element():
    x0 = np.full(100, 0.5)
    start = x0.copy()
    idx = np.r_[5, np.arange(40, 69)]  # 30 touched elements including 5
    start[idx] = 1.0
    st = _state(_touch5(x0), x0, "l0")
    st.try_candidate(start)
    assert st.best_distance.value == 30
    out = PointwiseAttack()(st, seeded_rng(0, 0))
    assert out.tuned_parameters["initial_l0"] == 30
    assert out.tuned_parameters["final_l0"] == 1
    assert np.flatnonzero(st.best_input != x0).tolist() == [5]


def test_pointwise_fixed_point():
    x0 = np.full(20, 0.5)
    start = x0.copy()
    start[5] = 0.0
    st = _state(_touch5(x0), x0, "l0")
    st.try_candidate(start)
    out = PointwiseAttack()(st)
    assert out.tuned_parameters["rounds"] == 1
    assert np.array_equal(st.best_input, start)


def test_pointwise_from_salt_and_pepper_never_grows():
    x0 = np.full(50, 0.5)
    m = PredicateModel(lambda x: float(np.sum(x[:10] != 0.5)) - 2.5, (50,))
    for seed in range(5):
        st = _state(m, x0, "l0")
        out = PointwiseAttack()(st, seeded_rng(seed, 0))
        assert out.tuned_parameters["start"] == "salt_and_pepper"
        assert out.tuned_parameters["final_l0"] <= out.tuned_parameters["initial_l0"]
        assert out.tuned_parameters["final_l0"] == 3


def test_additive_noise_huge_margin_fails():
    # the logit gap of 5 exceeds anything noise inside the box can close
    m = LinearSoftmaxModel([[1.0, 0.0], [-1.0, 0.0]], [5.0, 0.0])
    for attack in (AdditiveUniformNoiseAttack(), AdditiveGaussianNoiseAttack()):
        st = _state(m, np.array([0.9, 0.5]))
        with pytest.raises(AttackFailed):
            attack(st)
        assert st.best_input is None


def test_additive_noise_small_margin(half_linear):
    for attack in (AdditiveUniformNoiseAttack(), AdditiveGaussianNoiseAttack()):
        st = _state(half_linear, np.array([0.52, 0.5]))
        out = attack(st, seeded_rng(1, 0))
        assert out.tuned_parameters["epsilon"] > 0
        assert st.best_input[0] < 0.5


def test_unknown_noise_distribution():
    with pytest.raises(InvalidParameter):
        AdditiveUniformNoiseAttack(distribution="laplace")


def test_salt_and_pepper_definition():
    r = np.random.default_rng(0)
    x0 = np.full(1000, 0.5)
    full = salt_and_pepper(x0, 1.0, r, 0.0, 1.0)
    assert set(np.unique(full)) <= {0.0, 1.0}
    part = salt_and_pepper(x0, 0.3, r, 0.0, 1.0)
    changed = part != x0
    assert set(np.unique(part[changed])) <= {0.0, 1.0}


def test_salt_and_pepper_threshold():
    n = 200 * 200
    m = PredicateModel(lambda x: float(np.mean((x == 0.0) | (x == 1.0))) - 0.4 + 1e-12, (n,))
    st = _state(m, np.full(n, 0.5), "l0")
    out = SaltAndPepperNoiseAttack()(st, seeded_rng(0, 0))
    step = ScalarSearchConfig().max_scale / ScalarSearchConfig().grid_size
    assert abs(out.tuned_parameters["fraction"] - 0.4) <= step


def test_contrast_reduction():
    x0 = np.array([0.0, 0.2, 0.9, 1.0])
    mid_only = PredicateModel(lambda x: 1.0 if np.all(x == 0.5) else -1.0, (4,))
    st = _state(mid_only, x0)
    out = ContrastReductionAttack()(st)
    assert out.tuned_parameters["epsilon"] == 1.0
    assert np.allclose(st.best_input, 0.5)
    # candidates sit between x0 and the mid value, moving monotonically
    watch = Watch(PredicateModel(lambda x: -1.0, (4,)))
    st = _state(watch, x0)
    with pytest.raises(AttackFailed):
        ContrastReductionAttack(grid_size=10, refine_steps=0)(st)
    cands = watch.seen[1:]
    for a, b in zip(cands, cands[1:]):
        assert np.all(np.abs(b - 0.5) <= np.abs(a - 0.5) + 1e-15)
        assert np.all(np.minimum(x0, 0.5) <= b) and np.all(b <= np.maximum(x0, 0.5))


def test_blur_properties():
    r = np.random.default_rng(0)
    const = np.full((6, 7), 0.3)
    for sigma in (0.5, 1.0, 3.0):
        assert np.allclose(gaussian_blur(const, sigma, const.shape), const, atol=1e-15)
    img = r.random((8, 8))
    assert np.array_equal(gaussian_blur(img, 0.0, img.shape), img)
    assert np.allclose(gaussian_blur(img, 1e-3, img.shape), img)
    for sigma in (0.5, 1.0, 2.0, 5.0):
        img = r.random((8, 8))
        assert abs(gaussian_blur(img, sigma, img.shape).mean() - img.mean()) <= 1e-6
    rgb = r.random((5, 5, 3))
    out = gaussian_blur(rgb, 1.0, rgb.shape)
    for ch in range(3):
        assert np.allclose(out[..., ch], gaussian_blur(rgb[..., ch], 1.0, (5, 5)))


def test_blur_attack():
    img = np.zeros((9, 9))
    img[4, 4] = 1.0
    m = PredicateModel(lambda x: 0.5 - float(x[4, 4]), (9, 9))
    st = _state(m, img)
    out = GaussianBlurAttack()(st)
    assert 0 < out.tuned_parameters["sigma"] < 5.0
    assert st.best_input[4, 4] < 0.5
    with pytest.raises(NotSpatialInput):
        GaussianBlurAttack()(_state(PredicateModel(lambda x: -1.0, (9,)), np.zeros(9)))


def test_precomputed(half_linear):
    x0 = np.array([0.7, 0.4])
    good = np.array([0.3, 0.4])
    attack = PrecomputedImagesAttack([x0], [good])
    st = _state(half_linear, x0)
    out = attack(st)
    assert out.distance == pytest.approx(np.mean((good - x0) ** 2), abs=1e-15)
    st = _state(half_linear, x0)
    with pytest.raises(AttackFailed):
        PrecomputedImagesAttack([x0], [np.array([0.6, 0.4])])(st)
    assert st.best_input is None and st.best_distance.value == float("inf")
    with pytest.raises(InputNotInTable):
        attack(_state(half_linear, np.array([0.8, 0.4])))
    with pytest.raises(InvalidParameter):
        PrecomputedImagesAttack([], [])
