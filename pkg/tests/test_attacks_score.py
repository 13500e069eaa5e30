import numpy as np
import pytest

from robustbench.adversarial import Adversarial
from robustbench.attacks import LocalSearchAttack, SinglePixelAttack
from robustbench.core import seeded_rng
from robustbench.criteria import Misclassification
from robustbench.errors import AttackFailed, NotSpatialInput
from robustbench.models import Model, softmax
from robustbench.toys import PredicateModel


class Watch(Model):
    def __init__(self, inner):
        super().__init__(inner.num_classes, inner.bounds, inner.input_shape)
        self.inner = inner
        self.seen = []

    def predictions(self, x):
        self.seen.append(np.array(x))
        return self.inner.predictions(x)

    def backward(self, x, w):
        raise NotImplementedError


def _state(model, x0, measure="l0"):
    return Adversarial(model, Misclassification(), measure, x0, 0)


def test_single_pixel_finds_the_pixel():
    m = PredicateModel(lambda x: 1.0 if x[2, 3] >= 0.9 else -1.0, (5, 6))
    st = _state(m, np.full((5, 6), 0.5))
    SinglePixelAttack()(st, seeded_rng(0, 0))
    diff = np.argwhere(st.best_input != st.original_input)
    assert diff.tolist() == [[2, 3]]
    assert st.best_input[2, 3] == 1.0
    assert st.best_distance.value == 1


def test_single_pixel_channels_move_together():
    m = PredicateModel(lambda x: 1.0 if x[1, 1].min() <= 0.05 else -1.0, (3, 3, 3))
    st = _state(m, np.full((3, 3, 3), 0.5))
    SinglePixelAttack()(st)
    assert st.best_distance.value == 3
    assert np.all(st.best_input[1, 1] == 0.0)


def test_single_pixel_exhausts_every_candidate():
    inner = PredicateModel(lambda x: -1.0, (4, 5))
    m = Watch(inner)
    st = _state(m, np.full((4, 5), 0.5))
    with pytest.raises(AttackFailed) as err:
        SinglePixelAttack()(st)
    probes = m.seen[1:]  # the first call is the precondition check on x0
    assert len(probes) == 4 * 5 * 2
    assert err.value.outcome.prediction_calls == 40
    for x in probes:
        assert np.count_nonzero(x != 0.5) == 1


def test_pixel_attacks_need_spatial_input():
    m = PredicateModel(lambda x: -1.0, (7,))
    for attack in (SinglePixelAttack(), LocalSearchAttack()):
        with pytest.raises(NotSpatialInput):
            attack(_state(m, np.full(7, 0.5)))


def test_single_pixel_deterministic_order():
    m = PredicateModel(lambda x: 1.0 if (x == 1.0).any() else -1.0, (4, 4))
    a = _state(m, np.full((4, 4), 0.5))
    b = _state(m, np.full((4, 4), 0.5))
    SinglePixelAttack()(a, seeded_rng(3, 1))
    SinglePixelAttack()(b, seeded_rng(3, 1))
    assert np.array_equal(a.best_input, b.best_input)


def _region_model(shape=(10, 10)):
    # only the 2x2 block at rows 4..5, cols 6..7 matters
    def score(x):
        return 2.0 * float(np.sum(x[4:6, 6:8] - 0.5)) - 1.5

    return PredicateModel(score, shape)


def test_local_search_stays_near_sensitive_region():
    for seed in range(5):
        m = Watch(_region_model())
        st = _state(m, np.full((10, 10), 0.5))
        out = LocalSearchAttack(ls_neighborhood=2)(st, seeded_rng(seed, 0))
        assert out.success
        for p in out.tuned_parameters["perturbed_pixels"]:
            r, c = divmod(p, 10)
            assert 4 <= r <= 5 and 6 <= c <= 7
        assert all(np.all((x >= 0) & (x <= 1)) for x in m.seen)


def test_local_search_one_round_everything():
    # every pixel lowers the original-class probability when raised
    m = PredicateModel(lambda x: float(np.sum(x)) - 30.0, (6, 6))
    st = _state(m, np.full((6, 6), 0.5))
    out = LocalSearchAttack(ls_top_t=36, ls_rounds=1, ls_init_fraction=1.0)(st)
    assert out.tuned_parameters["perturbed_pixels"] == list(range(36))
    assert np.all(st.best_input == 1.0)


def test_local_search_lowers_original_probability(mlp_image_problem):
    m, x0, label = mlp_image_problem
    st = Adversarial(m, Misclassification(), "mse", x0, label)
    LocalSearchAttack()(st, seeded_rng(1, 0))
    p0 = softmax(m.predictions(x0))[label]
    p1 = softmax(m.predictions(st.best_input))[label]
    assert p1 < p0


@pytest.fixture
def mlp_image_problem():
    from robustbench.models import MlpModel

    rng = np.random.default_rng(5)
    w1 = rng.normal(size=(8, 16))
    w2 = rng.normal(size=(3, 8))
    net = MlpModel(
        [(w1, np.zeros(8), "relu"), (w2, np.zeros(3), "identity")], (0.0, 1.0), (4, 4)
    )
    x0 = rng.uniform(0.2, 0.8, size=(4, 4))
    return net, x0, int(np.argmax(net.predictions(x0)))
