"""
Attacks that only see the decision
==================================

Decision-based attacks never look at scores. Wrapping a model so that it
returns one-hot decisions does not change what they do; the pointwise
attack then strips a noisy adversarial down to the few elements that matter.
"""
import numpy as np

from robustbench import Adversarial, Misclassification
from robustbench.attacks import BoundaryAttack, DeepFoolL2Attack, PointwiseAttack
from robustbench.core import seeded_rng
from robustbench.models import DecisionOnlyModel
from robustbench.toys import PredicateModel, balanced_mlp

net = balanced_mlp(np.random.default_rng(4), (2, 10, 2))
x0 = np.array([0.3, 0.6])
label = int(np.argmax(net.predictions(x0)))

df = Adversarial(net, Misclassification(), "mse", x0, label)
DeepFoolL2Attack()(df)

blind = Adversarial(DecisionOnlyModel(net), Misclassification(), "mse", x0, label)
BoundaryAttack()(blind, seeded_rng(0, 0))
print("DeepFool L2:", np.linalg.norm(df.best_input - x0))
print("Boundary L2 (decisions only):", np.linalg.norm(blind.best_input - x0))

# an image is adversarial once pixels (1, 1) and (3, 2) both change
x = np.full((5, 5), 0.5)
model = PredicateModel(lambda im: 1.0 if im[1, 1] != 0.5 and im[3, 2] != 0.5 else -1.0, (5, 5))
state = Adversarial(model, Misclassification(), "l0", x, 0)
out = PointwiseAttack()(state, seeded_rng(0, 1))
print("pointwise L0:", out.tuned_parameters["initial_l0"], "->", out.tuned_parameters["final_l0"])
print(np.argwhere(state.best_input != x).tolist())
