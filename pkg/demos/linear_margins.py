"""
Minimal perturbations on a linear classifier
============================================

For a linear softmax model the exact distance to the nearest decision
boundary is known in closed form, so we can see how close each gradient
attack gets to the true minimum.
"""
import numpy as np

from robustbench import Adversarial, Misclassification
from robustbench.attacks import CATALOG
from robustbench.toys import random_linear_problem

rng = np.random.default_rng(0)
problem = random_linear_problem(rng, n_classes=3, dim=10, margin=0.2)
print("analytic L2 margin:", round(problem.margin_l2, 6))

# each attack gets a fresh state so that the numbers are its own
for name in ["gradient", "deepfool_l2", "lbfgs", "slsqp", "boundary"]:
    state = Adversarial(problem.model, Misclassification(), "mse", problem.x0, problem.label)
    CATALOG[name]()(state)
    found = np.linalg.norm(state.best_input - problem.x0)
    print(f"{name:>12}  L2 {found:.6f}  ratio {found / problem.margin_l2:.4f}  "
          f"queries {state.prediction_calls}+{state.gradient_calls}")

# sharing one state lets cheap attacks seed expensive ones
state = Adversarial(problem.model, Misclassification(), "mse", problem.x0, problem.label)
for name in ["fgsm", "deepfool_l2", "boundary"]:
    CATALOG[name]()(state)
    print(f"after {name:>11}: running best {state.best_distance.value:.3e}")
