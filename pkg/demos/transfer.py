"""
Transfer through a substitute model
===================================

A composite model answers predictions with one network and gradients with
another. Here the target only reveals decisions and a linear substitute
supplies the gradients.
"""
import numpy as np

from robustbench import Adversarial, Misclassification
from robustbench.attacks import GradientAttack
from robustbench.models import CompositeModel, DecisionOnlyModel, LinearSoftmaxModel

target = DecisionOnlyModel(LinearSoftmaxModel([[3.0, 1.0], [-3.0, -1.0]], [-2.0, 2.0]))
substitute = LinearSoftmaxModel([[2.5, 1.5], [-2.5, -1.5]], [-2.0, 2.0])

x0 = np.array([0.8, 0.7])
state = Adversarial(CompositeModel(target, substitute), Misclassification(), "mse", x0, 0)
out = GradientAttack()(state)
print("epsilon:", out.tuned_parameters["epsilon"])
print("adversarial:", state.best_input, "class", int(np.argmax(target.predictions(state.best_input))))
