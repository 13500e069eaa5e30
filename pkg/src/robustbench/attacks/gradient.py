"""Gradient-based attacks.

All of them linearize the cross-entropy loss (or the logits) around the
current input. Step sizes are expressed in units of the bounds range and are
tuned internally by grid-then-bisect search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..adversarial import Adversarial
from ..criteria import top1
from ..errors import AttackError, DegenerateBoundary, GradientZero
from ..models import NumericalGradientModel, cross_entropy
from ..tuning import bisect, line_search_minimal_epsilon, minimal_epsilon
from .base import Attack, search_config


@dataclass(frozen=True)
class GradientAttackConfig:
    grid_size: int = 100
    refine_steps: int = 20
    max_scale: float = 1.0
    max_iterations: int = 100
    deepfool_max_iter: int = 50
    deepfool_overshoot: float = 0.02
    deepfool_candidate_classes: int = 10
    lbfgs_lambda_min: float = 1e-3
    lbfgs_lambda_max: float = 1e3
    lbfgs_lambda_points: int = 30
    lbfgs_max_opt_iter: int = 150
    slsqp_max_escalations: int = 8
    jsma_max_perturbed_features: int | None = None
    jsma_theta: float = 0.1

    def __post_init__(self):
        if self.deepfool_overshoot < 0:
            raise ValueError("deepfool_overshoot must be non-negative")
        if self.lbfgs_lambda_points < 1 or self.grid_size < 2:
            raise ValueError("search grids must be non-empty")
        if not 0 < self.lbfgs_lambda_min <= self.lbfgs_lambda_max:
            raise ValueError("need 0 < lbfgs_lambda_min <= lbfgs_lambda_max")
        if not self.jsma_theta > 0:
            raise ValueError("jsma_theta must be positive")


class _GradientAttack(Attack):
    Config = GradientAttackConfig
    uses_gradients = True


def _flat_direction(g, kind):
    if kind == "sign":
        return np.sign(g)
    peak = np.max(np.abs(g))
    if not peak > 0:
        return np.zeros_like(g)
    g = g / peak  # rescale first so that tiny gradients do not underflow
    return g / np.linalg.norm(g)


class GradientAttack(_GradientAttack):
    """Line search along the L2-normalized loss gradient at the original input."""

    name = "gradient"
    direction = "l2"

    def run(self, state, rng, tuned):
        x0 = state.original_input
        g = state.gradient()
        if not np.any(g):
            raise GradientZero("loss gradient vanishes at the original input")
        d = _flat_direction(g, self.direction)
        span = state.bounds.range
        eps = line_search_minimal_epsilon(
            state, lambda e: x0 + e * span * d, search_config(self.config)
        )
        tuned["epsilon"] = eps


class GradientSignAttack(GradientAttack):
    """FGSM: line search along the sign of the loss gradient."""

    name = "fgsm"
    direction = "sign"


FGSM = GradientSignAttack


class IterativeGradientAttack(_GradientAttack):
    """Repeated small steps along the (normalized) current gradient.

    For each step size on the search grid a trajectory of at most
    ``max_iterations`` steps is run; the first step size whose trajectory
    reaches an adversarial is then refined by bisection.
    """

    name = "iterative_gradient"
    direction = "l2"

    def run(self, state, rng, tuned):
        cfg = self.config
        x0 = state.original_input
        span = state.bounds.range
        g0 = state.gradient()
        if not np.any(g0):
            raise GradientZero("loss gradient vanishes at the original input")
        budget = cfg.grid_size * cfg.max_iterations
        tuned["call_budget"] = budget
        used = [0]

        def probe(eps):
            x = x0
            for _ in range(cfg.max_iterations):
                if used[0] >= budget:
                    return False
                used[0] += 1
                _, g, is_adv = state.forward_and_gradient(x)
                if is_adv:
                    return True
                d = _flat_direction(g, self.direction)
                if not np.any(d):
                    return False
                x = np.clip(x + eps * span * d, *state.bounds)
            used[0] += 1
            return state.try_candidate(x)[0]

        tuned["epsilon"] = minimal_epsilon(probe, search_config(cfg))
        tuned["calls_used"] = used[0]


class IterativeGradientSignAttack(IterativeGradientAttack):
    name = "iterative_fgsm"
    direction = "sign"


class DeepFoolAttack(_GradientAttack):
    """Iteratively steps to the nearest linearized class boundary."""

    name = "deepfool"
    norm = "l2"

    def run(self, state, rng, tuned):
        cfg = self.config
        x0 = state.original_input
        label = state.original_label
        n = state.model.num_classes
        if n < 2:
            raise DegenerateBoundary("DeepFool needs at least two classes")
        x = x0
        r_total = np.zeros_like(x0)
        factor = 1.0 + cfg.deepfool_overshoot
        tested = False
        for it in range(cfg.deepfool_max_iter):
            logits, is_adv = state.predictions(x)
            if is_adv:
                tested = True
                break
            order = np.argsort(-logits, kind="stable")[: cfg.deepfool_candidate_classes]
            best = None
            for k in order:
                if k == label:
                    continue
                weights = np.zeros(n)
                weights[k], weights[label] = 1.0, -1.0
                w = state.backward(x, weights).reshape(-1)
                df = logits[k] - logits[label]
                dual = np.sum(np.abs(w)) if self.norm == "linf" else np.linalg.norm(w)
                if dual < 1e-12:
                    continue
                dist = abs(df) / dual
                if best is None or dist < best[0]:
                    best = (dist, k, w, df, dual)
            if best is None:
                raise DegenerateBoundary("all boundary normals vanish")
            dist, k, w, df, dual = best
            if self.norm == "linf":
                step = abs(df) * np.sign(w) / dual
            else:
                step = abs(df) * w / dual**2
            r_total = r_total + step.reshape(x0.shape)
            x = np.clip(x0 + factor * r_total, *state.bounds)
            tuned["iterations"] = it + 1
        if not tested:
            state.try_candidate(x)


class DeepFoolL2Attack(DeepFoolAttack):
    name = "deepfool_l2"
    norm = "l2"


class DeepFoolLinfinityAttack(DeepFoolAttack):
    name = "deepfool_linf"
    norm = "linf"


def resolve_target(state: Adversarial, config: GradientAttackConfig) -> tuple[int, str]:
    """Target class for the targeted attacks and how it was chosen.

    Order: the criterion's target, else the class reached by the gradient
    attack, else the runner-up class at the original input. The gradient
    attack runs on a scratch state so that it does not leak into the caller's
    best; its queries are still added to the caller's counters.
    """
    if state.criterion.target_class is not None:
        return int(state.criterion.target_class), "criterion"
    scratch = Adversarial(
        state.model, state.criterion, state.measure, state.original_input,
        state.original_label, check_original=False,
    )
    try:
        GradientAttack(config)(scratch)
    except AttackError:
        pass
    state.prediction_calls += scratch.prediction_calls
    state.gradient_calls += scratch.gradient_calls
    label = state.original_label
    if scratch.best_input is not None:
        state.prediction_calls += 1
        cls = top1(state.model.predictions(scratch.best_input))
        if cls != label:
            return cls, "gradient_attack"
    state.prediction_calls += 1
    order = np.argsort(-state.model.predictions(state.original_input), kind="stable")
    return int(order[1] if order[0] == label else order[0]), "runner_up"


class LBFGSAttack(_GradientAttack):
    """Minimizes ``CE(x, target) + lambda * ||x - x0||^2`` inside the box.

    ``lambda`` is swept down a geometric grid until the optimum is
    adversarial, then bisected in log space towards the largest adversarial
    value. The distance term uses range-normalized coordinates.
    """

    name = "lbfgs"

    def _solve(self, state, target, lam, start):
        x0 = state.original_input
        shape = x0.shape
        inv = 1.0 / state.bounds.range**2
        flat0 = x0.reshape(-1)

        def fun(v):
            logits, g, _ = state.forward_and_gradient(v.reshape(shape), target)
            rho = v - flat0
            value = cross_entropy(logits, target) + lam * inv * rho @ rho
            return value, g.reshape(-1) + 2.0 * lam * inv * rho

        res = minimize(
            fun,
            start.reshape(-1),
            jac=True,
            method="L-BFGS-B",
            bounds=[tuple(state.bounds)] * flat0.size,
            options={"maxiter": self.config.lbfgs_max_opt_iter, "gtol": 1e-8},
        )
        x = np.clip(res.x, *state.bounds).reshape(shape)
        return x, state.try_candidate(x)[0]

    def run(self, state, rng, tuned):
        cfg = self.config
        target, how = resolve_target(state, cfg)
        tuned["target"], tuned["target_source"] = target, how
        x0 = state.original_input
        grid = np.geomspace(cfg.lbfgs_lambda_max, cfg.lbfgs_lambda_min, cfg.lbfgs_lambda_points)
        prev = None
        found = None
        for lam in grid:
            _, ok = self._solve(state, target, lam, x0)
            if ok:
                found = lam
                break
            prev = lam
        if found is None:
            tuned["lambda"] = None
            return
        if prev is not None:
            lo, hi = math.log(found), math.log(prev)
            for _ in range(cfg.refine_steps):
                mid = (lo + hi) / 2.0
                if self._solve(state, target, math.exp(mid), x0)[1]:
                    lo = mid
                else:
                    hi = mid
            found = math.exp(lo)
        tuned["lambda"] = float(found)


class ApproximateLBFGSAttack(LBFGSAttack):
    """L-BFGS with central finite-difference gradients; small inputs only."""

    name = "approx_lbfgs"

    def run(self, state, rng, tuned):
        model = state.model
        state.model = NumericalGradientModel(model)
        try:
            super().run(state, rng, tuned)
        finally:
            state.model = model


class SLSQPAttack(_GradientAttack):
    """Minimizes ``||x - x0||^2`` subject to ``CE(x, target) = level``.

    The equality constraint is handled by an augmented Lagrangian whose
    penalty grows tenfold whenever the residual stalls; each subproblem is a
    box-constrained L-BFGS-B solve. ``level`` starts at ``-log(0.51)`` and is
    lowered (higher target probability) if the solution is not adversarial.
    """

    name = "slsqp"
    levels = (0.51, 0.75, 0.9, 0.99, 0.999)
    tolerance = 1e-4

    def _solve(self, state, target, level, start):
        x0 = state.original_input
        shape = x0.shape
        flat0 = x0.reshape(-1)
        inv = 1.0 / state.bounds.range**2
        box = [tuple(state.bounds)] * flat0.size

        def constraint(v):
            logits, g, _ = state.forward_and_gradient(v.reshape(shape), target)
            return cross_entropy(logits, target) - level, g.reshape(-1)

        multiplier, penalty = 0.0, 1.0
        escalations = 0
        x = start.reshape(-1)
        residual = constraint(x)[0]
        for _ in range(4 * (self.config.slsqp_max_escalations + 1)):
            def fun(v, y=multiplier, mu=penalty):
                c, g = constraint(v)
                rho = v - flat0
                value = inv * rho @ rho + y * c + 0.5 * mu * c * c
                return value, 2.0 * inv * rho + (y + mu * c) * g

            res = minimize(fun, x, jac=True, method="L-BFGS-B", bounds=box,
                           options={"maxiter": self.config.lbfgs_max_opt_iter, "gtol": 1e-10})
            x = np.clip(res.x, *state.bounds)
            new_residual = constraint(x)[0]
            multiplier += penalty * new_residual
            if abs(new_residual) <= self.tolerance:
                residual = new_residual
                break
            if abs(new_residual) > 0.25 * abs(residual):
                if escalations == self.config.slsqp_max_escalations:
                    residual = new_residual
                    break
                penalty *= 10.0
                escalations += 1
            residual = new_residual
        x = x.reshape(shape)
        return x, state.try_candidate(x)[0], residual

    def run(self, state, rng, tuned):
        target, how = resolve_target(state, self.config)
        tuned["target"], tuned["target_source"] = target, how
        x = state.original_input
        for p in self.levels:
            level = -math.log(p)
            x, ok, residual = self._solve(state, target, level, x)
            tuned["loss_level"] = level
            tuned["constraint_residual"] = float(residual)
            if ok:
                return


class SaliencyMapAttack(_GradientAttack):
    """Single-feature JSMA: repeatedly bumps the most salient feature.

    Both the increasing variant (features pushed towards the upper bound)
    and the decreasing one are run; the state keeps whichever adversarial is
    closer.
    """

    name = "jsma"

    def _variant(self, state, target, increase):
        cfg = self.config
        n = state.model.num_classes
        lo, hi = state.bounds
        step = cfg.jsma_theta * state.bounds.range
        budget = cfg.jsma_max_perturbed_features or state.original_input.size
        x = state.original_input.reshape(-1).copy()
        shape = state.original_input.shape
        e_t = np.zeros(n)
        e_t[target] = 1.0
        touched = []
        max_iter = budget * (math.ceil(1.0 / cfg.jsma_theta) + 1)
        for _ in range(max_iter):
            _, is_adv = state.predictions(x.reshape(shape))
            if is_adv:
                return touched
            alpha = state.backward(x.reshape(shape), e_t).reshape(-1)
            beta = state.backward(x.reshape(shape), 1.0 - e_t).reshape(-1)
            if increase:
                mask = (alpha > 0) & (beta < 0) & (x < hi)
                score = np.where(mask, alpha * np.abs(beta), 0.0)
            else:
                mask = (alpha < 0) & (beta > 0) & (x > lo)
                score = np.where(mask, np.abs(alpha) * beta, 0.0)
            if len(set(touched)) >= budget:
                mask &= np.isin(np.arange(x.size), touched)
                score = np.where(mask, score, 0.0)
            if not np.any(score > 0):
                return touched
            i = int(np.argmax(score))
            x[i] = min(x[i] + step, hi) if increase else max(x[i] - step, lo)
            touched.append(i)
        state.try_candidate(x.reshape(shape))
        return touched

    def run(self, state, rng, tuned):
        target, how = resolve_target(state, self.config)
        tuned["target"], tuned["target_source"] = target, how
        up = self._variant(state, target, True)
        down = self._variant(state, target, False)
        tuned["features_increased"] = sorted(set(up))
        tuned["features_decreased"] = sorted(set(down))
