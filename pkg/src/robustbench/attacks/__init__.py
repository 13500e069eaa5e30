"""Catalog of attacks, keyed by the names used in benchmark configs."""
from .base import Attack
from .decision import (
    AdditiveGaussianNoiseAttack,
    AdditiveNoiseAttack,
    AdditiveUniformNoiseAttack,
    BoundaryAttack,
    ContrastReductionAttack,
    DecisionAttackConfig,
    GaussianBlurAttack,
    PointwiseAttack,
    PrecomputedImagesAttack,
    SaltAndPepperNoiseAttack,
    gaussian_blur,
)
from .gradient import (
    FGSM,
    ApproximateLBFGSAttack,
    DeepFoolAttack,
    DeepFoolL2Attack,
    DeepFoolLinfinityAttack,
    GradientAttack,
    GradientAttackConfig,
    GradientSignAttack,
    IterativeGradientAttack,
    IterativeGradientSignAttack,
    LBFGSAttack,
    SaliencyMapAttack,
    SLSQPAttack,
    resolve_target,
)
from .score import LocalSearchAttack, ScoreAttackConfig, SinglePixelAttack

CATALOG = {
    cls.name: cls
    for cls in (
        GradientAttack,
        GradientSignAttack,
        IterativeGradientAttack,
        IterativeGradientSignAttack,
        DeepFoolL2Attack,
        DeepFoolLinfinityAttack,
        LBFGSAttack,
        ApproximateLBFGSAttack,
        SLSQPAttack,
        SaliencyMapAttack,
        SinglePixelAttack,
        LocalSearchAttack,
        BoundaryAttack,
        PointwiseAttack,
        AdditiveUniformNoiseAttack,
        AdditiveGaussianNoiseAttack,
        SaltAndPepperNoiseAttack,
        ContrastReductionAttack,
        GaussianBlurAttack,
        PrecomputedImagesAttack,
    )
}

GRADIENT_ATTACKS = tuple(n for n, c in CATALOG.items() if c.uses_gradients)
