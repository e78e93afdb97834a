"""
Parameter-shift gradient estimates shared by Rosalin and Adam.
"""
from __future__ import annotations
from dataclasses import dataclass
from services.sampling.strategies import CostEstimator, derive_rng
import numpy as np

SHIFT = np.pi / 2


@dataclass(frozen=True)
class GradientSample:
    g: float
    # unbiased single-shot variance of (E+ - E-)/2
    S: float
    shots: int


def i_evaluate(
    estimator: CostEstimator,
    theta: np.ndarray,
    s_tot: int,
    component: int,
    rng: np.random.Generator,
) -> GradientSample:
    """Estimate one gradient component and its single-shot variance from s_tot shots per shift."""
    if s_tot < 2:
        raise ValueError(f"Gradient variance needs at least 2 shots per shift, got {s_tot}")

    # one child stream per shift sign
    plus_rng, minus_rng = rng.spawn(2)
    shifted = np.array(theta, dtype=float)
    shifted[component] += SHIFT
    plus = estimator.estimate(shifted, s_tot, plus_rng)
    shifted[component] -= 2 * SHIFT
    minus = estimator.estimate(shifted, s_tot, minus_rng)

    per_shot = (plus - minus) / 2
    g = float(per_shot.mean())
    S = float(per_shot.var(ddof=1)) if per_shot.shape[0] > 1 else 0.0
    return GradientSample(g=g, S=S, shots=plus.shape[0] + minus.shape[0])


def estimate_gradient(
    estimator: CostEstimator,
    theta: np.ndarray,
    s_tot: int,
    seed: int,
    iteration: int,
) -> tuple[np.ndarray, int]:
    """Full gradient at fixed shots per shift; returns the gradient and the shots it consumed."""
    grad = np.empty(theta.shape[0])
    used = 0
    for component in range(theta.shape[0]):
        sample = i_evaluate(estimator, theta, s_tot, component, derive_rng(seed, iteration, component))
        grad[component] = sample.g
        used += sample.shots
    return grad, used
