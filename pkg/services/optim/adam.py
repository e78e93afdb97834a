"""
Adam baseline over parameter-shift gradients at a fixed shot count per expectation.
"""
from __future__ import annotations
from core.errors import ConfigError, DimensionError
from core.schemas import AdamConfig
from services.optim.gradients import estimate_gradient
from services.optim.rosalin import IterationRecord, RunTrace
from services.quantum.hamiltonian import Hamiltonian
from services.quantum.simulator import AnsatzCircuit
from services.sampling.strategies import CostEstimator, Strategy, get_estimator, strategy_floor
import logging
import numpy as np

logger = logging.getLogger(__name__)


def adam_shots(config: AdamConfig, strategy: Strategy, hamiltonian: Hamiltonian) -> int:
    """The larger of the configured minimum and the strategy's shot floor."""
    return max(config.min_shots, strategy_floor(strategy, hamiltonian), 2)


def adam_update(theta, grad, m, v, t: int, config: AdamConfig):
    m = config.beta1 * m + (1 - config.beta1) * grad
    v = config.beta2 * v + (1 - config.beta2) * grad ** 2
    m_hat = m / (1 - config.beta1 ** t)
    v_hat = v / (1 - config.beta2 ** t)
    return theta - config.step_size * m_hat / (np.sqrt(v_hat) + config.eps), m, v


def run_adam(
    config: AdamConfig,
    hamiltonian: Hamiltonian,
    circuit: AnsatzCircuit,
    theta0,
    strategy: Strategy,
    seed: int,
    estimator: CostEstimator | None = None,
) -> RunTrace:
    theta = np.array(theta0, dtype=float)
    if theta.shape[0] == 0:
        raise ConfigError("Adam needs at least one parameter")
    if theta.shape != (circuit.parameter_count,):
        raise DimensionError(f"Ansatz expects {circuit.parameter_count} parameters, got {theta.shape[0]}")

    if estimator is None:
        estimator = get_estimator(config.gradient_mode, hamiltonian, circuit, strategy, strict_hybrid=config.strict_hybrid)
    shots = adam_shots(config, strategy, hamiltonian)
    d = theta.shape[0]
    logger.info(f"Adam run: strategy={strategy.value} budget={config.total_budget} shots/expectation={shots} d={d} seed={seed}")

    m = np.zeros(d)
    v = np.zeros(d)
    shots_used = 0
    trace = RunTrace(optimizer="adam")
    t = 0
    while shots_used < config.total_budget:
        grad, used = estimate_gradient(estimator, theta, shots, seed, t)
        # charged before the step, like Rosalin
        shots_used += used
        t += 1
        theta, m, v = adam_update(theta, grad, m, v, t, config)
        trace.records.append(
            IterationRecord(iteration=t - 1, shots=shots_used, theta=theta.copy(), shots_per_component=np.full(d, shots))
        )

    logger.info(f"Adam finished after {t} iterations, {shots_used} shots")
    return trace
