"""
Rosalin: stochastic gradient descent that reallocates shots per gradient
component every iteration to maximize the expected gain per shot.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from core.errors import ConfigError, DimensionError
from core.schemas import RosalinConfig
from services.optim.gradients import i_evaluate
from services.quantum.hamiltonian import Hamiltonian
from services.quantum.simulator import AnsatzCircuit
from services.sampling.strategies import CostEstimator, derive_rng, get_estimator, strategy_floor
import logging
import math
import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    theta: np.ndarray
    shots_per_component: np.ndarray
    chi_prime: np.ndarray
    xi_prime: np.ndarray
    k: int = 0
    shots_used: int = 0

    @classmethod
    def initial(cls, theta0, s_min: int) -> OptimizerState:
        theta = np.array(theta0, dtype=float)
        d = theta.shape[0]
        return cls(
            theta=theta,
            shots_per_component=np.full(d, s_min, dtype=np.int64),
            chi_prime=np.zeros(d),
            xi_prime=np.zeros(d),
        )


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    # cumulative shots charged once this iteration is done
    shots: int
    theta: np.ndarray
    shots_per_component: np.ndarray


@dataclass
class RunTrace:
    optimizer: str
    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final_theta(self) -> np.ndarray | None:
        return self.records[-1].theta if self.records else None

    @property
    def shots(self) -> np.ndarray:
        return np.array([r.shots for r in self.records], dtype=np.int64)


def required_shots(xi: float, chi: float, lipschitz: float, lr: float, regularizer: float, cap: int) -> int:
    """Shots s = ceil((2 L a / (2 - L a)) * xi / (chi^2 + b mu^k)), saturating at `cap`."""
    denominator = (2.0 - lipschitz * lr) * (chi ** 2 + regularizer)
    numerator = 2.0 * lipschitz * lr * xi
    if denominator <= 0.0:
        return cap
    value = numerator / denominator
    if not math.isfinite(value) or value >= cap:
        return cap
    return max(int(math.ceil(round(value, 9))), 1)


def expected_gain(xi: float, chi: float, shots: int, lipschitz: float, lr: float) -> float:
    return ((lr - lipschitz * lr ** 2 / 2) * chi ** 2 - (lipschitz * lr ** 2 / (2 * shots)) * xi) / shots


def rosalin_step(
    state: OptimizerState,
    config: RosalinConfig,
    estimator: CostEstimator,
    seed: int,
) -> tuple[OptimizerState, IterationRecord]:
    """One iteration: charge the shots both shifts will spend up front, then evaluate and update each component in order."""
    lipschitz, lr, mu = config.lipschitz, config.learning_rate, config.mu
    if lipschitz is None or lr is None:
        raise ConfigError("RosalinConfig must be resolved against a Hamiltonian before stepping")

    shots = state.shots_per_component
    d = shots.shape[0]
    shots_used = state.shots_used + 2 * sum(estimator.charged_shots(int(s)) for s in shots)

    theta = state.theta.copy()
    chi_prime = state.chi_prime.copy()
    xi_prime = state.xi_prime.copy()
    new_shots = np.empty(d, dtype=np.int64)
    gamma = np.empty(d)

    correction = 1.0 - mu ** (state.k + 1)
    regularizer = config.bias * mu ** state.k

    for component in range(d):
        point = theta if config.sequential_updates else state.theta
        sample = i_evaluate(estimator, point, int(shots[component]), component, derive_rng(seed, state.k, component))

        xi_prime[component] = mu * xi_prime[component] + (1 - mu) * sample.S
        chi_prime[component] = mu * chi_prime[component] + (1 - mu) * sample.g
        xi = xi_prime[component] / correction
        chi = chi_prime[component] / correction

        theta[component] -= lr * sample.g

        new_shots[component] = required_shots(xi, chi, lipschitz, lr, regularizer, config.shot_cap)
        gamma[component] = expected_gain(xi, chi, int(new_shots[component]), lipschitz, lr)

    # argmax returns the lowest index on ties
    s_max = max(int(new_shots[int(np.argmax(gamma))]), config.s_min)
    clipped = np.clip(new_shots, config.s_min, s_max)

    next_state = OptimizerState(
        theta=theta,
        shots_per_component=clipped,
        chi_prime=chi_prime,
        xi_prime=xi_prime,
        k=state.k + 1,
        shots_used=shots_used,
    )
    record = IterationRecord(iteration=state.k, shots=shots_used, theta=theta.copy(), shots_per_component=shots.copy())
    logger.debug(f"Rosalin k={state.k} shots={shots_used} s={clipped.tolist()}")
    return next_state, record


def run_rosalin(
    config: RosalinConfig,
    hamiltonian: Hamiltonian,
    circuit: AnsatzCircuit,
    theta0,
    seed: int,
    estimator: CostEstimator | None = None,
) -> RunTrace:
    """Iterate until the shot ledger reaches the budget. The initial point is not part of the trace."""
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape[0] == 0:
        raise ConfigError("Rosalin needs at least one parameter")
    if theta0.shape != (circuit.parameter_count,):
        raise DimensionError(f"Ansatz expects {circuit.parameter_count} parameters, got {theta0.shape[0]}")

    config = config.resolved(hamiltonian.one_norm)
    if config.gradient_mode == "sampled":
        floor = strategy_floor(config.strategy, hamiltonian)
        if floor > config.s_min:
            logger.info(f"Raising s_min from {config.s_min} to the {config.strategy.value} floor {floor}")
            config = config.with_shot_floor(floor)
    if estimator is None:
        estimator = get_estimator(
            config.gradient_mode, hamiltonian, circuit, config.strategy, strict_hybrid=config.strict_hybrid
        )

    logger.info(
        f"Rosalin run: strategy={config.strategy.value} budget={config.total_budget} "
        f"L={config.lipschitz:.6g} lr={config.learning_rate:.6g} d={theta0.shape[0]} seed={seed}"
    )
    state = OptimizerState.initial(theta0, config.s_min)
    trace = RunTrace(optimizer="rosalin")
    while state.shots_used < config.total_budget:
        state, record = rosalin_step(state, config, estimator, seed)
        trace.records.append(record)

    logger.info(f"Rosalin finished after {len(trace)} iterations, {state.shots_used} shots")
    return trace
