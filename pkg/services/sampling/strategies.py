"""
Shot allocation strategies and single-shot estimation of <H>.

Every estimate is a vector of single-shot estimates whose mean is the
unbiased estimator sum_i c_i/E[s_i] sum_j r_ij of the expected energy.
"""
from __future__ import annotations
from dataclasses import dataclass
try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        def __str__(self) -> str:
            return str.__str__(self)

        def __format__(self, format_spec: str) -> str:
            return str.__format__(str(self), format_spec)
from typing import Literal, Protocol
from core.errors import ShotFloorError
from services.quantum.hamiltonian import Hamiltonian, probabilities, shot_floor
from services.quantum.simulator import AnsatzCircuit, ShotSampler, StateVector, apply_ansatz, exact_energy
import logging
import numpy as np

logger = logging.getLogger(__name__)


class Strategy(StrEnum):
    UDS = "uds"
    WDS = "wds"
    WRS = "wrs"
    WHS = "whs"
    WSS = "wss"

    @property
    def is_deterministic(self) -> bool:
        return self in (Strategy.UDS, Strategy.WDS)


@dataclass(frozen=True)
class ShotAllocation:
    strategy: Strategy
    shots: np.ndarray
    expected_shots: np.ndarray
    s_rand: int = 0

    def __post_init__(self):
        if np.any(self.expected_shots <= 0):
            raise ValueError("Every term needs a positive expected shot count")

    @property
    def s_total_effective(self) -> int:
        return int(self.shots.sum())


@dataclass(frozen=True)
class EstimateVector:
    entries: np.ndarray
    allocation: ShotAllocation

    @property
    def mean(self) -> float:
        return float(self.entries.mean())

    def __len__(self) -> int:
        return self.entries.shape[0]


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream keyed e.g. by (trial seed, iteration, component); spawn children for finer splits."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def stable_floor(values: np.ndarray) -> np.ndarray:
    # 10 * 0.3 / 1.0 must floor to 3, not 2
    return np.floor(np.round(values, 9)).astype(np.int64)


def strategy_floor(strategy: Strategy, hamiltonian: Hamiltonian) -> int:
    if strategy is Strategy.UDS:
        return hamiltonian.n_terms
    if strategy is Strategy.WDS:
        return shot_floor(hamiltonian)
    return 1


def effective_total(strategy: Strategy, hamiltonian: Hamiltonian, s_tot: int) -> int:
    """Shots a deterministic allocation actually spends out of a request of `s_tot`."""
    if strategy is Strategy.UDS:
        return hamiltonian.n_terms * (s_tot // hamiltonian.n_terms)
    if strategy is Strategy.WDS:
        return int(stable_floor(s_tot * probabilities(hamiltonian)).sum())
    return s_tot


def _require_shots(s_tot: int):
    if s_tot < 1:
        raise ValueError(f"Need at least one shot, got {s_tot}")


def allocate_uds(hamiltonian: Hamiltonian, s_tot: int) -> ShotAllocation:
    n_terms = hamiltonian.n_terms
    if s_tot < n_terms:
        raise ShotFloorError(Strategy.UDS.value, s_tot, n_terms)
    shots = np.full(n_terms, s_tot // n_terms, dtype=np.int64)
    return ShotAllocation(Strategy.UDS, shots, shots.astype(float))


def allocate_wds(hamiltonian: Hamiltonian, s_tot: int) -> ShotAllocation:
    floor = shot_floor(hamiltonian)
    if s_tot < floor:
        raise ShotFloorError(Strategy.WDS.value, s_tot, floor)
    shots = stable_floor(s_tot * probabilities(hamiltonian))
    return ShotAllocation(Strategy.WDS, shots, shots.astype(float))


def draw_wrs(hamiltonian: Hamiltonian, s_tot: int, rng: np.random.Generator) -> ShotAllocation:
    _require_shots(s_tot)
    p = probabilities(hamiltonian)
    shots = rng.multinomial(s_tot, p).astype(np.int64)
    return ShotAllocation(Strategy.WRS, shots, p * s_tot, s_rand=s_tot)


def hybrid_split(hamiltonian: Hamiltonian, s_tot: int) -> tuple[np.ndarray, int]:
    """Deterministic WDS part and the number of leftover shots drawn at random."""
    p = probabilities(hamiltonian)
    deterministic = stable_floor(p * s_tot)
    if s_tot >= shot_floor(hamiltonian) and deterministic.min() > 0:
        return deterministic, s_tot - int(deterministic.sum())
    return np.zeros_like(deterministic), s_tot


def draw_whs(hamiltonian: Hamiltonian, s_tot: int, rng: np.random.Generator) -> ShotAllocation:
    _require_shots(s_tot)
    p = probabilities(hamiltonian)
    deterministic, s_rand = hybrid_split(hamiltonian, s_tot)
    shots = deterministic.copy()
    if s_rand:
        shots += rng.multinomial(s_rand, p).astype(np.int64)
    return ShotAllocation(Strategy.WHS, shots, deterministic + p * s_rand, s_rand=s_rand)


def single_sampling_probabilities(hamiltonian: Hamiltonian, uniform: bool = False) -> np.ndarray:
    if uniform:
        return np.full(hamiltonian.n_terms, 1.0 / hamiltonian.n_terms)
    return probabilities(hamiltonian)


def draw_wss(hamiltonian: Hamiltonian, s_tot: int, rng: np.random.Generator, uniform: bool = False) -> ShotAllocation:
    _require_shots(s_tot)
    p = single_sampling_probabilities(hamiltonian, uniform)
    chosen = rng.choice(hamiltonian.n_terms, p=p)
    shots = np.zeros(hamiltonian.n_terms, dtype=np.int64)
    shots[chosen] = s_tot
    return ShotAllocation(Strategy.WSS, shots, p * s_tot, s_rand=s_tot)


def allocate(
    strategy: Strategy,
    hamiltonian: Hamiltonian,
    s_tot: int,
    rng: np.random.Generator,
    uniform_single: bool = False,
) -> ShotAllocation:
    if strategy is Strategy.UDS:
        return allocate_uds(hamiltonian, s_tot)
    if strategy is Strategy.WDS:
        return allocate_wds(hamiltonian, s_tot)
    if strategy is Strategy.WRS:
        return draw_wrs(hamiltonian, s_tot, rng)
    if strategy is Strategy.WHS:
        return draw_whs(hamiltonian, s_tot, rng)
    return draw_wss(hamiltonian, s_tot, rng, uniform=uniform_single)


def shot_weights(
    hamiltonian: Hamiltonian,
    allocation: ShotAllocation,
    strict_hybrid: bool = False,
) -> np.ndarray:
    """Per-shot weight of each term so that the entry mean equals the unbiased estimator."""
    c = hamiltonian.coefficients
    if strict_hybrid and allocation.strategy is Strategy.WHS:
        return c / probabilities(hamiltonian)
    return c * allocation.s_total_effective / allocation.expected_shots


def estimate_with_sampler(
    sampler: ShotSampler,
    hamiltonian: Hamiltonian,
    s_tot: int,
    strategy: Strategy,
    rng: np.random.Generator,
    strict_hybrid: bool = False,
    uniform_single: bool = False,
) -> EstimateVector:
    allocation = allocate(strategy, hamiltonian, s_tot, rng, uniform_single=uniform_single)
    weights = shot_weights(hamiltonian, allocation, strict_hybrid=strict_hybrid)
    chunks = [
        weights[i] * sampler.draw(i, int(s_i), rng)
        for i, s_i in enumerate(allocation.shots)
        if s_i
    ]
    entries = np.concatenate(chunks) + hamiltonian.constant
    return EstimateVector(entries, allocation)


def mean_with_sampler(
    sampler: ShotSampler,
    hamiltonian: Hamiltonian,
    s_tot: int,
    strategy: Strategy,
    rng: np.random.Generator,
    strict_hybrid: bool = False,
    uniform_single: bool = False,
) -> float:
    """Mean of one estimate vector, drawing per-term outcome totals instead of single shots."""
    allocation = allocate(strategy, hamiltonian, s_tot, rng, uniform_single=uniform_single)
    weights = shot_weights(hamiltonian, allocation, strict_hybrid=strict_hybrid)
    total = sum(
        weights[i] * sampler.draw_total(i, int(s_i), rng)
        for i, s_i in enumerate(allocation.shots)
        if s_i
    )
    return float(total / allocation.s_total_effective + hamiltonian.constant)


def estimate_H(
    theta,
    s_tot: int,
    strategy: Strategy,
    hamiltonian: Hamiltonian,
    circuit: AnsatzCircuit,
    rng: np.random.Generator,
    strict_hybrid: bool = False,
    uniform_single: bool = False,
) -> EstimateVector:
    state = apply_ansatz(circuit, theta)
    sampler = ShotSampler(state, hamiltonian)
    estimate = estimate_with_sampler(
        sampler, hamiltonian, s_tot, strategy, rng, strict_hybrid=strict_hybrid, uniform_single=uniform_single
    )
    logger.debug(f"{strategy.value} estimate with {len(estimate)} shots, allocation {estimate.allocation.shots.tolist()}")
    return estimate


class CostEstimator(Protocol):
    def estimate(self, theta: np.ndarray, s_tot: int, rng: np.random.Generator) -> np.ndarray: ...

    def charged_shots(self, s_tot: int) -> int: ...


@dataclass
class SampledEstimator:
    hamiltonian: Hamiltonian
    circuit: AnsatzCircuit
    strategy: Strategy = Strategy.WRS
    strict_hybrid: bool = False
    uniform_single: bool = False

    def estimate(self, theta: np.ndarray, s_tot: int, rng: np.random.Generator) -> np.ndarray:
        return estimate_H(
            theta, s_tot, self.strategy, self.hamiltonian, self.circuit, rng,
            strict_hybrid=self.strict_hybrid, uniform_single=self.uniform_single,
        ).entries

    def charged_shots(self, s_tot: int) -> int:
        return effective_total(self.strategy, self.hamiltonian, s_tot)


@dataclass
class ExactEstimator:
    """Noise-free stand-in: every single-shot estimate equals the exact energy."""

    hamiltonian: Hamiltonian
    circuit: AnsatzCircuit

    def estimate(self, theta: np.ndarray, s_tot: int, rng: np.random.Generator) -> np.ndarray:
        energy = exact_energy(apply_ansatz(self.circuit, theta), self.hamiltonian)
        return np.full(s_tot, energy)

    def charged_shots(self, s_tot: int) -> int:
        return s_tot


def get_estimator(
    mode: Literal["sampled", "exact"],
    hamiltonian: Hamiltonian,
    circuit: AnsatzCircuit,
    strategy: Strategy = Strategy.WRS,
    strict_hybrid: bool = False,
    uniform_single: bool = False,
) -> CostEstimator:
    if mode == "exact":
        return ExactEstimator(hamiltonian, circuit)
    return SampledEstimator(hamiltonian, circuit, strategy, strict_hybrid, uniform_single)


def estimate_on_state(
    state: StateVector,
    hamiltonian: Hamiltonian,
    s_tot: int,
    strategy: Strategy,
    rng: np.random.Generator,
    n_estimates: int,
    strict_hybrid: bool = False,
    uniform_single: bool = False,
) -> np.ndarray:
    """Means of `n_estimates` independent estimations on one fixed state."""
    sampler = ShotSampler(state, hamiltonian)
    return np.array([
        mean_with_sampler(
            sampler, hamiltonian, s_tot, strategy, rng, strict_hybrid=strict_hybrid, uniform_single=uniform_single
        )
        for _ in range(n_estimates)
    ])
