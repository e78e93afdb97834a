from fastapi import APIRouter
from core.config import settings
from core.errors import DimensionError
from core.schemas import HamiltonianSummary, HamiltonianText, StrategyVariance, TermOut, VarianceRequest, VarianceResponse
from services.experiments.fixtures import random_theta
from services.quantum.hamiltonian import Hamiltonian, group_qwc_greedy, parse_hamiltonian, shot_floor
from services.quantum.simulator import AnsatzCircuit, apply_ansatz, exact_energy, exact_ground_energy
from services.sampling.strategies import Strategy, derive_rng, strategy_floor
from services.sampling.variance import analytic_variance, exact_variance, term_moments
import numpy as np

router = APIRouter()


def _parse(payload: HamiltonianText) -> Hamiltonian:
    hamiltonian = parse_hamiltonian(payload.text)
    return group_qwc_greedy(hamiltonian) if payload.group_qwc else hamiltonian


@router.post("/inspect", response_model=HamiltonianSummary)
def inspect_hamiltonian(payload: HamiltonianText):
    hamiltonian = _parse(payload)
    ground = exact_ground_energy(hamiltonian) if hamiltonian.n_qubits <= settings.max_dense_qubits else None
    return HamiltonianSummary(
        n_qubits=hamiltonian.n_qubits,
        n_terms=hamiltonian.n_terms,
        one_norm=hamiltonian.one_norm,
        shot_floor=shot_floor(hamiltonian),
        constant=hamiltonian.constant,
        ground_energy=ground,
        terms=[TermOut(coefficient=t.coefficient, operator=str(t.operator)) for t in hamiltonian.terms],
    )


@router.post("/variances", response_model=VarianceResponse)
def strategy_variances(payload: VarianceRequest):
    """Analytic and as-implemented variance of every strategy on one ansatz state."""
    hamiltonian = _parse(payload)
    circuit = AnsatzCircuit(hamiltonian.n_qubits, payload.depth)
    if payload.theta is None:
        theta = random_theta(circuit, derive_rng(payload.seed))
    else:
        theta = np.asarray(payload.theta, dtype=float)
        if theta.shape != (circuit.parameter_count,):
            raise DimensionError(f"Ansatz expects {circuit.parameter_count} parameters, got {theta.shape[0]}")

    state = apply_ansatz(circuit, theta)
    moments = term_moments(state, hamiltonian)
    rows = []
    for strategy in Strategy:
        floor = strategy_floor(strategy, hamiltonian)
        if payload.s_tot < floor:
            rows.append(StrategyVariance(strategy=strategy, analytic_variance=None, exact_variance=None, floor=floor))
            continue
        rows.append(StrategyVariance(
            strategy=strategy,
            analytic_variance=analytic_variance(strategy, hamiltonian, moments, payload.s_tot),
            exact_variance=exact_variance(strategy, hamiltonian, moments, payload.s_tot),
            floor=floor,
        ))
    return VarianceResponse(energy=exact_energy(state, hamiltonian), s_tot=payload.s_tot, rows=rows)
