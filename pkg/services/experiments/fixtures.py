"""
Seeded random Hamiltonians and initial points for desk-scale experiments.
"""
from __future__ import annotations
from services.quantum.hamiltonian import Hamiltonian, PauliString, Term, normalize
from services.quantum.simulator import AnsatzCircuit
import numpy as np

PAULI_ORDER = "IXYZ"


def pauli_from_index(index: int, n_qubits: int) -> PauliString:
    letters = []
    for _ in range(n_qubits):
        index, digit = divmod(index, 4)
        letters.append(PAULI_ORDER[digit])
    return PauliString("".join(reversed(letters)))


def random_hamiltonian(
    n_qubits: int,
    n_terms: int,
    rng: np.random.Generator,
    min_magnitude: float = 1e-2,
    max_magnitude: float = 1.0,
) -> Hamiltonian:
    """Distinct non-identity Pauli strings with log-uniform magnitudes and random signs."""
    available = 4 ** n_qubits - 1
    if not 1 <= n_terms <= available:
        raise ValueError(f"Can draw between 1 and {available} distinct terms on {n_qubits} qubits, got {n_terms}")

    indices = rng.choice(available, size=n_terms, replace=False) + 1
    magnitudes = np.exp(rng.uniform(np.log(min_magnitude), np.log(max_magnitude), size=n_terms))
    signs = rng.choice([-1.0, 1.0], size=n_terms)
    terms = tuple(
        Term(float(sign * magnitude), pauli_from_index(int(index), n_qubits))
        for index, magnitude, sign in zip(indices, magnitudes, signs)
    )
    return normalize(Hamiltonian(n_qubits=n_qubits, terms=terms))


def random_theta(circuit: AnsatzCircuit, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size=circuit.parameter_count)
