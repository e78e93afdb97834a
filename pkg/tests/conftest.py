from pathlib import Path
import numpy as np
import pytest

from services.experiments.fixtures import random_hamiltonian
from services.quantum.hamiltonian import parse_hamiltonian
from services.quantum.simulator import AnsatzCircuit, StateVector, random_state

DATA_DIR = Path(__file__).resolve().parent.parent / "data" / "hamiltonians"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def z_hamiltonian():
    return parse_hamiltonian("1.0 Z\n")


@pytest.fixture
def plus_state():
    return StateVector.from_amplitudes([1.0, 1.0])


@pytest.fixture
def one_qubit_circuit():
    # theta = (a, b, c) gives <Z> = cos(b)
    return AnsatzCircuit(n_qubits=1, depth=0)


@pytest.fixture
def diagonal_hamiltonian():
    """|00> is an eigenstate of every term; p = (0.5, 0.25, 0.25), shot floor 4."""
    return parse_hamiltonian("0.5 ZI\n0.25 IZ\n0.25 ZZ\n")


@pytest.fixture
def skewed_hamiltonian():
    """M = 1.01 with min |c| = 0.01, so the WDS floor is 101."""
    return parse_hamiltonian("1.0 Z\n0.01 X\n")


@pytest.fixture
def random_fixture():
    rng = np.random.default_rng(7)
    hamiltonian = random_hamiltonian(2, 5, rng)
    state = random_state(2, rng)
    return hamiltonian, state
