"""
Desk-scale statevector simulator for the layered Rz-Ry-Rz ansatz.

Computes exact expectations and variances of Hamiltonian terms, draws
single-shot measurement outcomes, and diagonalizes small Hamiltonians
densely for ground-energy references.
"""
from __future__ import annotations
from dataclasses import dataclass
from core.config import settings
from core.errors import DimensionError
from services.quantum.hamiltonian import CommutingGroup, Hamiltonian, Operator, PauliString, to_dense
import logging
import numpy as np

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_DAGGER = np.diag([1, -1j]).astype(complex)
# Rotates a Y eigenbasis onto Z: apply S^dagger first, then H
BASIS_CHANGE = {"X": HADAMARD, "Y": HADAMARD @ S_DAGGER}


def rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise DimensionError(f"Expected {2 ** self.n_qubits} amplitudes, got {self.amplitudes.shape}")
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"State is not normalized (norm^2 = {norm})")

    @classmethod
    def zero(cls, n_qubits: int) -> StateVector:
        amplitudes = np.zeros(2 ** n_qubits, dtype=complex)
        amplitudes[0] = 1.0
        return cls(n_qubits, amplitudes)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> StateVector:
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n_qubits = int(round(np.log2(amplitudes.shape[0])))
        return cls(n_qubits, amplitudes / np.linalg.norm(amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def random_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    raw = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return StateVector.from_amplitudes(raw)


def apply_single_qubit(tensor: np.ndarray, gate: np.ndarray, qubit: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(gate, tensor, axes=([1], [qubit])), 0, qubit)


def apply_cnot(tensor: np.ndarray, control: int, target: int) -> np.ndarray:
    tensor = tensor.copy()
    index = [slice(None)] * tensor.ndim
    index[control] = 1
    # the target axis shifts down once the control axis is sliced away
    axis = target - 1 if target > control else target
    tensor[tuple(index)] = np.flip(tensor[tuple(index)], axis=axis).copy()
    return tensor


@dataclass(frozen=True)
class AnsatzCircuit:
    """Initial U layer, then `depth` blocks of a CNOT ladder followed by a U layer.

    Each U is Rz(a)·Ry(b)·Rz(c) acting right-to-left; parameters are laid out
    as [layer, qubit, (a, b, c)].
    """

    n_qubits: int
    depth: int = 1

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("Ansatz needs at least one qubit")
        if self.depth < 0:
            raise ValueError("Ansatz depth must be nonnegative")

    @property
    def parameter_count(self) -> int:
        return 3 * self.n_qubits * (self.depth + 1)


def _u_layer(tensor: np.ndarray, angles: np.ndarray) -> np.ndarray:
    for qubit, (a, b, c) in enumerate(angles):
        gate = rz(a) @ ry(b) @ rz(c)
        tensor = apply_single_qubit(tensor, gate, qubit)
    return tensor


def apply_ansatz(circuit: AnsatzCircuit, theta) -> StateVector:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.parameter_count,):
        raise DimensionError(f"Ansatz expects {circuit.parameter_count} parameters, got {theta.shape[0] if theta.ndim else 0}")

    n = circuit.n_qubits
    layers = theta.reshape(circuit.depth + 1, n, 3)
    tensor = StateVector.zero(n).amplitudes.reshape((2,) * n)
    tensor = _u_layer(tensor, layers[0])
    for layer in layers[1:]:
        for q in range(n - 1):
            tensor = apply_cnot(tensor, q, q + 1)
        tensor = _u_layer(tensor, layer)

    amplitudes = tensor.reshape(-1)
    # absorb round-off from the gate products
    return StateVector(n, amplitudes / np.linalg.norm(amplitudes))


def _check_dimensions(state: StateVector, op: Operator):
    if state.n_qubits != op.n_qubits:
        raise DimensionError(f"Operator acts on {op.n_qubits} qubits but state has {state.n_qubits}")


def pauli_expectation(state: StateVector, pauli: PauliString) -> float:
    targets, phases = pauli.action()
    image = np.zeros_like(state.amplitudes)
    image[targets] = phases * state.amplitudes
    return float(np.vdot(state.amplitudes, image).real)


def rotate_to_basis(state: StateVector, basis: str) -> StateVector:
    tensor = state.amplitudes.reshape((2,) * state.n_qubits)
    for qubit, letter in enumerate(basis):
        if letter in BASIS_CHANGE:
            tensor = apply_single_qubit(tensor, BASIS_CHANGE[letter], qubit)
    return StateVector(state.n_qubits, tensor.reshape(-1))


def _group_distribution(state: StateVector, group: CommutingGroup) -> tuple[np.ndarray, np.ndarray]:
    """Outcome probabilities in the group's product eigenbasis and the normalized value of each outcome."""
    probs = rotate_to_basis(state, group.basis).probabilities()
    return probs / probs.sum(), group.outcome_values() / group.norm


def exact_expectation(state: StateVector, op: Operator) -> float:
    _check_dimensions(state, op)
    if isinstance(op, PauliString):
        return pauli_expectation(state, op)
    total = sum(w * pauli_expectation(state, p) for w, p in op.members)
    return float(total / op.norm)


def second_moment(state: StateVector, op: Operator) -> float:
    _check_dimensions(state, op)
    if isinstance(op, PauliString):
        return 1.0
    probs, values = _group_distribution(state, op)
    return float(np.dot(probs, values ** 2))


def quantum_variance(state: StateVector, op: Operator) -> float:
    mean = exact_expectation(state, op)
    return max(second_moment(state, op) - mean ** 2, 0.0)


def exact_energy(state: StateVector, hamiltonian: Hamiltonian) -> float:
    energy = hamiltonian.constant
    for term in hamiltonian.terms:
        energy += term.coefficient * exact_expectation(state, term.operator)
    return float(energy)


@dataclass(frozen=True)
class ShotOutcome:
    value: float


class _PauliDraw:
    def __init__(self, state: StateVector, pauli: PauliString):
        self.p_plus = min(max(0.5 * (1.0 + pauli_expectation(state, pauli)), 0.0), 1.0)

    def __call__(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.where(rng.random(n) < self.p_plus, 1.0, -1.0)

    def total(self, n: int, rng: np.random.Generator) -> float:
        return float(2 * rng.binomial(n, self.p_plus) - n)


class _GroupDraw:
    def __init__(self, state: StateVector, group: CommutingGroup):
        self.probs, self.values = _group_distribution(state, group)

    def __call__(self, n: int, rng: np.random.Generator) -> np.ndarray:
        outcomes = rng.choice(self.probs.shape[0], size=n, p=self.probs)
        return self.values[outcomes]

    def total(self, n: int, rng: np.random.Generator) -> float:
        return float(rng.multinomial(n, self.probs) @ self.values)


def _drawer(state: StateVector, op: Operator):
    _check_dimensions(state, op)
    return _PauliDraw(state, op) if isinstance(op, PauliString) else _GroupDraw(state, op)


def sample_shots(state: StateVector, op: Operator, n: int, rng: np.random.Generator) -> np.ndarray:
    return _drawer(state, op)(n, rng)


def sample_shot(state: StateVector, op: Operator, rng: np.random.Generator) -> ShotOutcome:
    return ShotOutcome(float(sample_shots(state, op, 1, rng)[0]))


class ShotSampler:
    """Single-shot outcomes for every term of a Hamiltonian on one prepared state.

    The per-term outcome distributions are computed once, so repeated shots
    reuse the statevector instead of re-running the circuit.
    """

    def __init__(self, state: StateVector, hamiltonian: Hamiltonian):
        self.state = state
        self._drawers = [_drawer(state, op) for op in hamiltonian.operators]

    def draw(self, term_index: int, n: int, rng: np.random.Generator) -> np.ndarray:
        if n == 0:
            return np.empty(0)
        return self._drawers[term_index](n, rng)

    def draw_total(self, term_index: int, n: int, rng: np.random.Generator) -> float:
        """Sum of n single-shot outcomes, drawn from outcome counts instead of individual shots."""
        if n == 0:
            return 0.0
        return self._drawers[term_index].total(n, rng)


def exact_ground_energy(hamiltonian: Hamiltonian) -> float:
    if hamiltonian.n_qubits > settings.max_dense_qubits:
        raise DimensionError(
            f"Dense diagonalization is limited to {settings.max_dense_qubits} qubits, got {hamiltonian.n_qubits}"
        )
    return float(np.linalg.eigvalsh(to_dense(hamiltonian))[0])
