"""
Hamiltonians as weighted sums of directly measurable operators.

A term operator is either a single Pauli string or a qubit-wise commuting
group of weighted Pauli strings. Qubit 0 is the leftmost letter and the most
significant bit of a computational basis index.
"""
from __future__ import annotations
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Union
from core.errors import DimensionError, HamiltonianParseError
import itertools
import logging
import math
import numpy as np

logger = logging.getLogger(__name__)

PAULI_LETTERS = frozenset("IXYZ")

# Merged coefficients below this magnitude are dropped
MERGE_TOLERANCE = 1e-12


def parity(values: np.ndarray, mask: int) -> np.ndarray:
    """(-1)**popcount(values & mask) as +1/-1 integers."""
    bits = np.bitwise_count(values & mask) & 1
    return 1 - 2 * bits.astype(np.int64)


@dataclass(frozen=True)
class PauliString:
    letters: str

    def __post_init__(self):
        if not self.letters:
            raise ValueError("Pauli string must act on at least one qubit")
        bad = set(self.letters) - PAULI_LETTERS
        if bad:
            raise ValueError(f"Invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def norm(self) -> float:
        return 1.0

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, letter in enumerate(self.letters) if letter != "I")

    def _bit(self, qubit: int) -> int:
        return 1 << (self.n_qubits - 1 - qubit)

    @cached_property
    def x_mask(self) -> int:
        return sum(self._bit(q) for q, letter in enumerate(self.letters) if letter in "XY")

    @cached_property
    def z_mask(self) -> int:
        return sum(self._bit(q) for q, letter in enumerate(self.letters) if letter in "YZ")

    @cached_property
    def support_mask(self) -> int:
        return sum(self._bit(q) for q in self.support)

    def action(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (targets, phases) with P|b> = phases[b] |targets[b]> over the full basis."""
        basis = np.arange(2 ** self.n_qubits, dtype=np.int64)
        n_y = self.letters.count("Y")
        phases = (1j ** n_y) * parity(basis, self.z_mask)
        return basis ^ self.x_mask, phases

    def __str__(self) -> str:
        return self.letters


def qubitwise_commute(a: PauliString, b: PauliString) -> bool:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"Cannot compare {a.n_qubits}-qubit and {b.n_qubits}-qubit strings")
    return all(x == y or x == "I" or y == "I" for x, y in zip(a.letters, b.letters))


@dataclass(frozen=True)
class CommutingGroup:
    """Weighted sum of pairwise qubit-wise commuting Pauli strings, measured with one shot."""

    members: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("Commuting group must have at least one member")
        n_qubits = self.members[0][1].n_qubits
        for _, pauli in self.members:
            if pauli.n_qubits != n_qubits:
                raise DimensionError("All group members must act on the same number of qubits")
        for (_, a), (_, b) in itertools.combinations(self.members, 2):
            if not qubitwise_commute(a, b):
                raise ValueError(f"{a} and {b} do not commute qubit-wise")

    @property
    def n_qubits(self) -> int:
        return self.members[0][1].n_qubits

    @cached_property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members], dtype=float)

    @cached_property
    def basis(self) -> str:
        """Common product measurement basis, one letter per qubit (I where unsupported)."""
        letters = ["I"] * self.n_qubits
        for _, pauli in self.members:
            for q in pauli.support:
                letters[q] = pauli.letters[q]
        return "".join(letters)

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, letter in enumerate(self.basis) if letter != "I")

    def joint_eigenvalues(self) -> np.ndarray:
        """Eigenvalue of the weighted sum for every outcome assignment on the support qubits."""
        k = len(self.support)
        position = {q: k - 1 - j for j, q in enumerate(self.support)}
        outcomes = np.arange(2 ** k, dtype=np.int64)
        values = np.zeros(2 ** k)
        for weight, pauli in self.members:
            mask = sum(1 << position[q] for q in pauli.support)
            values += weight * parity(outcomes, mask)
        return values

    def outcome_values(self) -> np.ndarray:
        """Eigenvalue of the weighted sum for every full computational outcome in the rotated basis."""
        basis = np.arange(2 ** self.n_qubits, dtype=np.int64)
        values = np.zeros(basis.shape[0])
        for weight, pauli in self.members:
            values += weight * parity(basis, pauli.support_mask)
        return values

    @cached_property
    def norm(self) -> float:
        return float(np.max(np.abs(self.joint_eigenvalues())))

    def scaled(self, factor: float) -> CommutingGroup:
        return CommutingGroup(tuple((w * factor, p) for w, p in self.members))

    def __str__(self) -> str:
        return "{" + ", ".join(f"{w:g}*{p}" for w, p in self.members) + "}"


Operator = Union[PauliString, CommutingGroup]


@dataclass(frozen=True)
class Term:
    coefficient: float
    operator: Operator


@dataclass(frozen=True)
class Hamiltonian:
    n_qubits: int
    terms: tuple[Term, ...]
    # Identity contribution; never sampled and excluded from M
    constant: float = 0.0
    normalized: bool = False

    def __post_init__(self):
        if not self.terms:
            raise ValueError("Hamiltonian needs at least one measurable term")
        for term in self.terms:
            if term.operator.n_qubits != self.n_qubits:
                raise DimensionError(
                    f"Term {term.operator} acts on {term.operator.n_qubits} qubits, expected {self.n_qubits}"
                )
            if term.coefficient == 0.0:
                raise ValueError("Term coefficients must be nonzero")

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms], dtype=float)

    @cached_property
    def one_norm(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    @property
    def operators(self) -> list[Operator]:
        return [t.operator for t in self.terms]

    @property
    def is_grouped(self) -> bool:
        return any(isinstance(t.operator, CommutingGroup) for t in self.terms)


def _sorted_terms(terms: Iterable[Term]) -> tuple[Term, ...]:
    # stable: ties keep input order
    return tuple(sorted(terms, key=lambda t: -abs(t.coefficient)))


def parse_hamiltonian(text: str) -> Hamiltonian:
    merged: dict[str, float] = {}
    constant = 0.0
    n_qubits: int | None = None
    seen_terms = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianParseError(f"expected '<coefficient> <pauli letters>', got {raw.strip()!r}", lineno)
        coef_text, letters = parts
        try:
            coefficient = float(coef_text)
        except ValueError:
            raise HamiltonianParseError(f"invalid coefficient {coef_text!r}", lineno) from None
        if not math.isfinite(coefficient):
            raise HamiltonianParseError(f"coefficient must be finite, got {coef_text!r}", lineno)
        if set(letters) - PAULI_LETTERS:
            raise HamiltonianParseError(f"invalid Pauli string {letters!r}", lineno)
        if n_qubits is None:
            n_qubits = len(letters)
        elif len(letters) != n_qubits:
            raise HamiltonianParseError(
                f"Pauli string {letters!r} has {len(letters)} qubits, expected {n_qubits}", lineno
            )
        seen_terms += 1
        if set(letters) == {"I"}:
            constant += coefficient
        else:
            merged[letters] = merged.get(letters, 0.0) + coefficient

    if seen_terms == 0 or n_qubits is None:
        raise HamiltonianParseError("empty term list")

    terms = [Term(c, PauliString(letters)) for letters, c in merged.items() if abs(c) >= MERGE_TOLERANCE]
    if not terms:
        raise HamiltonianParseError("all coefficients vanish after merging duplicate terms")
    if abs(constant) < MERGE_TOLERANCE:
        constant = 0.0

    dropped = len(merged) - len(terms)
    if dropped:
        logger.debug(f"Dropped {dropped} terms whose merged coefficient vanished")

    return normalize(Hamiltonian(n_qubits=n_qubits, terms=tuple(terms), constant=constant))


def load_hamiltonian(path: str | Path) -> Hamiltonian:
    text = Path(path).read_text(encoding="utf-8")
    hamiltonian = parse_hamiltonian(text)
    logger.info(f"Loaded {path}: {hamiltonian.n_terms} terms on {hamiltonian.n_qubits} qubits, M={hamiltonian.one_norm:.6g}")
    return hamiltonian


def normalize(hamiltonian: Hamiltonian) -> Hamiltonian:
    terms = []
    for term in hamiltonian.terms:
        op = term.operator
        norm = op.norm
        # unit-norm groups stay untouched so normalizing twice is a no-op
        if isinstance(op, CommutingGroup) and not math.isclose(norm, 1.0, rel_tol=1e-12):
            terms.append(Term(term.coefficient * norm, op.scaled(1.0 / norm)))
        else:
            terms.append(term)
    return replace(hamiltonian, terms=_sorted_terms(terms), normalized=True)


def probabilities(hamiltonian: Hamiltonian) -> np.ndarray:
    weights = np.abs(hamiltonian.coefficients)
    return weights / weights.sum()


def shot_floor(hamiltonian: Hamiltonian) -> int:
    weights = np.abs(hamiltonian.coefficients)
    ratio = weights.sum() / weights.min()
    # round away accumulation error before the ceiling, e.g. 1.01/0.01
    return int(math.ceil(round(float(ratio), 9)))


def group_qwc_greedy(hamiltonian: Hamiltonian) -> Hamiltonian:
    """First-fit greedy qubit-wise commuting grouping over terms sorted by descending |c_i|."""
    if hamiltonian.is_grouped:
        raise ValueError("Hamiltonian is already grouped")

    groups: list[list[tuple[float, PauliString]]] = []
    for term in _sorted_terms(hamiltonian.terms):
        pauli = term.operator
        for group in groups:
            if all(qubitwise_commute(pauli, other) for _, other in group):
                group.append((term.coefficient, pauli))
                break
        else:
            groups.append([(term.coefficient, pauli)])

    logger.debug(f"Grouped {hamiltonian.n_terms} terms into {len(groups)} qubit-wise commuting sets")
    terms = tuple(Term(1.0, CommutingGroup(tuple(members))) for members in groups)
    return normalize(Hamiltonian(n_qubits=hamiltonian.n_qubits, terms=terms, constant=hamiltonian.constant))


def operator_matrix(op: Operator) -> np.ndarray:
    dim = 2 ** op.n_qubits
    matrix = np.zeros((dim, dim), dtype=complex)
    paulis = [(1.0, op)] if isinstance(op, PauliString) else op.members
    for weight, pauli in paulis:
        targets, phases = pauli.action()
        matrix[targets, np.arange(dim)] += weight * phases
    return matrix


def to_dense(hamiltonian: Hamiltonian) -> np.ndarray:
    dim = 2 ** hamiltonian.n_qubits
    matrix = hamiltonian.constant * np.eye(dim, dtype=complex)
    for term in hamiltonian.terms:
        matrix += term.coefficient * operator_matrix(term.operator)
    return matrix


def format_hamiltonian(hamiltonian: Hamiltonian) -> str:
    lines = []
    if hamiltonian.constant:
        lines.append(f"{hamiltonian.constant!r} {'I' * hamiltonian.n_qubits}")
    for term in hamiltonian.terms:
        op = term.operator
        members = [(1.0, op)] if isinstance(op, PauliString) else op.members
        for weight, pauli in members:
            lines.append(f"{term.coefficient * weight!r} {pauli.letters}")
    return "\n".join(lines) + "\n"
