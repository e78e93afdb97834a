"""Statistical acceptance checks over many trials. Run with `pytest -m slow`."""
import numpy as np
import pytest

from services.experiments.fixtures import pauli_from_index, random_hamiltonian, random_theta
from services.experiments.runner import build_config, run_optimization_benchmark
from services.optim.gradients import estimate_gradient
from services.quantum.hamiltonian import Hamiltonian, Term, format_hamiltonian, group_qwc_greedy, normalize, to_dense
from services.quantum.simulator import AnsatzCircuit, apply_ansatz, exact_energy
from services.sampling.strategies import ExactEstimator, Strategy, derive_rng, estimate_on_state, strategy_floor
from services.sampling.variance import analytic_variance, exact_variance, term_moments, var_wrs

pytestmark = pytest.mark.slow

STRATEGIES = list(Strategy)
RANDOM_STRATEGIES = [Strategy.WRS, Strategy.WHS, Strategy.WSS]
ESTIMATIONS = 200_000


def _variance_stderr(samples: np.ndarray) -> float:
    centered = samples - samples.mean()
    m2 = np.mean(centered ** 2)
    m4 = np.mean(centered ** 4)
    return float(np.sqrt(max(m4 - m2 ** 2, 0.0) / samples.shape[0]))


def _assert_variance_matches(samples: np.ndarray, expected: float):
    tolerance = max(0.03 * expected, 5 * _variance_stderr(samples))
    assert abs(samples.var(ddof=1) - expected) <= tolerance + 1e-12


@pytest.fixture(scope="module")
def ratio_hamiltonian():
    """10 terms on 4 qubits with magnitudes k/5, k in 1..5, so s = K * N splits into whole shots."""
    rng = np.random.default_rng(2024)
    indices = rng.choice(255, size=10, replace=False) + 1
    weights = rng.integers(1, 6, size=10)
    signs = rng.choice([-1.0, 1.0], size=10)
    terms = tuple(
        Term(float(sign * k / 5), pauli_from_index(int(index), 4))
        for index, k, sign in zip(indices, weights, signs)
    )
    hamiltonian = normalize(Hamiltonian(4, terms))
    return hamiltonian, int(weights.sum())


@pytest.fixture(scope="module")
def ansatz_state():
    circuit = AnsatzCircuit(4, 2)
    return apply_ansatz(circuit, random_theta(circuit, derive_rng(77)))


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_unbiased_from_single_shot_to_ten_times_floor(ratio_hamiltonian, ansatz_state, strategy):
    hamiltonian, _ = ratio_hamiltonian
    moments = term_moments(ansatz_state, hamiltonian)
    energy = exact_energy(ansatz_state, hamiltonian)
    floor = strategy_floor(strategy, hamiltonian)
    grid = sorted({floor, 10 * floor} | ({1} if not strategy.is_deterministic else set()))
    for s_tot in grid:
        means = estimate_on_state(ansatz_state, hamiltonian, s_tot, strategy, derive_rng(1, s_tot), ESTIMATIONS)
        stderr = np.sqrt(exact_variance(strategy, hamiltonian, moments, s_tot) / ESTIMATIONS)
        assert abs(means.mean() - energy) < 5 * stderr + 1e-12


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_empirical_matches_closed_form(ratio_hamiltonian, ansatz_state, strategy):
    hamiltonian, total_weight = ratio_hamiltonian
    s_tot = total_weight * hamiltonian.n_terms
    if strategy is Strategy.WHS:
        # one leftover shot drawn at random on top of an exact split
        s_tot += 1
    moments = term_moments(ansatz_state, hamiltonian)
    means = estimate_on_state(ansatz_state, hamiltonian, s_tot, strategy, derive_rng(2, s_tot), ESTIMATIONS)
    _assert_variance_matches(means, analytic_variance(strategy, hamiltonian, moments, s_tot))


def test_wrs_variance_decays_as_inverse_shots(ratio_hamiltonian, ansatz_state):
    hamiltonian, _ = ratio_hamiltonian
    moments = term_moments(ansatz_state, hamiltonian)
    grid = np.array([10, 100, 1_000, 10_000, 100_000, 1_000_000])
    analytic = [var_wrs(hamiltonian.coefficients, moments, s) for s in grid]
    assert np.polyfit(np.log(grid), np.log(analytic), 1)[0] == pytest.approx(-1.0, abs=1e-9)

    empirical = [
        estimate_on_state(ansatz_state, hamiltonian, int(s), Strategy.WRS, derive_rng(3, int(s)), 10_000).var(ddof=1)
        for s in grid
    ]
    assert np.polyfit(np.log(grid), np.log(empirical), 1)[0] == pytest.approx(-1.0, abs=0.05)


@pytest.mark.parametrize("grouped", [False, True], ids=["terms", "qwc_groups"])
@pytest.mark.parametrize("strategy", RANDOM_STRATEGIES)
def test_single_shot_estimates(ratio_hamiltonian, ansatz_state, strategy, grouped):
    hamiltonian, _ = ratio_hamiltonian
    if grouped:
        hamiltonian = group_qwc_greedy(hamiltonian)
    moments = term_moments(ansatz_state, hamiltonian)
    expected = exact_variance(strategy, hamiltonian, moments, 1)
    means = estimate_on_state(ansatz_state, hamiltonian, 1, strategy, derive_rng(4, int(grouped)), ESTIMATIONS)
    assert abs(means.mean() - exact_energy(ansatz_state, hamiltonian)) < 5 * np.sqrt(expected / ESTIMATIONS) + 1e-12
    _assert_variance_matches(means, expected)


def test_parameter_shift_matches_finite_differences(ratio_hamiltonian):
    hamiltonian, _ = ratio_hamiltonian
    circuit = AnsatzCircuit(4, 2)
    estimator = ExactEstimator(hamiltonian, circuit)
    rng = derive_rng(5)
    step = 1e-5

    def cost(theta):
        return exact_energy(apply_ansatz(circuit, theta), hamiltonian)

    for _ in range(20):
        theta = random_theta(circuit, rng)
        grad, _ = estimate_gradient(estimator, theta, 2, seed=0, iteration=0)
        for component in range(circuit.parameter_count):
            shift = np.zeros_like(theta)
            shift[component] = step
            fd = (cost(theta + shift) - cost(theta - shift)) / (2 * step)
            assert grad[component] == pytest.approx(fd, abs=1e-6)


def _final_gaps(result, n_trials: int) -> np.ndarray:
    return np.array([[r for r in result.rows if r.trial == trial][-1].delta_e for trial in range(n_trials)])


def test_rosalin_reaches_ground_state_within_budget():
    hamiltonian = random_hamiltonian(4, 12, derive_rng(6), min_magnitude=0.1)
    spectrum = np.linalg.eigvalsh(to_dense(hamiltonian))
    values = {
        "mode": "optimize", "hamiltonian_text": format_hamiltonian(hamiltonian), "depth": 3,
        "total_budget": 2_000_000, "n_trials": 20, "base_seed": 100,
    }
    rosalin = _final_gaps(run_optimization_benchmark(build_config({**values, "strategies": ["wrs"]})), 20)
    adam = _final_gaps(
        run_optimization_benchmark(build_config({**values, "strategies": ["wds"], "optimizer": "adam"})), 20
    )

    assert np.all(rosalin >= -1e-9)
    assert np.mean(rosalin <= 0.01 * (spectrum[-1] - spectrum[0])) >= 0.9
    assert rosalin.mean() <= adam.mean()
