"""
Experiment drivers: variance sweeps on a fixed state and seeded multi-trial
optimization benchmarks scored with exact energies.
"""
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from pydantic import ValidationError
from core.config import settings
from core.errors import ConfigError, ShotFloorError
from core.schemas import AdamConfig, AggregateRow, ExperimentConfig, RosalinConfig, TraceRow, VarianceRow
from services.experiments.csv_io import aggregate_traces
from services.experiments.fixtures import random_theta
from services.optim.adam import run_adam
from services.optim.rosalin import RunTrace, run_rosalin
from services.quantum.hamiltonian import Hamiltonian, group_qwc_greedy, load_hamiltonian, parse_hamiltonian
from services.quantum.simulator import AnsatzCircuit, StateVector, apply_ansatz, exact_energy, exact_ground_energy
from services.sampling.strategies import Strategy, derive_rng, estimate_on_state, strategy_floor
from services.sampling.variance import analytic_variance, term_moments
import logging
import numpy as np
import orjson

logger = logging.getLogger(__name__)

# exact-gradient Adam steps used to reach a low-energy sweep state
OPTIMIZED_STEPS = 200
OPTIMIZED_STEP_SIZE = 0.05


def load_config_file(path: str | Path) -> dict:
    try:
        values = orjson.loads(Path(path).read_bytes())
    except orjson.JSONDecodeError as e:
        raise ConfigError(f"Cannot parse config {path}: {e}") from e
    if not isinstance(values, dict):
        raise ConfigError(f"Config {path} must hold a JSON object")
    return values


def build_config(values: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def load_experiment_hamiltonian(config: ExperimentConfig) -> Hamiltonian:
    if config.hamiltonian_text is not None:
        hamiltonian = parse_hamiltonian(config.hamiltonian_text)
    else:
        hamiltonian = load_hamiltonian(config.hamiltonian_path)
    if config.grouping == "qwc_greedy":
        hamiltonian = group_qwc_greedy(hamiltonian)
    return hamiltonian


def prepare_sweep_state(config: ExperimentConfig, hamiltonian: Hamiltonian, circuit: AnsatzCircuit) -> StateVector:
    theta = random_theta(circuit, derive_rng(config.base_seed))
    if config.theta_source == "optimized" and circuit.parameter_count:
        adam = AdamConfig(
            step_size=OPTIMIZED_STEP_SIZE,
            gradient_mode="exact",
            min_shots=2,
            total_budget=OPTIMIZED_STEPS * 2 * circuit.parameter_count * 2,
        )
        trace = run_adam(adam, hamiltonian, circuit, theta, Strategy.WRS, config.base_seed)
        theta = trace.final_theta
    state = apply_ansatz(circuit, theta)
    logger.info(f"Sweep state ({config.theta_source}) has energy {exact_energy(state, hamiltonian):.8g}")
    return state


def _empirical_variance(estimates: np.ndarray) -> float:
    return float(estimates.var(ddof=1)) if estimates.shape[0] > 1 else 0.0


def run_variance_sweep(config: ExperimentConfig) -> list[VarianceRow]:
    hamiltonian = load_experiment_hamiltonian(config)
    circuit = AnsatzCircuit(hamiltonian.n_qubits, config.depth)
    state = prepare_sweep_state(config, hamiltonian, circuit)
    moments = term_moments(state, hamiltonian)

    grid = config.resolved_shot_grid()
    cells = []
    for index, strategy in enumerate(config.strategy_list):
        floor = strategy_floor(strategy, hamiltonian)
        if config.strategies is not None and max(grid, default=0) < floor:
            # an explicitly requested strategy with no runnable cell is an error, not a skip
            raise ShotFloorError(strategy.value, max(grid, default=0), floor)
        for s_tot in grid:
            if s_tot < floor:
                logger.warning(f"Skipping {strategy.value} at s_tot={s_tot}: below its floor of {floor}")
                continue
            cells.append((index, strategy, s_tot))

    def run_cell(cell) -> VarianceRow:
        index, strategy, s_tot = cell
        estimates = estimate_on_state(
            state, hamiltonian, s_tot, strategy, derive_rng(config.base_seed, index, s_tot), config.n_trials,
            strict_hybrid=config.strict_hybrid, uniform_single=config.uniform_single,
        )
        return VarianceRow(
            strategy=strategy,
            s_tot=s_tot,
            analytic_variance=analytic_variance(strategy, hamiltonian, moments, s_tot, uniform_single=config.uniform_single),
            empirical_variance=_empirical_variance(estimates),
            n_trials=config.n_trials,
        )

    with ThreadPoolExecutor(max_workers=config.parallelism) as executor:
        rows = list(executor.map(run_cell, cells))
    logger.info(f"Variance sweep produced {len(rows)} rows")
    return rows


@dataclass
class BenchmarkResult:
    ground_energy: float
    rows: list[TraceRow]
    aggregate: list[AggregateRow]


def _run_optimizer(config: ExperimentConfig, hamiltonian: Hamiltonian, circuit: AnsatzCircuit, theta0, seed: int) -> RunTrace:
    try:
        if config.optimizer == "adam":
            overrides = {"step_size": config.learning_rate} if config.learning_rate is not None else {}
            adam = AdamConfig(
                total_budget=config.total_budget,
                gradient_mode=config.gradient_mode,
                strict_hybrid=config.strict_hybrid,
                **overrides,
            )
            return run_adam(adam, hamiltonian, circuit, theta0, config.strategy, seed)

        rosalin = RosalinConfig(
            total_budget=config.total_budget,
            strategy=config.strategy,
            learning_rate=config.learning_rate,
            gradient_mode=config.gradient_mode,
            strict_hybrid=config.strict_hybrid,
            sequential_updates=config.sequential_updates,
        )
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    return run_rosalin(rosalin, hamiltonian, circuit, theta0, seed)


def run_trial(
    config: ExperimentConfig,
    hamiltonian: Hamiltonian,
    circuit: AnsatzCircuit,
    ground_energy: float,
    trial: int,
) -> list[TraceRow]:
    seed = config.base_seed + trial
    theta0 = random_theta(circuit, derive_rng(seed))
    trace = _run_optimizer(config, hamiltonian, circuit, theta0, seed)

    points = [(0, theta0)] + [(record.shots, record.theta) for record in trace.records]
    rows = []
    for iteration, (shots, theta) in enumerate(points):
        energy = exact_energy(apply_ansatz(circuit, theta), hamiltonian)
        rows.append(TraceRow(trial=trial, iteration=iteration, shots=shots, energy=energy, delta_e=energy - ground_energy))
    logger.info(f"Trial {trial} done: {len(trace)} iterations, final delta E {rows[-1].delta_e:.6g}")
    return rows


def run_optimization_benchmark(config: ExperimentConfig) -> BenchmarkResult:
    hamiltonian = load_experiment_hamiltonian(config)
    circuit = AnsatzCircuit(hamiltonian.n_qubits, config.depth)
    ground_energy = exact_ground_energy(hamiltonian)
    logger.info(
        f"Benchmark: {config.optimizer}/{config.strategy.value}, {config.n_trials} trials, "
        f"budget {config.total_budget}, ground energy {ground_energy:.8g}"
    )

    with ThreadPoolExecutor(max_workers=config.parallelism) as executor:
        per_trial = list(executor.map(
            lambda trial: run_trial(config, hamiltonian, circuit, ground_energy, trial),
            range(config.n_trials),
        ))

    rows = [row for trial_rows in per_trial for row in trial_rows]
    traces = [
        (np.array([r.shots for r in trial_rows]), np.array([r.delta_e for r in trial_rows]))
        for trial_rows in per_trial
    ]
    aggregate = aggregate_traces(traces, config.total_budget, settings.aggregate_points)
    return BenchmarkResult(ground_energy=ground_energy, rows=rows, aggregate=aggregate)
