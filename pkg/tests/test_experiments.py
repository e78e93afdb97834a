"""Tests for fixtures, the variance sweep, the optimization benchmark and CSV output."""
import io

import numpy as np
import pytest

from core.errors import ConfigError, ShotFloorError
from core.schemas import AggregateRow, ExperimentConfig, TraceRow
from services.experiments.csv_io import aggregate_path, aggregate_traces, write_csv
from services.experiments.fixtures import pauli_from_index, random_hamiltonian, random_theta
from services.experiments.runner import (
    build_config,
    load_config_file,
    prepare_sweep_state,
    run_optimization_benchmark,
    run_variance_sweep,
)
from services.quantum.hamiltonian import load_hamiltonian
from services.quantum.simulator import AnsatzCircuit, apply_ansatz, exact_energy
from services.sampling.strategies import Strategy, derive_rng


class TestFixtures:
    @pytest.mark.parametrize("index, letters", [(1, "IX"), (4, "XI"), (15, "ZZ"), (6, "XY")])
    def test_pauli_from_index(self, index, letters):
        assert str(pauli_from_index(index, 2)) == letters

    def test_random_hamiltonian(self):
        h = random_hamiltonian(2, 6, np.random.default_rng(0))
        assert h.n_terms == 6
        assert len({str(t.operator) for t in h.terms}) == 6
        assert h.constant == 0.0
        assert np.all(np.abs(h.coefficients) >= 1e-2 - 1e-15)
        assert np.all(np.abs(h.coefficients) <= 1.0 + 1e-15)

    def test_too_many_terms(self):
        with pytest.raises(ValueError, match="between 1 and 3"):
            random_hamiltonian(1, 4, np.random.default_rng(0))

    def test_random_theta_range(self):
        theta = random_theta(AnsatzCircuit(2, 1), np.random.default_rng(0))
        assert theta.shape == (12,)
        assert np.all((theta >= 0) & (theta < 2 * np.pi))


class TestAggregate:
    def test_step_interpolation(self):
        traces = [
            (np.array([0, 10, 20]), np.array([1.0, 0.5, 0.1])),
            (np.array([0, 15]), np.array([2.0, 1.0])),
        ]
        rows = aggregate_traces(traces, budget=20, points=4)
        assert [r.shots for r in rows] == [0.0, 5.0, 10.0, 15.0, 20.0]
        np.testing.assert_allclose([r.mean_delta_e for r in rows], [1.5, 1.5, 1.25, 0.75, 0.55])
        np.testing.assert_allclose([r.stderr_delta_e for r in rows], [0.5, 0.5, 0.75, 0.25, 0.45])

    def test_zero_budget(self):
        rows = aggregate_traces([(np.array([0]), np.array([0.3]))], budget=0, points=10)
        assert rows == [AggregateRow(shots=0.0, mean_delta_e=0.3, stderr_delta_e=0.0)]

    def test_aggregate_path(self):
        assert aggregate_path("runs/h2.csv").name == "h2_aggregate.csv"


class TestCsv:
    def test_header_and_float_repr(self):
        handle = io.StringIO()
        write_csv(handle, TraceRow, [TraceRow(trial=0, iteration=1, shots=12, energy=-0.1, delta_e=0.9)])
        assert handle.getvalue() == "trial,iteration,shots,energy,delta_e\n0,1,12,-0.1,0.9\n"


class TestConfig:
    def test_needs_a_hamiltonian(self):
        with pytest.raises(ConfigError, match="hamiltonian_path or hamiltonian_text"):
            build_config({"mode": "optimize"})

    def test_optimize_takes_one_strategy(self):
        with pytest.raises(ConfigError, match="exactly one strategy"):
            build_config({"mode": "optimize", "hamiltonian_text": "1.0 Z", "strategies": ["wrs", "wds"]})

    def test_default_strategies(self):
        sweep = build_config({"mode": "variance_sweep", "hamiltonian_text": "1.0 Z"})
        assert sweep.strategy_list == list(Strategy)
        assert build_config({"mode": "optimize", "hamiltonian_text": "1.0 Z"}).strategy is Strategy.WRS

    def test_default_shot_grid(self):
        config = ExperimentConfig(hamiltonian_text="1.0 Z", total_budget=5000)
        assert config.resolved_shot_grid() == [1, 10, 100, 1000]
        assert ExperimentConfig(hamiltonian_text="1.0 Z", shot_grid=[50, 5, 50]).resolved_shot_grid() == [5, 50]

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="Cannot parse"):
            load_config_file(path)

    def test_non_object_json(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="JSON object"):
            load_config_file(path)


class TestVarianceSweep:
    def test_single_term_strategies_agree(self):
        config = build_config({
            "mode": "variance_sweep", "hamiltonian_text": "1.0 Z", "depth": 0,
            "shot_grid": [1, 10, 100], "n_trials": 50, "base_seed": 3,
        })
        rows = run_variance_sweep(config)
        assert len(rows) == 15
        scaled = np.array([r.analytic_variance * r.s_tot for r in rows])
        np.testing.assert_allclose(scaled, scaled[0])
        assert all(r.n_trials == 50 for r in rows)

    def test_cells_below_floor_are_skipped(self):
        config = build_config({
            "mode": "variance_sweep", "hamiltonian_text": "1.0 Z\n0.01 X", "depth": 0,
            "shot_grid": [10, 1000], "n_trials": 20,
        })
        cells = {(r.strategy, r.s_tot) for r in run_variance_sweep(config)}
        assert (Strategy.WDS, 10) not in cells
        assert (Strategy.WDS, 1000) in cells
        assert (Strategy.UDS, 10) in cells
        assert len(cells) == 9

    def test_requested_strategy_below_floor_raises(self):
        config = build_config({
            "mode": "variance_sweep", "hamiltonian_text": "1.0 Z\n0.01 X", "depth": 0,
            "strategies": ["wrs", "wds"], "shot_grid": [10, 50], "n_trials": 20,
        })
        with pytest.raises(ShotFloorError) as info:
            run_variance_sweep(config)
        assert (info.value.strategy, info.value.s_tot, info.value.floor) == ("wds", 50, 101)

    def test_parallelism_does_not_change_rows(self):
        values = {"mode": "variance_sweep", "hamiltonian_text": "0.5 ZI\n-0.3 XX\n0.2 IY", "shot_grid": [10, 40], "n_trials": 30}
        serial = run_variance_sweep(build_config({**values, "parallelism": 1}))
        parallel = run_variance_sweep(build_config({**values, "parallelism": 4}))
        assert serial == parallel

    def test_optimized_state_has_lower_energy(self, data_dir):
        hamiltonian = load_hamiltonian(data_dir / "h2_sto3g.txt")
        circuit = AnsatzCircuit(2, 1)
        random_config = ExperimentConfig(hamiltonian_path=str(data_dir / "h2_sto3g.txt"), base_seed=2)
        optimized_config = random_config.model_copy(update={"theta_source": "optimized"})
        start = prepare_sweep_state(random_config, hamiltonian, circuit)
        optimized = prepare_sweep_state(optimized_config, hamiltonian, circuit)
        np.testing.assert_allclose(
            start.amplitudes, apply_ansatz(circuit, random_theta(circuit, derive_rng(2))).amplitudes
        )
        assert exact_energy(optimized, hamiltonian) < exact_energy(start, hamiltonian)


class TestOptimizationBenchmark:
    @pytest.fixture
    def values(self):
        return {
            "mode": "optimize", "hamiltonian_text": "1.0 Z", "depth": 0,
            "total_budget": 2000, "n_trials": 3, "base_seed": 11, "learning_rate": 0.1,
        }

    def test_trace_rows(self, values):
        result = run_optimization_benchmark(build_config(values))
        assert result.ground_energy == pytest.approx(-1.0)
        for trial in range(3):
            rows = [r for r in result.rows if r.trial == trial]
            assert rows[0].iteration == 0 and rows[0].shots == 0
            assert [r.iteration for r in rows] == list(range(len(rows)))
            assert np.all(np.diff([r.shots for r in rows]) > 0)
            assert rows[-1].shots >= 2000
            assert all(r.delta_e >= -1e-9 for r in rows)
            assert all(r.delta_e == pytest.approx(r.energy + 1.0) for r in rows)
        assert [r.trial for r in result.rows] == sorted(r.trial for r in result.rows)
        assert len(result.aggregate) == 201
        assert result.aggregate[-1].shots == 2000.0

    def test_deterministic_across_parallelism(self, values):
        first = run_optimization_benchmark(build_config({**values, "parallelism": 1}))
        second = run_optimization_benchmark(build_config({**values, "parallelism": 3}))
        assert first.rows == second.rows
        assert first.aggregate == second.aggregate

    def test_zero_budget(self, values):
        result = run_optimization_benchmark(build_config({**values, "total_budget": 0}))
        assert len(result.rows) == 3
        assert all(r.shots == 0 and r.iteration == 0 for r in result.rows)
        assert len(result.aggregate) == 1

    def test_adam(self, values):
        result = run_optimization_benchmark(build_config({**values, "optimizer": "adam", "total_budget": 3000}))
        first_trial = [r for r in result.rows if r.trial == 0]
        # 3 parameters, 100 shots per expectation, 2 shifts
        assert [r.shots for r in first_trial] == [0, 600, 1200, 1800, 2400, 3000]

    @pytest.mark.parametrize("strategy, step", [("wds", 2), ("uds", 6)])
    def test_rosalin_with_deterministic_strategy(self, strategy, step):
        result = run_optimization_benchmark(build_config({
            "mode": "optimize", "hamiltonian_text": "1.0 ZZ\n0.5 XI\n-0.3 IY", "depth": 0,
            "strategies": [strategy], "total_budget": 5000, "n_trials": 2, "base_seed": 5,
        }))
        for trial in range(2):
            shots = [r.shots for r in result.rows if r.trial == trial]
            assert np.all(np.diff(shots) > 0)
            assert np.all(np.diff(shots) % step == 0)
            assert shots[-1] >= 5000
        assert all(r.delta_e >= -1e-9 for r in result.rows)

    def test_invalid_learning_rate(self, values):
        with pytest.raises(ConfigError):
            run_optimization_benchmark(build_config({**values, "learning_rate": 2.5}))
