"""Tests for the command-line driver."""
import orjson
import pytest

from apps.cli.main import EXIT_CONFIG, EXIT_FLOOR, EXIT_IO, EXIT_OK, main


@pytest.fixture
def z_file(tmp_path):
    path = tmp_path / "z.txt"
    path.write_text("1.0 Z\n")
    return path


@pytest.fixture
def three_term_file(tmp_path):
    path = tmp_path / "three.txt"
    path.write_text("1.0 Z\n0.5 X\n0.25 Y\n")
    return path


def _optimize_args(hamiltonian, out, *extra):
    return [
        "optimize", "--hamiltonian", str(hamiltonian), "--depth", "0", "--budget", "500",
        "--trials", "2", "--learning-rate", "0.1", "--out", str(out), *extra,
    ]


class TestOptimize:
    def test_writes_trace_and_aggregate(self, z_file, tmp_path):
        out = tmp_path / "runs" / "z.csv"
        assert main(_optimize_args(z_file, out)) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "trial,iteration,shots,energy,delta_e"
        assert lines[1].startswith("0,0,0,")
        aggregate = (tmp_path / "runs" / "z_aggregate.csv").read_text().splitlines()
        assert aggregate[0] == "shots,mean_delta_e,stderr_delta_e"
        assert len(aggregate) == 1 + 201

    def test_reruns_are_byte_identical(self, z_file, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(_optimize_args(z_file, first, "--seed", "4")) == EXIT_OK
        assert main(_optimize_args(z_file, second, "--seed", "4", "--parallelism", "1")) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_deterministic_strategy_runs_from_its_floor(self, three_term_file, tmp_path):
        out = tmp_path / "uds.csv"
        assert main(_optimize_args(three_term_file, out, "--strategy", "uds")) == EXIT_OK
        shots = [int(line.split(",")[2]) for line in out.read_text().splitlines()[1:]]
        assert all(value % 6 == 0 for value in shots)

    def test_invalid_learning_rate(self, z_file, tmp_path):
        args = _optimize_args(z_file, tmp_path / "x.csv")
        args[args.index("0.1")] = "3.0"
        assert main(args) == EXIT_CONFIG

    def test_two_strategies_rejected(self, z_file, tmp_path):
        args = _optimize_args(z_file, tmp_path / "x.csv", "--strategy", "wrs", "--strategy", "whs")
        assert main(args) == EXIT_CONFIG

    def test_missing_hamiltonian_file(self, tmp_path):
        assert main(_optimize_args(tmp_path / "missing.txt", tmp_path / "x.csv")) == EXIT_IO

    def test_malformed_hamiltonian(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1.0 Q\n")
        assert main(_optimize_args(path, tmp_path / "x.csv")) == EXIT_CONFIG

    def test_unknown_flag_value(self, z_file):
        with pytest.raises(SystemExit) as info:
            main(["optimize", "--hamiltonian", str(z_file), "--strategy", "nope"])
        assert info.value.code == 2

    def test_stdout_without_out(self, z_file, capsys):
        assert main(["optimize", "--hamiltonian", str(z_file), "--depth", "0", "--budget", "0", "--trials", "2"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "trial,iteration,shots,energy,delta_e"
        assert len(lines) == 3


class TestConfigFile:
    def test_flags_override_file(self, z_file, tmp_path, capsys):
        config = tmp_path / "sweep.json"
        config.write_bytes(orjson.dumps({
            "hamiltonian_path": str(z_file), "depth": 0, "shot_grid": [1, 10],
            "strategies": ["wrs"], "n_trials": 5,
        }))
        assert main(["variance-sweep", "--config", str(config), "--trials", "7"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "strategy,s_tot,analytic_variance,empirical_variance,n_trials"
        assert len(lines) == 3
        assert all(line.startswith("wrs,") and line.endswith(",7") for line in lines[1:])

    def test_broken_config_file(self, tmp_path):
        config = tmp_path / "broken.json"
        config.write_text("{")
        assert main(["variance-sweep", "--config", str(config)]) == EXIT_CONFIG


class TestVarianceSweep:
    def test_writes_csv(self, z_file, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main([
            "variance-sweep", "--hamiltonian", str(z_file), "--depth", "0",
            "--shot-grid", "10", "100", "--trials", "20", "--out", str(out),
        ])
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 5 * 2

    def test_shot_floor_exit_code(self, tmp_path):
        path = tmp_path / "skewed.txt"
        path.write_text("1.0 Z\n0.01 X\n")
        code = main([
            "variance-sweep", "--hamiltonian", str(path), "--depth", "0", "--strategy", "wds",
            "--shot-grid", "10", "--trials", "5", "--out", str(tmp_path / "sweep.csv"),
        ])
        assert code == EXIT_FLOOR


class TestInspect:
    def test_summary(self, data_dir, capsys):
        assert main(["inspect", "--hamiltonian", str(data_dir / "h2_sto3g.txt"), "--group-qwc"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "qubits:       2" in out
        assert "terms (N):    4" in out
        assert "QWC groups:   2" in out
        assert "ground energy:" in out

    def test_missing_file(self, tmp_path):
        assert main(["inspect", "--hamiltonian", str(tmp_path / "none.txt")]) == EXIT_IO
