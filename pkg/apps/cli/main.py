"""
Command-line driver: `variance-sweep`, `optimize` and `inspect`.

    python -m apps.cli.main optimize --hamiltonian data/hamiltonians/h2_sto3g.txt --budget 100000 --out runs/h2.csv

Exit codes: 0 success, 1 I/O failure, 2 invalid config or input, 3 shot floor violated.
"""
from __future__ import annotations
from typing import Sequence
from core.config import settings
from core.errors import ShotFloorError, ShotFrugalError
from core.logging_setup import configure_logging
from core.schemas import AggregateRow, ExperimentConfig, TraceRow, VarianceRow
from services.experiments.csv_io import aggregate_path, write_csv, write_csv_file
from services.experiments.runner import (
    build_config,
    load_config_file,
    run_optimization_benchmark,
    run_variance_sweep,
)
from services.quantum.hamiltonian import group_qwc_greedy, load_hamiltonian, shot_floor
from services.quantum.simulator import exact_ground_energy
from services.sampling.strategies import Strategy
import argparse
import logging
import sys

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_FLOOR = 3

# argparse destination -> ExperimentConfig key
FLAG_KEYS = {
    "hamiltonian": "hamiltonian_path",
    "depth": "depth",
    "strategy": "strategies",
    "optimizer": "optimizer",
    "budget": "total_budget",
    "trials": "n_trials",
    "seed": "base_seed",
    "out": "output_path",
    "learning_rate": "learning_rate",
    "gradient_mode": "gradient_mode",
    "theta_source": "theta_source",
    "shot_grid": "shot_grid",
    "parallelism": "parallelism",
}


def _add_experiment_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=str, default=None, help="JSON file with ExperimentConfig keys")
    parser.add_argument("--hamiltonian", type=str, default=None)
    parser.add_argument("--depth", type=int, default=None)
    parser.add_argument("--strategy", choices=[s.value for s in Strategy], action="append", default=None)
    parser.add_argument("--budget", type=int, default=None)
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--group-qwc", action="store_true")
    parser.add_argument("--strict-hybrid", action="store_true")
    parser.add_argument("--parallelism", type=int, default=None)
    parser.add_argument("--out", type=str, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shotfrugal", description="Shot-frugal expectation estimation and optimization")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    sweep = commands.add_parser("variance-sweep", help="Analytic vs empirical estimator variance over a shot grid")
    _add_experiment_flags(sweep)
    sweep.add_argument("--shot-grid", type=int, nargs="+", default=None)
    sweep.add_argument("--theta-source", choices=["random", "optimized"], default=None)
    sweep.add_argument("--uniform-single", action="store_true")

    optimize = commands.add_parser("optimize", help="Seeded multi-trial optimization benchmark")
    _add_experiment_flags(optimize)
    optimize.add_argument("--optimizer", choices=["rosalin", "adam"], default=None)
    optimize.add_argument("--learning-rate", type=float, default=None)
    optimize.add_argument("--gradient-mode", choices=["sampled", "exact"], default=None)
    optimize.add_argument("--simultaneous", action="store_true", help="Update all components from the iteration-start point")

    inspect = commands.add_parser("inspect", help="Summarize a Hamiltonian file")
    inspect.add_argument("--hamiltonian", type=str, required=True)
    inspect.add_argument("--group-qwc", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """File values first, then every flag given on the command line."""
    values = load_config_file(args.config) if args.config else {}
    values["mode"] = "variance_sweep" if args.command == "variance-sweep" else "optimize"
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            values[key] = value
    if args.group_qwc:
        values["grouping"] = "qwc_greedy"
    if args.strict_hybrid:
        values["strict_hybrid"] = True
    if getattr(args, "uniform_single", False):
        values["uniform_single"] = True
    if getattr(args, "simultaneous", False):
        values["sequential_updates"] = False
    return build_config(values)


def _run_sweep(config: ExperimentConfig):
    rows = run_variance_sweep(config)
    if config.output_path:
        write_csv_file(config.output_path, VarianceRow, rows)
    else:
        write_csv(sys.stdout, VarianceRow, rows)


def _run_optimize(config: ExperimentConfig):
    result = run_optimization_benchmark(config)
    if config.output_path:
        write_csv_file(config.output_path, TraceRow, result.rows)
        write_csv_file(aggregate_path(config.output_path), AggregateRow, result.aggregate)
    else:
        write_csv(sys.stdout, TraceRow, result.rows)


def _run_inspect(args: argparse.Namespace):
    hamiltonian = load_hamiltonian(args.hamiltonian)
    print(f"qubits:       {hamiltonian.n_qubits}")
    print(f"terms (N):    {hamiltonian.n_terms}")
    print(f"one-norm (M): {hamiltonian.one_norm!r}")
    print(f"shot floor:   {shot_floor(hamiltonian)}")
    print(f"constant:     {hamiltonian.constant!r}")
    if args.group_qwc:
        grouped = group_qwc_greedy(hamiltonian)
        print(f"QWC groups:   {grouped.n_terms} (M={grouped.one_norm!r}, floor {shot_floor(grouped)})")
    if hamiltonian.n_qubits <= settings.max_dense_qubits:
        print(f"ground energy: {exact_ground_energy(hamiltonian)!r}")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(level=args.log_level)

    try:
        if args.command == "inspect":
            _run_inspect(args)
            return EXIT_OK
        config = config_from_args(args)
        if config.mode == "variance_sweep":
            _run_sweep(config)
        else:
            _run_optimize(config)
    except ShotFloorError as e:
        logger.error(f"Shot floor violated: {e}")
        return EXIT_FLOOR
    except ShotFrugalError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
