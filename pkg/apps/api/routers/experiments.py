from fastapi import APIRouter
from core.schemas import ExperimentConfig, OptimizeResponse, VarianceRow
from services.experiments.runner import build_config, run_optimization_benchmark, run_variance_sweep

router = APIRouter()


def _with_mode(payload: ExperimentConfig, mode: str) -> ExperimentConfig:
    # output_path is a CLI concern; results come back in the response
    return build_config({**payload.model_dump(), "mode": mode, "output_path": None})


@router.post("/variance-sweep", response_model=list[VarianceRow])
def variance_sweep(payload: ExperimentConfig):
    return run_variance_sweep(_with_mode(payload, "variance_sweep"))


@router.post("/optimize", response_model=OptimizeResponse)
def optimize(payload: ExperimentConfig):
    result = run_optimization_benchmark(_with_mode(payload, "optimize"))
    return OptimizeResponse(ground_energy=result.ground_energy, trials=result.rows, aggregate=result.aggregate)
