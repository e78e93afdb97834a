from __future__ import annotations
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from typing import Optional, Literal
from core.config import settings
from core.errors import ConfigError
from services.sampling.strategies import Strategy


GradientMode = Literal["sampled", "exact"]


class RosalinConfig(BaseModel):
    # None means "derive from the Hamiltonian": L = M, alpha = 1/L
    learning_rate: Optional[float] = None
    lipschitz: Optional[float] = None
    s_min: int = Field(default_factory=lambda: settings.rosalin_min_shots)
    total_budget: int = Field(default=100_000, ge=0)
    mu: float = Field(default_factory=lambda: settings.rosalin_mu)
    bias: float = Field(default_factory=lambda: settings.rosalin_bias)
    shot_cap: int = Field(default_factory=lambda: settings.rosalin_shot_cap)
    strategy: Strategy = Strategy.WRS
    gradient_mode: GradientMode = "sampled"
    sequential_updates: bool = True
    strict_hybrid: bool = False

    @field_validator("s_min")
    @classmethod
    def _s_min_allows_variance(cls, v: int) -> int:
        if v < 2:
            raise ValueError("s_min must be at least 2 for the gradient variance to be defined")
        return v

    @field_validator("mu")
    @classmethod
    def _mu_in_unit_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("mu must lie strictly between 0 and 1")
        return v

    @field_validator("bias", "lipschitz", "learning_rate")
    @classmethod
    def _positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v <= 0:
            raise ValueError("must be positive")
        return v

    @model_validator(mode="after")
    def _step_below_stability_bound(self) -> RosalinConfig:
        if self.learning_rate is not None and self.lipschitz is not None:
            if self.learning_rate >= 2.0 / self.lipschitz:
                raise ValueError(f"learning_rate must be below 2/L = {2.0 / self.lipschitz:g}")
        if self.shot_cap < self.s_min:
            raise ValueError("shot_cap must be at least s_min")
        return self

    def resolved(self, one_norm: float) -> RosalinConfig:
        lipschitz = self.lipschitz if self.lipschitz is not None else one_norm
        learning_rate = self.learning_rate if self.learning_rate is not None else 1.0 / lipschitz
        try:
            return RosalinConfig.model_validate(
                {**self.model_dump(), "lipschitz": lipschitz, "learning_rate": learning_rate}
            )
        except ValidationError as e:
            raise ConfigError(f"Invalid Rosalin settings for M={one_norm:g}: {e}") from e

    def with_shot_floor(self, floor: int) -> RosalinConfig:
        """Lift s_min (and the cap with it) to a strategy's minimum shots per estimate."""
        if floor <= self.s_min:
            return self
        return self.model_copy(update={"s_min": floor, "shot_cap": max(self.shot_cap, floor)})


class AdamConfig(BaseModel):
    step_size: float = Field(default_factory=lambda: settings.adam_step_size, gt=0)
    beta1: float = Field(default_factory=lambda: settings.adam_beta1, ge=0, lt=1)
    beta2: float = Field(default_factory=lambda: settings.adam_beta2, ge=0, lt=1)
    eps: float = Field(default_factory=lambda: settings.adam_eps, gt=0)
    min_shots: int = Field(default_factory=lambda: settings.adam_min_shots, ge=1)
    total_budget: int = Field(default=100_000, ge=0)
    gradient_mode: GradientMode = "sampled"
    strict_hybrid: bool = False


class ExperimentConfig(BaseModel):
    hamiltonian_path: Optional[str] = None
    # inline Hamiltonian text, used by the HTTP surface
    hamiltonian_text: Optional[str] = None
    # None until an entry point picks a mode
    mode: Optional[Literal["variance_sweep", "optimize"]] = None
    depth: int = Field(default=1, ge=0)
    strategies: Optional[list[Strategy]] = None
    optimizer: Literal["rosalin", "adam"] = "rosalin"
    total_budget: int = Field(default=100_000, ge=0)
    n_trials: int = Field(default_factory=lambda: settings.default_trials, ge=1)
    base_seed: int = Field(default=0, ge=0)
    grouping: Literal["none", "qwc_greedy"] = "none"
    output_path: Optional[str] = None

    # variance sweep
    shot_grid: Optional[list[int]] = None
    theta_source: Literal["random", "optimized"] = "random"
    uniform_single: bool = False

    # optimizer overrides
    learning_rate: Optional[float] = Field(default=None, gt=0)
    gradient_mode: GradientMode = "sampled"
    strict_hybrid: bool = False
    sequential_updates: bool = True

    parallelism: int = Field(default_factory=lambda: settings.parallelism, ge=1)

    @model_validator(mode="after")
    def _check_consistency(self) -> ExperimentConfig:
        if not self.hamiltonian_path and not self.hamiltonian_text:
            raise ValueError("either hamiltonian_path or hamiltonian_text is required")
        if self.strategies is not None and not self.strategies:
            raise ValueError("at least one strategy is required")
        if self.mode == "optimize" and len(self.strategy_list) != 1:
            raise ValueError("optimize runs exactly one strategy")
        if self.mode == "variance_sweep" and self.total_budget < 1:
            raise ValueError("variance sweep needs a positive budget")
        if self.shot_grid is not None and any(s < 1 for s in self.shot_grid):
            raise ValueError("shot grid values must be positive")
        return self

    @property
    def strategy_list(self) -> list[Strategy]:
        if self.strategies is None:
            return list(Strategy) if self.mode == "variance_sweep" else [Strategy.WRS]
        return self.strategies

    @property
    def strategy(self) -> Strategy:
        return self.strategy_list[0]

    def resolved_shot_grid(self) -> list[int]:
        if self.shot_grid:
            return sorted(set(self.shot_grid))
        grid, value = [], 1
        while value <= self.total_budget:
            grid.append(value)
            value *= 10
        return grid


class VarianceRow(BaseModel):
    strategy: Strategy
    s_tot: int
    analytic_variance: float
    empirical_variance: float
    n_trials: int


class TraceRow(BaseModel):
    trial: int
    iteration: int
    shots: int
    energy: float
    delta_e: float


class AggregateRow(BaseModel):
    shots: float
    mean_delta_e: float
    stderr_delta_e: float


class HamiltonianText(BaseModel):
    text: str
    group_qwc: bool = False


class TermOut(BaseModel):
    coefficient: float
    operator: str


class HamiltonianSummary(BaseModel):
    n_qubits: int
    n_terms: int
    one_norm: float
    shot_floor: int
    constant: float
    ground_energy: Optional[float]
    terms: list[TermOut]


class VarianceRequest(HamiltonianText):
    depth: int = Field(default=1, ge=0)
    theta: Optional[list[float]] = None
    seed: int = Field(default=0, ge=0)
    s_tot: int = Field(default=1000, ge=1)


class StrategyVariance(BaseModel):
    strategy: Strategy
    analytic_variance: Optional[float]
    exact_variance: Optional[float]
    floor: int


class VarianceResponse(BaseModel):
    energy: float
    s_tot: int
    rows: list[StrategyVariance]


class OptimizeResponse(BaseModel):
    ground_energy: float
    trials: list[TraceRow]
    aggregate: list[AggregateRow]
