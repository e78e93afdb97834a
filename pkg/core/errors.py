from __future__ import annotations


class ShotFrugalError(Exception):
    """Base class for every error raised by this package."""


class HamiltonianParseError(ShotFrugalError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShotFloorError(ShotFrugalError, ValueError):
    """Raised when a deterministic allocation would leave some term without shots."""

    def __init__(self, strategy: str, s_tot: int, floor: int):
        self.strategy = strategy
        self.s_tot = s_tot
        self.floor = floor
        super().__init__(f"{strategy} needs at least {floor} shots, got {s_tot}")


class DimensionError(ShotFrugalError, ValueError):
    pass


class ConfigError(ShotFrugalError, ValueError):
    pass


class RegularizationError(ShotFrugalError, ValueError):
    pass
