from __future__ import annotations
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Type
from pydantic import BaseModel
from core.schemas import AggregateRow
import csv
import logging
import numpy as np

logger = logging.getLogger(__name__)


def _cell(value) -> str:
    # repr keeps every float digit so reruns are byte-identical
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(handle: TextIO, model: Type[BaseModel], rows: Iterable[BaseModel]):
    fields = list(model.model_fields)
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_cell(getattr(row, name)) for name in fields])


def write_csv_file(path: str | Path, model: Type[BaseModel], rows: Sequence[BaseModel]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        write_csv(handle, model, rows)
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def aggregate_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_aggregate.csv")


def aggregate_traces(
    traces: Sequence[tuple[np.ndarray, np.ndarray]],
    budget: int,
    points: int,
) -> list[AggregateRow]:
    """Mean and standard error of delta E across trials on a common shot grid.

    Each trace is (shots, delta_e) starting at shots 0 and is read as a step
    function: the value at x is the last recorded delta E with shots <= x.
    """
    if not traces:
        return []
    grid = np.linspace(0.0, float(budget), points + 1) if budget > 0 else np.zeros(1)

    values = np.empty((len(traces), grid.shape[0]))
    for row, (shots, delta_e) in enumerate(traces):
        positions = np.searchsorted(np.asarray(shots, dtype=float), grid, side="right") - 1
        values[row] = np.asarray(delta_e, dtype=float)[np.maximum(positions, 0)]

    mean = values.mean(axis=0)
    n = values.shape[0]
    stderr = values.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
    return [
        AggregateRow(shots=float(x), mean_delta_e=float(m), stderr_delta_e=float(s))
        for x, m, s in zip(grid, mean, stderr)
    ]
