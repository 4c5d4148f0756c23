# File: smoothbench/models/result_row.py

from typing import Literal, Optional, Union

from pydantic import BaseModel, model_validator

from smoothbench.models.posterior import Method

CSV_COLUMNS = [
    "method",
    "rank",
    "replicate",
    "restricted_forstner",
    "restricted_mahalanobis_sq",
    "rel_frobenius",
    "rel_mse",
    "output_error_sq",
    "hankel_tail",
    "inhom_trace_bound",
    "expected_output_error_bound",
    "kappa_estimate",
    "wallclock_ms",
]


class CellStatus(BaseModel):
    state: Literal["idle", "executing", "success", "failed"]
    code: str | None = None
    message: str | None = None
    execution_latency_ms: Optional[float] = None  # Time spent inside the cell


class ResultRow(BaseModel):
    method: Method
    rank: int
    # replicate index, or "mean" on aggregate rows
    replicate: Union[int, Literal["mean"]]
    restricted_forstner: Optional[float] = None
    restricted_mahalanobis_sq: Optional[float] = None
    rel_frobenius: Optional[float] = None
    rel_mse: Optional[float] = None
    output_error_sq: Optional[float] = None
    hankel_tail: Optional[float] = None
    inhom_trace_bound: Optional[float] = None
    expected_output_error_bound: Optional[float] = None
    kappa_estimate: Optional[float] = None
    wallclock_ms: Optional[float] = None
    status: CellStatus

    @model_validator(mode="after")
    def validate_nonnegative(self) -> "ResultRow":
        for col in CSV_COLUMNS[3:]:
            value = getattr(self, col)
            if value is not None and value < 0.0:
                raise ValueError(f"{col} must be non-negative, got {value}")
        return self

    def csv_record(self) -> dict[str, object]:
        return {col: getattr(self, col) for col in CSV_COLUMNS}
