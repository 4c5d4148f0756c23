# File: smoothbench/runner/emit.py

import json
import sys
from pathlib import Path
from typing import List, Literal, Optional, Sequence

import pandas as pd
from pydantic import BaseModel

from smoothbench.models.result_row import CSV_COLUMNS, ResultRow
from smoothbench.utils.rich_output import log

OutputFormat = Literal["csv", "json"]

# 17 significant digits reload bit-for-bit
FLOAT_FORMAT = "%.17g"


def rows_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([row.csv_record() for row in rows], columns=CSV_COLUMNS)


def _render(rows: Sequence[ResultRow], fmt: OutputFormat) -> str:
    if fmt == "csv":
        return str(rows_frame(rows).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    # json floats are repr-exact already
    payload = [row.model_dump(mode="json") for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def emit(rows: Sequence[ResultRow], fmt: OutputFormat, path: Optional[Path]) -> None:
    """Write rows as CSV (fixed header order) or a JSON array; stdout when path is None."""
    text = _render(rows, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    log("EMIT", f"wrote {len(rows)} rows to {path}", always=True)


def metadata_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_metadata(meta: BaseModel, path: Optional[Path]) -> Optional[Path]:
    if path is None:
        return None
    target = metadata_path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(meta.model_dump_json(indent=2) + "\n", encoding="utf-8")
    log("EMIT", f"metadata sidecar at {target}")
    return target


def read_rows(path: Path, fmt: OutputFormat) -> pd.DataFrame:
    """Reload emitted rows; missing metrics come back as NaN in both formats."""
    if fmt == "csv":
        return pd.read_csv(path, float_precision="round_trip")
    records: List[dict[str, object]] = json.loads(path.read_text(encoding="utf-8"))
    return pd.DataFrame([{col: rec.get(col) for col in CSV_COLUMNS} for rec in records], columns=CSV_COLUMNS)
