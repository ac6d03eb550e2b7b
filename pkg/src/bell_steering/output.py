"""
CSV and JSON output for reports, samples, sweeps and slices.

CSV files carry a header row, a fixed column order and 17 significant
digits, so values read back are bit-identical. JSON uses the same keys as
the CSV columns.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from .linalg import FTSolution
from .models import SAMPLE_COLUMNS, InequalityReport, SteeringReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


# ============================================================================
# Frames
# ============================================================================

def reports_to_frame(
    reports: Sequence[SteeringReport],
    params: Optional[Sequence[float]] = None,
    param_name: str = "param",
) -> pd.DataFrame:
    """One row per report in the sample schema, optionally led by the family parameter."""
    rows = [r.to_record(index=i).model_dump(by_alias=True) for i, r in enumerate(reports)]
    df = pd.DataFrame(rows, columns=SAMPLE_COLUMNS)
    df["class"] = [r.state_class.value for r in reports]
    if params is not None:
        df.insert(0, param_name, np.asarray(params, dtype=float))
    return df


# ============================================================================
# Export Functions
# ============================================================================

def write_csv(df: pd.DataFrame, output_path: Path) -> Path:
    """Write a frame with the fixed float format; missing values become empty cells.

    Args:
        df: Frame to write, columns in output order
        output_path: Output file path (.csv); parent directories are created

    Returns:
        The resolved output path
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(output_path, index=False, float_format=FLOAT_FORMAT, na_rep="")
    logger.info(f"Exported {len(df)} rows to {output_path}")
    return output_path


def read_csv(path: Path) -> pd.DataFrame:
    """Read back a file written by ``write_csv``."""
    return pd.read_csv(path, float_precision="round_trip", keep_default_na=True)


def report_to_json(report: SteeringReport, index: int = 0) -> str:
    return json.dumps(report.to_record(index=index).model_dump(mode="json", by_alias=True), indent=2)


def reports_to_json(reports: Sequence[SteeringReport]) -> str:
    """JSON array with one object per report, keys as in the CSV schema."""
    records: List[dict] = [
        r.to_record(index=i).model_dump(mode="json", by_alias=True) for i, r in enumerate(reports)
    ]
    return json.dumps(records, indent=2)


def inequality_report_to_json(result: InequalityReport) -> str:
    data = result.model_dump(mode="json")
    data["passed"] = result.passed
    data["strict_passed"] = result.strict_passed
    return json.dumps(data, indent=2)


def format_inequality_report(result: InequalityReport) -> str:
    """Plain-text summary table of an inequality run."""
    lines = [f"Inequality suite: n = {result.n}, seed = {result.seed}"]
    for c in result.checks:
        status = "ok" if c.passed else "FAIL"
        lines.append(f"  {c.name:<10} {c.bound:<32} samples={c.samples:<8} "
                     f"max_violation={c.max_violation: .3e}  {status}")
    for c in result.implications:
        status = "ok" if c.passed else "FAIL"
        lines.append(f"  {c.statement:<40} premises={c.premise_count:<8} "
                     f"violations={c.violations}  {status}")
    for c in result.saturation:
        status = "ok" if c.passed else "FAIL"
        lines.append(f"  {c.family:<6} saturates {c.name:<10} on [{c.parameter_range[0]}, "
                     f"{c.parameter_range[1]}] gap={c.max_gap:.3e}  {status}")
    for key, value in result.extremes.items():
        lines.append(f"  {key} = {value:.17g}")
    return "\n".join(lines)


def format_ft(solution: FTSolution) -> str:
    """FT vector and total distance on two lines, 17 significant digits."""
    vector = " ".join(f"{x:.17g}" for x in solution.ft)
    return f"{vector}\n{solution.total_distance:.17g}"
