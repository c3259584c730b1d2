import json
import os
import time
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel

from . import __version__
from .data_models import TrendReport
from .helpers import ensure_output_dir, log_action


def deep_to_dict(obj):
    """
    Recursively convert pydantic models, numpy values and containers to plain
    JSON types, otherwise drop them from the output.
    """
    if isinstance(obj, dict):
        return {str(key): deep_to_dict(val) for key, val in obj.items()}

    if isinstance(obj, (list, tuple)):
        return [deep_to_dict(item) for item in obj]

    if isinstance(obj, BaseModel):
        return deep_to_dict(obj.model_dump())

    if isinstance(obj, np.ndarray):
        return deep_to_dict(obj.tolist())

    if isinstance(obj, np.generic):
        return obj.item()

    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)

    if isinstance(obj, (int, float, str, bool, type(None))):
        return obj

    return None  # Drop objects that don't have a known conversion


class CustomJSONEncoder(json.JSONEncoder):
    def default(self, obj):
        try:
            return deep_to_dict(obj)
        except TypeError:
            return super().default(obj)


def run_timestamp() -> str:
    """UTC timestamp of the run; SOURCE_DATE_EPOCH pins it for reproducible summaries."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH", "").strip()
    seconds = int(epoch) if epoch else int(time.time())
    return datetime.fromtimestamp(seconds, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def run_metadata(seed: Optional[int]) -> Dict[str, Any]:
    return {"seed": seed, "version": __version__, "timestamp": run_timestamp()}


def trend_rows(report: TrendReport) -> List[Dict[str, Any]]:
    """One row per (series, t) with the series verdict repeated on each row."""
    rows = []
    for name, series in report.statistics.items():
        errors = report.standard_errors.get(name, [None] * len(series))
        ok = report.series_ok(name)
        for t, value, error in zip(report.t_values, series, errors):
            rows.append({"series": name, "t": t, "value": value, "standard_error": error, "series_ok": ok})
    return rows


TREND_COLUMNS = ["series", "t", "value", "standard_error", "series_ok"]


def write_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str], path: str) -> str:
    frame = pd.DataFrame(list(rows), columns=list(columns))
    # fixed float format keeps reruns byte-identical
    frame.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    return path


def write_report(
    kind: str,
    rows: Sequence[Dict[str, Any]],
    columns: Sequence[str],
    config: Dict[str, Any],
    output_dir: str,
    passed: bool,
    extra: Optional[Dict[str, Any]] = None,
) -> Tuple[str, str]:
    """
    Function Description:
        Writes <kind>.csv with a fixed column order and <kind>.json holding the
        same rows, the effective config and run metadata.
    Args:
        kind : str : Experiment kind, used as file stem
        rows : Sequence[dict] : Result rows
        columns : Sequence[str] : Column order
        config : dict : Effective configuration
        output_dir : str : Target directory, created if missing
        passed : bool : Overall verdict
    Keyword Args:
        extra : dict : Additional summary fields
    Returns:
        Tuple[str, str] : csv path, json path
    """
    output_dir = ensure_output_dir(output_dir)
    stem = kind.replace(" ", "_")
    csv_path = write_csv(rows, columns, os.path.join(output_dir, f"{stem}.csv"))
    summary = {
        "kind": kind,
        "verdict": "PASS" if passed else "FAIL",
        "config": config,
        "results": list(rows),
        "run": run_metadata(config.get("seed")),
    }
    if extra:
        summary.update(extra)
    json_path = os.path.join(output_dir, f"{stem}.json")
    with open(json_path, "w") as f:
        json.dump(deep_to_dict(summary), f, cls=CustomJSONEncoder, indent=2, sort_keys=True)
        f.write("\n")
    log_action("write_report", f"{csv_path}, {json_path}")
    return csv_path, json_path


def write_trend_report(report: TrendReport, config: Dict[str, Any], output_dir: str) -> Tuple[str, str]:
    extra = {"rule": report.rule, "final_pass": report.final_pass, "notes": report.notes}
    return write_report(report.kind, trend_rows(report), TREND_COLUMNS, config, output_dir, report.verdict, extra)


def write_paths(table: pd.DataFrame, output_dir: str, stem: str = "paths") -> str:
    output_dir = ensure_output_dir(output_dir)
    path = os.path.join(output_dir, f"{stem}.csv")
    table.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    log_action("write_paths", path)
    return path
