import json
import logging
import math
import os
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np

from .fm_sysenv import FRACMART_WORKERS

# config keys that may hold JSON lists
LIST_KEYS = ("alphas", "t_values", "L_values", "m_values", "table")


def log_action(action: str, detail: str = "") -> None:
    """
    Function Description:
        This function logs an action with optional detail.
    Args:
        action: The action to log.
        detail: Additional detail to log.
    Keyword Args:
        None
    Returns:
        None
    """
    logging.info(f"{action}: {detail}")


def compensated_mean_var(values: Iterable[float]) -> Tuple[float, float]:
    """
    Function Description:
        Mean and unbiased sample variance with compensated (fsum) summation,
        so the result does not depend on the order in which replicates arrived.
    Args:
        values : Iterable[float] : Per-replicate statistics
    Keyword Args:
        None
    Returns:
        (mean, variance) : Tuple[float, float]
    """
    data = np.asarray(list(values), dtype=np.float64)
    n = data.size
    if n == 0:
        raise ValueError("cannot reduce an empty sample")
    mean = math.fsum(data) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((data - mean) ** 2) / (n - 1)
    return mean, var


def standard_error(values: Iterable[float]) -> float:
    data = np.asarray(values, dtype=np.float64)
    _, var = compensated_mean_var(data)
    return math.sqrt(var / data.size)


def resolve_workers(flag_value: Optional[int] = None) -> int:
    """
    Function Description:
        Resolves the worker count: explicit flag first, then the
        FRACMART_WORKERS environment variable, then the startup default.
    Args:
        flag_value : Optional[int] : Value passed on the command line
    Keyword Args:
        None
    Returns:
        int : Number of worker processes (at least 1)
    """
    if flag_value is not None:
        workers = int(flag_value)
    else:
        raw = os.environ.get("FRACMART_WORKERS", "")
        workers = int(raw) if raw.strip() else FRACMART_WORKERS
    if workers < 1:
        raise ValueError(f"worker count must be at least 1, got {workers}")
    return workers


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Function Description:
        Loads a flat JSON config whose keys mirror the long flag names.
    Args:
        path : str : Path to the JSON file
    Keyword Args:
        None
    Returns:
        Dict[str, Any] : Parsed config, keys normalised to underscores
    """
    path = os.path.expanduser(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, "r") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must hold a flat JSON object")
    config = {key.replace("-", "_"): value for key, value in data.items()}
    for key, value in config.items():
        if isinstance(value, (dict, list)) and key not in LIST_KEYS:
            raise ValueError(f"Config key {key!r} must be a scalar")
    return config


def merge_config(defaults: Dict[str, Any], file_values: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    # flags > config file > defaults; a flag left at None does not override
    merged = dict(defaults)
    merged.update({k: v for k, v in file_values.items() if v is not None})
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def ensure_output_dir(path: str) -> str:
    path = os.path.abspath(os.path.expanduser(path))
    os.makedirs(path, exist_ok=True)
    return path
