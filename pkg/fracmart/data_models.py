from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator


class ConstraintViolation(ValueError):
    """Raised when an input falls outside the domain of an operation."""

    def __init__(self, constraint: str, message: str = ""):
        self.constraint = constraint
        super().__init__(f"constraint violated: {constraint}" + (f" ({message})" if message else ""))


class GridMismatchError(ConstraintViolation):
    def __init__(self, message: str = ""):
        super().__init__("same grid", message)


class CirculantEmbeddingError(RuntimeError):
    pass


def require(condition: bool, constraint: str, message: str = "") -> None:
    if not condition:
        raise ConstraintViolation(constraint, message)


class TimeGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    horizon: float = Field(gt=0)
    cells: int = Field(ge=1)

    @property
    def step(self) -> float:
        return self.horizon / self.cells

    @property
    def points(self) -> np.ndarray:
        # i * step keeps every point reproducible from (horizon, cells)
        return np.arange(self.cells + 1, dtype=np.float64) * self.step


def make_grid(horizon: float, cells: int) -> TimeGrid:
    require(horizon > 0, "t > 0", f"got t={horizon}")
    require(int(cells) == cells and cells >= 1, "n >= 1", f"got n={cells}")
    return TimeGrid(horizon=float(horizon), cells=int(cells))


class Alpha(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float

    @model_validator(mode="after")
    def _in_range(self):
        if not -0.5 < self.value < 0.5:
            raise ValueError(f"alpha must lie in (-1/2, 1/2), got {self.value}")
        return self

    @property
    def beta(self) -> float:
        return 2.0 / (1.0 + 2.0 * self.value)


def make_alpha(value: float) -> Alpha:
    require(-0.5 < value < 0.5, "-1/2 < alpha < 1/2", f"got alpha={value}")
    return Alpha(value=float(value))


class SamplePath(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: TimeGrid
    values: np.ndarray
    label: str = ""

    @model_validator(mode="after")
    def _length(self):
        if self.values.shape != (self.grid.cells + 1,):
            raise ValueError(
                f"path needs {self.grid.cells + 1} values, got shape {self.values.shape}"
            )
        return self


class KernelWeights(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    target_index: int
    weights: np.ndarray


class IntegrandSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["constant", "phi-of-fbm", "table"] = "constant"
    constant: float = 1.0
    hurst: Optional[float] = None
    phi: Literal["gauss", "shifted-gauss"] = "gauss"
    table: Optional[Tuple[float, ...]] = None
    bound: Optional[float] = None

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind == "phi-of-fbm" and (self.hurst is None or not 0 < self.hurst < 1):
            raise ValueError("phi-of-fbm needs a Hurst parameter in (0, 1)")
        if self.kind == "table" and not self.table:
            raise ValueError("table integrand needs values")
        if self.bound is not None and self.bound <= 0:
            raise ValueError("declared bound c_inf must be positive")
        natural = self.natural_bound()
        if self.bound is not None and natural is not None and natural > self.bound:
            raise ValueError(f"integrand exceeds declared bound {self.bound} (reaches {natural})")
        return self

    def natural_bound(self) -> Optional[float]:
        if self.kind == "constant":
            return abs(self.constant)
        if self.kind == "phi-of-fbm":
            return 1.0 if self.phi == "gauss" else 2.0
        return max(abs(v) for v in self.table)

    @property
    def c_inf(self) -> float:
        return self.bound if self.bound is not None else self.natural_bound()


class BoundSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    case: Literal["i", "ii", "iii"]
    alpha: float
    beta_prime: Optional[float] = None
    eps: Optional[float] = None
    L: float = 1.0
    t: float = 1.0
    nu_t: float = 1.0
    c_inf: Optional[float] = None

    @property
    def beta(self) -> float:
        return 2.0 / (1.0 + 2.0 * self.alpha)


class BoundValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    case: str
    threshold: float
    probability_bound: float
    constants: Dict[str, float]
    conditioning: str = "none"

    @property
    def capped(self) -> float:
        return min(1.0, self.probability_bound)


class TailEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    exceedances: int
    replicates: int
    p_hat: float
    lo: float
    hi: float
    event_frequency: float
    unconditioned_frequency: float
    threshold: float
    bound: float

    @model_validator(mode="after")
    def _ordered(self):
        if not 0.0 <= self.lo <= self.p_hat <= self.hi <= 1.0:
            raise ValueError("interval must satisfy 0 <= lo <= p_hat <= hi <= 1")
        return self

    @computed_field
    @property
    def passed(self) -> bool:
        return self.lo <= self.bound


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    params: Dict[str, object] = Field(default_factory=dict)
    cells: int = Field(ge=1)
    replicates: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    output_dir: Optional[str] = None


class TrendReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    t_values: List[float]
    statistics: Dict[str, List[float]]
    standard_errors: Dict[str, List[float]] = Field(default_factory=dict)
    rule: Literal["halving", "strict", "nonincreasing"] = "halving"
    final_pass: Optional[bool] = None
    notes: Dict[str, object] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _increasing(self):
        if any(b <= a for a, b in zip(self.t_values, self.t_values[1:])):
            raise ValueError("t values must be strictly increasing")
        for name, series in self.statistics.items():
            if len(series) != len(self.t_values):
                raise ValueError(f"series {name} has {len(series)} entries for {len(self.t_values)} t values")
        return self

    def series_ok(self, name: str) -> bool:
        values = self.statistics[name]
        errors = self.standard_errors.get(name, [0.0] * len(values))
        if self.rule == "strict":
            return all(b < a for a, b in zip(values, values[1:]))
        if self.rule == "nonincreasing":
            return all(b <= a for a, b in zip(values, values[1:]))
        # halving: last <= first / 2 and no step up beyond two standard errors
        steps_ok = all(
            values[k + 1] - values[k] <= 2.0 * float(np.hypot(errors[k], errors[k + 1]))
            for k in range(len(values) - 1)
        )
        return values[-1] <= 0.5 * values[0] and steps_ok

    @computed_field
    @property
    def verdict(self) -> bool:
        trends = all(self.series_ok(name) for name in self.statistics)
        return trends and self.final_pass is not False
