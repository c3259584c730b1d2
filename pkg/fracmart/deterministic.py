"""Product quadrature for singular kernels, the fractional Toeplitz ratio and closed-form oracles."""

import math
from typing import Callable, Dict, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.integrate import quad
from scipy.stats import norm

from .bounds import C_beta_betaprime
from .data_models import ConstraintViolation, SamplePath, TimeGrid, TrendReport, make_alpha, make_grid, require
from .paths import PHI_FUNCTIONS

Sampled = Union[np.ndarray, Sequence[float], Callable[[np.ndarray], np.ndarray]]

# weight functions x with x(s) -> 1, used with gamma = 1
TOEPLITZ_TEST_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "ratio": lambda s: s / (1.0 + s),
    "decay": lambda s: 1.0 + np.exp(-s),
}


class WeightedQuadrature(BaseModel):
    """Exact integrals of (t - s)^p over each cell of the grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: TimeGrid
    p: float
    weights: np.ndarray

    @classmethod
    def build(cls, p: float, grid: TimeGrid) -> "WeightedQuadrature":
        require(p > -1, "p > -1", f"got p={p}")
        n = grid.cells
        p1 = p + 1.0
        # distance from t to s_i is (n - i) * step, exactly 0 at the last point
        remaining = np.arange(n, -1, -1, dtype=np.float64)
        weights = grid.step**p1 * (remaining[:-1] ** p1 - remaining[1:] ** p1) / p1
        return cls(grid=grid, p=p, weights=weights)

    def integrate(self, left_values: np.ndarray) -> float:
        return math.fsum(self.weights * left_values)


def sample_on_grid(f: Sampled, grid: TimeGrid) -> np.ndarray:
    """Values of f at the n + 1 grid points, or its n left-endpoint values padded by NaN."""
    if callable(f):
        return np.asarray(f(grid.points), dtype=np.float64) * np.ones(grid.cells + 1)
    values = np.asarray(f, dtype=np.float64)
    if values.shape == (grid.cells,):
        return np.append(values, np.nan)
    require(values.shape == (grid.cells + 1,), "f sampled on the grid", f"got shape {values.shape}")
    return values


def singular_integral(p: float, f: Sampled, grid: TimeGrid) -> float:
    """
    Function Description:
        Product-integration rule for int_0^t (t - s)^p f(s) ds: the kernel is
        integrated exactly per cell, f is taken at the left endpoint.
    Args:
        p : float : Kernel exponent, p > -1
        f : array or callable : f on the grid (n + 1 values) or at left endpoints (n values)
        grid : TimeGrid : Uniform grid on [0, t]
    Keyword Args:
        None
    Returns:
        float : the quadrature value
    """
    rule = WeightedQuadrature.build(p, grid)
    return rule.integrate(sample_on_grid(f, grid)[:-1])


def cumulative_integral(gamma: Sampled, grid: TimeGrid) -> np.ndarray:
    """G(s_k) = int_0^{s_k} gamma by left Riemann sums, G(0) = 0."""
    g = sample_on_grid(gamma, grid)[:-1]
    return np.concatenate(([0.0], np.cumsum(g) * grid.step))


def toeplitz_ratio(alpha: float, x: Sampled, gamma: Sampled, grid: TimeGrid) -> float:
    """
    Function Description:
        Fractional Toeplitz ratio
        int (t-s)^(alpha-1) G(s) x(s) ds / int (t-s)^(alpha-1) G(s) ds, G = int_0^s gamma.
    Args:
        alpha : float : alpha > 0
        x : array or callable : the averaged function
        gamma : array or callable : nonnegative weight density
        grid : TimeGrid : grid on [0, t]
    Keyword Args:
        None
    Returns:
        float : the ratio
    """
    require(alpha > 0, "alpha > 0", f"got alpha={alpha}")
    gamma_values = sample_on_grid(gamma, grid)
    require(bool(np.all(gamma_values[:-1] >= 0)), "gamma >= 0")
    G = cumulative_integral(gamma_values, grid)
    x_values = sample_on_grid(x, grid)
    denominator = singular_integral(alpha - 1.0, G, grid)
    if denominator <= 0:
        raise ConstraintViolation("denominator > 0", "gamma vanishes on [0, t]")
    return singular_integral(alpha - 1.0, G * x_values, grid) / denominator


class PhiIntegral(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    error: float
    method: str


def gaussian_phi_integral(phi: Union[str, Callable[[float], float]], beta: float) -> PhiIntegral:
    """
    Function Description:
        int_R |Phi(z)|^beta dz. The gauss tag has the closed form (pi/beta)^(1/2);
        other functions go through adaptive quadrature with its error estimate.
    Args:
        phi : str or callable : tag or the function itself
        beta : float : exponent, beta > 0
    Keyword Args:
        None
    Returns:
        PhiIntegral : value, error estimate, method used
    """
    require(beta > 0, "beta > 0", f"got beta={beta}")
    if phi == "gauss":
        return PhiIntegral(value=math.sqrt(math.pi / beta), error=0.0, method="closed-form")
    if isinstance(phi, str):
        require(phi in PHI_FUNCTIONS, "known Phi tag", f"got {phi!r}")
        func = PHI_FUNCTIONS[phi]
        # |Phi|^beta must vanish at infinity to be integrable
        require(abs(float(func(np.float64(1e6)))) == 0.0, "int |Phi|^beta < inf", f"{phi} does not decay")
    else:
        func = phi
    value, error = quad(lambda z: abs(float(func(np.float64(z)))) ** beta, -np.inf, np.inf)
    return PhiIntegral(value=value, error=error, method="quadrature")


def expected_local_time_bm(hurst: float) -> float:
    """E[L^H(1, 0)] = int_0^1 (2 pi s^(2H))^(-1/2) ds = (2 pi)^(-1/2) / (1 - H)."""
    require(0 < hurst < 1, "0 < H < 1", f"got H={hurst}")
    return 1.0 / (math.sqrt(2.0 * math.pi) * (1.0 - hurst))


def expected_local_time(hurst: float, horizon: float = 1.0, level: float = 0.0) -> float:
    """E[L^H(t, y)] = int_0^t p_s(y) ds with p_s the N(0, s^2H) density."""
    require(0 < hurst < 1, "0 < H < 1", f"got H={hurst}")
    require(horizon > 0, "t > 0", f"got t={horizon}")
    if level == 0.0:
        return horizon ** (1.0 - hurst) * expected_local_time_bm(hurst)
    value, _ = quad(lambda s: norm.pdf(level, scale=s**hurst), 0.0, horizon, limit=200)
    return value


def window_local_time_mean(hurst: float, grid: TimeGrid, delta: float, level: float = 0.0) -> float:
    """
    Function Description:
        Exact mean of the grid window estimator
        step * #{k < n : |B^H_{t_k} - y| <= delta} / (2 delta). It falls short of
        E[L^H(t, y)] by the window average and the left-point sum, noticeably so
        for H > 1/2 where the density at the level is sharply peaked near s = 0.
    Args:
        hurst : float : Hurst parameter
        grid : TimeGrid : Grid the path lives on
        delta : float : Window half-width
    Keyword Args:
        level : float : Level y
    Returns:
        float : mean of the uncorrected estimator
    """
    require(delta > 0, "delta > 0", f"got delta={delta}")
    y = abs(level)
    scale = grid.points[1:-1] ** hurst
    # upper tails keep the difference accurate far from the level
    inside = norm.sf((y - delta) / scale) - norm.sf((y + delta) / scale)
    at_origin = 1.0 if y <= delta else 0.0
    return grid.step * (at_origin + float(np.sum(inside))) / (2.0 * delta)


def local_time_correction(hurst: float, grid: TimeGrid, delta: float, level: float = 0.0) -> float:
    """Factor that makes the window estimator unbiased for E[L^H(t, y)]."""
    window = window_local_time_mean(hurst, grid, delta, level)
    require(window > 0, "window reaches the level", f"delta={delta} y={level}")
    return expected_local_time(hurst, grid.horizon, level) / window


def expected_gauss_occupation(hurst: float, beta: float, t: float) -> float:
    """E[t^-(1-H) int_0^t exp(-beta (B^H_s)^2) ds] = t^-(1-H) int_0^t (1 + 2 beta s^2H)^(-1/2) ds."""
    require(0 < hurst < 1, "0 < H < 1", f"got H={hurst}")
    require(beta > 0 and t > 0, "beta > 0 and t > 0", f"got beta={beta} t={t}")
    value, _ = quad(lambda s: (1.0 + 2.0 * beta * s ** (2.0 * hurst)) ** -0.5, 0.0, t, limit=200)
    return value / t ** (1.0 - hurst)


class HolderCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def remark_holder_check(alpha: float, beta_prime: float, xi: SamplePath) -> HolderCheck:
    """
    Function Description:
        Hölder step of the fixed-time bound for alpha < 0:
        int (t-s)^(2 alpha) xi^2 ds <= C_{beta,beta'} t^(2(beta'-beta)/(beta beta')) (int |xi|^beta')^(2/beta').
        Both sides use the piecewise-constant xi, so the check is exact.
    Args:
        alpha : float : alpha < 0
        beta_prime : float : beta' > beta
        xi : SamplePath : integrand on the grid
    Keyword Args:
        None
    Returns:
        HolderCheck : both sides
    """
    beta = make_alpha(alpha).beta
    require(alpha < 0, "alpha < 0", f"got alpha={alpha}")
    constant = C_beta_betaprime(beta, beta_prime)
    grid = xi.grid
    lhs = singular_integral(2.0 * alpha, xi.values**2, grid)
    moment = grid.step * math.fsum(np.abs(xi.values[:-1]) ** beta_prime)
    rhs = constant * grid.horizon ** (2.0 * (beta_prime - beta) / (beta * beta_prime)) * moment ** (2.0 / beta_prime)
    return HolderCheck(lhs=lhs, rhs=rhs)


def fubini_identity_gap(alpha: float, gamma: Sampled, grid: TimeGrid) -> float:
    """Relative gap in int (t-s)^alpha gamma ds = alpha int (t-s)^(alpha-1) G(s) ds."""
    require(alpha > 0, "alpha > 0", f"got alpha={alpha}")
    lhs = singular_integral(alpha, gamma, grid)
    rhs = alpha * singular_integral(alpha - 1.0, cumulative_integral(gamma, grid), grid)
    return abs(lhs - rhs) / abs(lhs)


def toeplitz_ladder(
    alpha: float,
    x: Callable[[np.ndarray], np.ndarray],
    gamma: Callable[[np.ndarray], np.ndarray],
    t_values: Sequence[float],
    cells_per_unit: float = 100.0,
) -> list:
    """Toeplitz ratio at each t, grids holding a fixed number of cells per unit time."""
    ratios = []
    for t in t_values:
        grid = make_grid(t, max(1, int(round(cells_per_unit * t))))
        ratios.append(toeplitz_ratio(alpha, x, gamma, grid))
    return ratios


def toeplitz_trend(
    alpha: float,
    t_values: Sequence[float],
    functions: Sequence[str] = ("ratio", "decay"),
    cells_per_unit: float = 100.0,
) -> TrendReport:
    """|ratio - 1| along the t ladder for each test function, gamma = 1."""
    statistics = {}
    for name in functions:
        require(name in TOEPLITZ_TEST_FUNCTIONS, "known test function", f"got {name!r}")
        ratios = toeplitz_ladder(alpha, TOEPLITZ_TEST_FUNCTIONS[name], lambda s: np.ones_like(s), t_values, cells_per_unit)
        statistics[name] = [abs(r - 1.0) for r in ratios]
    return TrendReport(
        kind="toeplitz",
        t_values=list(t_values),
        statistics=statistics,
        rule="nonincreasing",
        notes={"alpha": alpha, "cells_per_unit": cells_per_unit},
    )
