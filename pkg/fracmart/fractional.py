"""Stochastic convolution M^(alpha), running supremum, beta-variation and the constant c_alpha."""

import logging
import math
from typing import Dict, Optional, Sequence

import numpy as np
import scipy.signal
from pydantic import BaseModel, ConfigDict

from .data_models import (
    Alpha,
    GridMismatchError,
    KernelWeights,
    SamplePath,
    TimeGrid,
    make_alpha,
    require,
)
from .helpers import compensated_mean_var, log_action
from .paths import bm_increment_matrix, streams_for

MIN_C_ALPHA_REPLICATES = 100


def lag_weights(alpha: Alpha, grid: TimeGrid) -> np.ndarray:
    """
    Function Description:
        Cell-integrated kernel weights indexed by lag k = j - i, so that
        w_{j,i} = v[j - i]. On a uniform grid
        v[k] = step^alpha * ((k + 1)^(alpha + 1) - k^(alpha + 1)) / (alpha + 1).
    Args:
        alpha : Alpha : Kernel exponent
        grid : TimeGrid : Uniform grid
    Keyword Args:
        None
    Returns:
        np.ndarray : n weights, v[0] belonging to the singular cell
    """
    a1 = alpha.value + 1.0
    k = np.arange(grid.cells, dtype=np.float64)
    return grid.step**alpha.value * ((k + 1.0) ** a1 - k**a1) / a1


def kernel_weights(alpha: Alpha, grid: TimeGrid, j: int) -> KernelWeights:
    """
    Function Description:
        Weights w_{j,i}, i = 1..j, each the cell average of (t_j - s)^alpha.
        The raw kernel is never evaluated at s = t_j.
    Args:
        alpha : Alpha : Kernel exponent
        grid : TimeGrid : Uniform grid
        j : int : Target index, 1 <= j <= n
    Keyword Args:
        None
    Returns:
        KernelWeights : weights ordered by i
    """
    require(1 <= j <= grid.cells, "1 <= j <= n", f"got j={j}, n={grid.cells}")
    weights = lag_weights(alpha, grid)[:j][::-1].copy()
    return KernelWeights(target_index=j, weights=weights)


def frac_convolve_matrix(alpha: Alpha, grid: TimeGrid, xi: np.ndarray, dW: np.ndarray) -> np.ndarray:
    """
    Function Description:
        M^(alpha)_{t_j} = sum_{i<=j} w_{j,i} xi_{t_{i-1}} dW_i for a batch of paths.
        One driving dW serves every evaluation time. Each row is an FFT
        convolution of the lag weights with xi dW, O(n log n) time and O(n) memory.
    Args:
        alpha : Alpha : Kernel exponent
        grid : TimeGrid : Shared grid
        xi : np.ndarray : shape (k, n + 1), integrand at grid points
        dW : np.ndarray : shape (k, n), Brownian increments
    Keyword Args:
        None
    Returns:
        np.ndarray : shape (k, n + 1), column 0 equal to 0
    """
    n = grid.cells
    xi = np.atleast_2d(xi)
    dW = np.atleast_2d(dW)
    if xi.shape[1] != n + 1 or dW.shape[1] != n or xi.shape[0] != dW.shape[0]:
        raise GridMismatchError(f"xi {xi.shape} and dW {dW.shape} do not share a grid of {n} cells")
    increments = xi[:, :-1] * dW
    out = np.zeros((xi.shape[0], n + 1))
    if alpha.value == 0.0:
        # unit weights reduce to a cumulative sum
        out[:, 1:] = np.cumsum(increments, axis=1)
        return out
    v = lag_weights(alpha, grid)
    out[:, 1:] = scipy.signal.fftconvolve(increments, v[np.newaxis, :], axes=1)[:, :n]
    return out


def frac_terminal(alpha: Alpha, grid: TimeGrid, xi: np.ndarray, dW: np.ndarray) -> np.ndarray:
    """Terminal values M^(alpha)_t only, O(n) per path."""
    xi = np.atleast_2d(xi)
    dW = np.atleast_2d(dW)
    if xi.shape[1] != grid.cells + 1 or dW.shape[1] != grid.cells:
        raise GridMismatchError(f"xi {xi.shape} and dW {dW.shape} do not share a grid of {grid.cells} cells")
    return (xi[:, :-1] * dW) @ lag_weights(alpha, grid)[::-1]


def frac_convolve(alpha: Alpha, xi: SamplePath, dW: np.ndarray) -> SamplePath:
    dW = np.asarray(dW, dtype=np.float64)
    if dW.shape != (xi.grid.cells,):
        raise GridMismatchError(f"{dW.shape[0]} increments for a grid of {xi.grid.cells} cells")
    values = frac_convolve_matrix(alpha, xi.grid, xi.values[None, :], dW[None, :])[0]
    return SamplePath(grid=xi.grid, values=values, label="M^(alpha)")


def running_sup(path: SamplePath) -> float:
    """Grid maximum of |path|; a lower bound for the continuous-time supremum."""
    require(path.values.size > 0, "nonempty path")
    return float(np.max(np.abs(path.values)))


def running_sup_rows(paths: np.ndarray) -> np.ndarray:
    return np.max(np.abs(np.atleast_2d(paths)), axis=1)


def beta_variation_rows(paths: np.ndarray, grid: TimeGrid, beta: float, m: int) -> np.ndarray:
    require(m >= 1 and grid.cells % m == 0, "m divides n", f"m={m}, n={grid.cells}")
    stride = grid.cells // m
    sub = np.atleast_2d(paths)[:, ::stride]
    return np.sum(np.abs(np.diff(sub, axis=1)) ** beta, axis=1)


def beta_variation(path: SamplePath, beta: float, m: int) -> float:
    """
    Function Description:
        S_{beta,m} = sum_i |X_{t_i} - X_{t_{i-1}}|^beta over the m-cell
        subdivision, read off the stored grid at every (n/m)-th point.
    Args:
        path : SamplePath : Path on an n-cell grid
        beta : float : Variation exponent
        m : int : Number of subdivision cells, must divide n
    Keyword Args:
        None
    Returns:
        float : S_{beta,m}
    """
    return float(beta_variation_rows(path.values, path.grid, beta, m)[0])


def quadratic_variation_integral(xi: SamplePath) -> float:
    """<M>_t = int_0^t xi_s^2 ds by left-point product quadrature."""
    return float(xi.grid.step * np.sum(xi.values[:-1] ** 2))


class CAlphaEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    value: float
    standard_error: float
    replicates: int
    m: int
    few_replicates: bool = False

    def interval(self, z: float = 1.96) -> tuple:
        return (self.value - z * self.standard_error, self.value + z * self.standard_error)


def estimate_c_alpha(
    alpha: Alpha,
    replicates: int,
    grid: TimeGrid,
    seed: int = 0,
    m_values: Optional[Sequence[int]] = None,
    batch: int = 256,
) -> Dict[int, CAlphaEstimate]:
    """
    Function Description:
        Monte Carlo estimate of c_alpha from S_{beta,m}/t with xi = 1, for which
        <M^(alpha)>_{beta,t} = c_alpha * t. All m share the same simulated paths.
    Args:
        alpha : Alpha : Kernel exponent
        replicates : int : Number of paths
        grid : TimeGrid : Simulation grid (finest m = n)
    Keyword Args:
        seed : int : Master seed
        m_values : Sequence[int] : Subdivisions to report, default [n]
        batch : int : Paths per matrix product
    Returns:
        Dict[int, CAlphaEstimate] : estimate per m
    """
    require(replicates >= 1, "replicates >= 1")
    m_values = list(m_values) if m_values else [grid.cells]
    few = replicates < MIN_C_ALPHA_REPLICATES
    if few:
        logging.warning(f"c_alpha estimate from only {replicates} replicates (< {MIN_C_ALPHA_REPLICATES})")
    log_action("estimate_c_alpha", f"alpha={alpha.value} n={grid.cells} N={replicates}")

    ratios = {m: [] for m in m_values}
    ones = np.ones(grid.cells + 1)
    for start in range(0, replicates, batch):
        idx = range(start, min(start + batch, replicates))
        dW = bm_increment_matrix(grid, streams_for(seed, idx))
        paths = frac_convolve_matrix(alpha, grid, np.tile(ones, (len(idx), 1)), dW)
        for m in m_values:
            ratios[m].append(beta_variation_rows(paths, grid, alpha.beta, m) / grid.horizon)

    estimates = {}
    for m in m_values:
        sample = np.concatenate(ratios[m])
        mean, var = compensated_mean_var(sample)
        estimates[m] = CAlphaEstimate(
            alpha=alpha.value,
            value=mean,
            standard_error=math.sqrt(var / sample.size),
            replicates=replicates,
            m=m,
            few_replicates=few,
        )
    return estimates


class HolderRelation(BaseModel):
    model_config = ConfigDict(frozen=True)

    lhs: float
    rhs: float
    quantity: str

    def holds(self, tolerance: float = 0.0) -> bool:
        return self.lhs <= self.rhs * (1.0 + tolerance)


def holder_relation_bounds(
    alpha: float, c_alpha: float, t: float, s_beta: float, quadratic_variation: float
) -> HolderRelation:
    """
    Function Description:
        Hölder relations between the beta-variation of M^(alpha) and <M>_t.
        alpha < 0: <M>_t <= c^(-2/beta) t^((beta-2)/beta) S^(2/beta).
        alpha >= 0: S <= c t^((2-beta)/2) <M>_t^(beta/2).
    Args:
        alpha : float : Kernel exponent
        c_alpha : float : Estimated c_alpha
        t : float : Horizon
        s_beta : float : beta-variation of the path
        quadratic_variation : float : int_0^t xi^2 ds
    Keyword Args:
        None
    Returns:
        HolderRelation : the inequality as (lhs, rhs)
    """
    a = make_alpha(alpha)
    beta = a.beta
    require(c_alpha > 0, "c_alpha > 0")
    if alpha < 0:
        rhs = c_alpha ** (-2.0 / beta) * t ** ((beta - 2.0) / beta) * s_beta ** (2.0 / beta)
        return HolderRelation(lhs=quadratic_variation, rhs=rhs, quantity="<M>_t")
    rhs = c_alpha * t ** ((2.0 - beta) / 2.0) * quadratic_variation ** (beta / 2.0)
    return HolderRelation(lhs=s_beta, rhs=rhs, quantity="<M^(alpha)>_beta,t")
