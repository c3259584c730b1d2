"""Time grids, counter-based random streams, and Brownian / fractional Brownian / integrand paths."""

from functools import lru_cache
from typing import Callable, Dict, Literal, Sequence

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import ndtri

from .data_models import (
    CirculantEmbeddingError,
    IntegrandSpec,
    SamplePath,
    TimeGrid,
    require,
)
from .helpers import log_action

CIRCULANT_THRESHOLD = 2**12
EIGENVALUE_TOLERANCE = 1e-10

# sub-stream ids, one per independent noise source of a replicate
SUBSTREAM_W = 0
SUBSTREAM_XI = 1
SUBSTREAM_OCCUPATION = 2
SUBSTREAM_LOCAL_TIME = 3

PHI_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "gauss": lambda z: np.exp(-(z**2)),
    "shifted-gauss": lambda z: 1.0 + np.exp(-(z**2)),
}


class RandomStream(BaseModel):
    """
    Philox stream keyed by (seed, index). The sub-stream id occupies the top
    word of the 256-bit counter, so sub-streams never overlap in practice.
    """

    model_config = ConfigDict(frozen=True)

    seed: int = Field(ge=0, lt=2**64)
    index: int = Field(ge=0, lt=2**64)
    substream_id: int = Field(default=0, ge=0, lt=2**64)

    def bit_generator(self) -> np.random.Philox:
        key = self.seed | (self.index << 64)
        counter = self.substream_id << 192
        return np.random.Philox(key=key, counter=counter)

    def substream(self, k: int) -> "RandomStream":
        return RandomStream(seed=self.seed, index=self.index, substream_id=k)

    def uniforms(self, size: int) -> np.ndarray:
        raw = self.bit_generator().random_raw(size)
        # top 53 bits, shifted half a unit so 0 and 1 are never produced
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def normals(self, size: int) -> np.ndarray:
        return ndtri(self.uniforms(size))


def streams_for(seed: int, indices: Sequence[int], substream: int = 0) -> list:
    return [RandomStream(seed=seed, index=int(i), substream_id=substream) for i in indices]


def bm_increments(grid: TimeGrid, stream: RandomStream) -> np.ndarray:
    """
    Function Description:
        Brownian increments over the cells of the grid.
    Args:
        grid : TimeGrid : Discretization of [0, t]
        stream : RandomStream : Replicate stream
    Keyword Args:
        None
    Returns:
        np.ndarray : n independent N(0, step) draws
    """
    require(grid.cells >= 1, "n >= 1")
    return stream.normals(grid.cells) * np.sqrt(grid.step)


def bm_increment_matrix(grid: TimeGrid, streams: Sequence[RandomStream]) -> np.ndarray:
    return np.vstack([bm_increments(grid, s) for s in streams])


def brownian_path(grid: TimeGrid, stream: RandomStream) -> SamplePath:
    values = np.concatenate(([0.0], np.cumsum(bm_increments(grid, stream))))
    return SamplePath(grid=grid, values=values, label="W")


def fbm_covariance(grid: TimeGrid, hurst: float) -> np.ndarray:
    """R(s, u) = (s^2H + u^2H - |s - u|^2H) / 2 on the grid points t_1..t_n."""
    require(0 < hurst < 1, "0 < H < 1", f"got H={hurst}")
    times = grid.points[1:]
    two_h = 2.0 * hurst
    s, u = np.meshgrid(times, times, indexing="ij")
    return 0.5 * (s**two_h + u**two_h - np.abs(s - u) ** two_h)


@lru_cache(maxsize=16)
def _cholesky_factor(horizon: float, cells: int, hurst: float) -> np.ndarray:
    grid = TimeGrid(horizon=horizon, cells=cells)
    log_action("cholesky", f"H={hurst} n={cells} t={horizon}")
    factor = scipy.linalg.cholesky(fbm_covariance(grid, hurst), lower=True)
    factor.setflags(write=False)
    return factor


def fgn_autocovariance(cells: int, hurst: float) -> np.ndarray:
    k = np.arange(cells + 1, dtype=np.float64)
    two_h = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k**two_h + np.abs(k - 1) ** two_h)


@lru_cache(maxsize=16)
def _circulant_scales(cells: int, hurst: float) -> np.ndarray:
    gamma = fgn_autocovariance(cells, hurst)
    row = np.concatenate((gamma, gamma[-2:0:-1]))
    eigenvalues = np.fft.fft(row).real
    floor = -EIGENVALUE_TOLERANCE * np.max(np.abs(eigenvalues))
    if eigenvalues.min() < floor:
        raise CirculantEmbeddingError(
            f"circulant embedding for H={hurst}, n={cells} has eigenvalue "
            f"{eigenvalues.min():.3e}; use method='exact' instead"
        )
    scales = np.sqrt(np.clip(eigenvalues, 0.0, None) / row.size)
    scales.setflags(write=False)
    return scales


def resolve_fbm_method(grid: TimeGrid, method: str) -> str:
    if method == "auto":
        return "circulant" if grid.cells >= CIRCULANT_THRESHOLD else "exact"
    require(method in ("exact", "circulant"), "method in {exact, circulant}", f"got {method!r}")
    return method


def fbm_matrix(
    grid: TimeGrid,
    hurst: float,
    streams: Sequence[RandomStream],
    method: Literal["exact", "circulant", "auto"] = "auto",
) -> np.ndarray:
    """
    Function Description:
        Fractional Brownian motion on the grid for a batch of streams, one row
        per stream. Column 0 holds B^H_0 = 0.
    Args:
        grid : TimeGrid : Discretization of [0, t]
        hurst : float : Hurst parameter in (0, 1)
        streams : Sequence[RandomStream] : One stream per path
    Keyword Args:
        method : str : exact (Cholesky), circulant (Davies-Harte) or auto
    Returns:
        np.ndarray : array of shape (len(streams), n + 1)
    """
    require(0 < hurst < 1, "0 < H < 1", f"got H={hurst}")
    method = resolve_fbm_method(grid, method)
    n = grid.cells
    out = np.zeros((len(streams), n + 1))
    if method == "exact":
        factor = _cholesky_factor(grid.horizon, n, hurst)
        noise = np.vstack([s.normals(n) for s in streams])
        out[:, 1:] = noise @ factor.T
        return out

    scales = _circulant_scales(n, hurst)
    m = scales.size
    for row, stream in enumerate(streams):
        z = stream.normals(2 * m)
        spectrum = scales * (z[:m] + 1j * z[m:])
        increments = np.fft.fft(spectrum).real[:n]
        out[row, 1:] = np.cumsum(increments) * grid.step**hurst
    return out


def fbm_path(
    grid: TimeGrid,
    hurst: float,
    stream: RandomStream,
    method: Literal["exact", "circulant", "auto"] = "auto",
) -> SamplePath:
    values = fbm_matrix(grid, hurst, [stream], method=method)[0]
    return SamplePath(grid=grid, values=values, label="B^H")


def integrand_matrix(
    spec: IntegrandSpec,
    grid: TimeGrid,
    streams: Sequence[RandomStream],
    method: Literal["exact", "circulant", "auto"] = "auto",
) -> np.ndarray:
    """Integrand values xi at the grid points, one row per stream."""
    n = grid.cells
    if spec.kind == "constant":
        return np.full((len(streams), n + 1), float(spec.constant))
    if spec.kind == "table":
        require(
            len(spec.table) == n + 1,
            "table length = n + 1",
            f"got {len(spec.table)} values for {n} cells",
        )
        return np.tile(np.asarray(spec.table, dtype=np.float64), (len(streams), 1))
    # the xi driver is an fBm independent of W: it reads its own sub-stream
    drivers = [s.substream(SUBSTREAM_XI) for s in streams]
    return PHI_FUNCTIONS[spec.phi](fbm_matrix(grid, spec.hurst, drivers, method=method))


def integrand_path(spec: IntegrandSpec, grid: TimeGrid, stream: RandomStream) -> SamplePath:
    values = integrand_matrix(spec, grid, [stream])[0]
    return SamplePath(grid=grid, values=values, label="xi")
