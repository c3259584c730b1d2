"""Monte Carlo verification of the deviation bounds and limit theorems."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from scipy.stats import kstwobign, ks_2samp, norm

from .bounds import bound_classical, bound_fixed_time, bound_value, fixed_time_level
from .data_models import (
    BoundSpec,
    BoundValue,
    ExperimentConfig,
    IntegrandSpec,
    SamplePath,
    TailEstimate,
    TimeGrid,
    TrendReport,
    make_alpha,
    make_grid,
    require,
)
from .deterministic import (
    WeightedQuadrature,
    expected_gauss_occupation,
    expected_local_time_bm,
    gaussian_phi_integral,
    local_time_correction,
)
from .fm_sysenv import FRACMART_PILOT_SIZE
from .fractional import (
    beta_variation_rows,
    estimate_c_alpha,
    frac_convolve_matrix,
    frac_terminal,
    holder_relation_bounds,
    running_sup_rows,
)
from .helpers import compensated_mean_var, log_action
from .paths import (
    PHI_FUNCTIONS,
    SUBSTREAM_LOCAL_TIME,
    SUBSTREAM_OCCUPATION,
    SUBSTREAM_XI,
    bm_increment_matrix,
    fbm_matrix,
    integrand_matrix,
    streams_for,
)

CHUNK = 256
PILOT_OFFSET = 2**62
LOCAL_TIME_DELTA = 0.05
LOCAL_TIME_CELLS = 2**12
# relative slack on "statistic <= nu_t" so deterministic statistics equal to nu_t count as inside
EVENT_RTOL = 1e-12

# columns of path_statistics
SUP, TERMINAL, QV, MOMENT, S_BETA = range(5)


class PathJob(BaseModel):
    """Everything a worker needs to simulate one chunk of replicates."""

    model_config = ConfigDict(frozen=True)

    alpha: float
    grid: TimeGrid
    integrand: IntegrandSpec = IntegrandSpec()
    beta_prime: Optional[float] = None
    m: Optional[int] = None
    terminal_only: bool = False
    method: Literal["exact", "circulant", "auto"] = "auto"


def path_statistics(job: PathJob, indices: Sequence[int], seed: int) -> np.ndarray:
    """
    Function Description:
        Simulates xi, W and M^(alpha) for each replicate index and reduces
        every path to (sup |M|, M_t, int xi^2, int |xi|^beta', S_{beta,m}).
    Args:
        job : PathJob : Simulation parameters
        indices : Sequence[int] : Replicate indices (one stream each)
        seed : int : Master seed
    Keyword Args:
        None
    Returns:
        np.ndarray : shape (len(indices), 5); unused columns hold NaN
    """
    grid = job.grid
    alpha = make_alpha(job.alpha)
    streams = streams_for(seed, indices)
    dW = bm_increment_matrix(grid, streams)
    xi = integrand_matrix(job.integrand, grid, streams, method=job.method)
    left = xi[:, :-1]

    out = np.full((len(streams), 5), np.nan)
    out[:, QV] = grid.step * np.sum(left**2, axis=1)
    if job.beta_prime is not None:
        out[:, MOMENT] = grid.step * np.sum(np.abs(left) ** job.beta_prime, axis=1)
    if job.terminal_only:
        out[:, TERMINAL] = frac_terminal(alpha, grid, xi, dW)
        return out
    paths = frac_convolve_matrix(alpha, grid, xi, dW)
    out[:, SUP] = running_sup_rows(paths)
    out[:, TERMINAL] = paths[:, -1]
    out[:, S_BETA] = beta_variation_rows(paths, grid, alpha.beta, job.m or grid.cells)
    return out


def run_replicates(
    task: Callable[..., np.ndarray],
    seed: int,
    replicates: int,
    workers: int = 1,
    offset: int = 0,
) -> np.ndarray:
    """
    Function Description:
        Runs task over replicate indices offset..offset+replicates-1 in fixed
        chunks and stacks the rows in index order. The chunking never depends
        on the worker count, so results are identical for any workers >= 1.
    Args:
        task : callable : task(indices, seed=...) -> rows
        seed : int : Master seed
        replicates : int : Number of replicates
    Keyword Args:
        workers : int : Process count
        offset : int : First replicate index
    Returns:
        np.ndarray : rows in replicate order
    """
    require(replicates >= 1, "replicates >= 1", f"got {replicates}")
    chunks = [
        range(offset + start, offset + min(start + CHUNK, replicates))
        for start in range(0, replicates, CHUNK)
    ]
    fn = partial(task, seed=seed)
    if workers <= 1 or len(chunks) == 1:
        parts = [fn(chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    return np.concatenate(parts, axis=0)


def simulate_statistics(job: PathJob, seed: int, replicates: int, workers: int = 1, offset: int = 0) -> np.ndarray:
    log_action("simulate", f"alpha={job.alpha} t={job.grid.horizon} n={job.grid.cells} N={replicates}")
    return run_replicates(partial(path_statistics, job), seed, replicates, workers, offset)


def score_interval(k: int, N: int, level: float = 0.95) -> Tuple[float, float]:
    """
    Function Description:
        Wilson score interval for a binomial proportion.
    Args:
        k : int : Successes, 0 <= k <= N
        N : int : Trials, N >= 1
    Keyword Args:
        level : float : Two-sided confidence level
    Returns:
        Tuple[float, float] : (lo, hi) within [0, 1]
    """
    require(N >= 1 and 0 <= k <= N, "0 <= k <= N, N >= 1", f"k={k}, N={N}")
    require(0 < level < 1, "0 < level < 1", f"got {level}")
    z = float(norm.ppf(0.5 + level / 2.0))
    p = k / N
    denominator = 1.0 + z * z / N
    center = (p + z * z / (2.0 * N)) / denominator
    half = z / denominator * math.sqrt(p * (1.0 - p) / N + z * z / (4.0 * N * N))
    lo = 0.0 if k == 0 else max(0.0, min(p, center - half))
    hi = 1.0 if k == N else min(1.0, max(p, center + half))
    return lo, hi


def tail_estimate(
    deviation: np.ndarray,
    threshold: float,
    event: Optional[np.ndarray],
    bound: float,
    level: float = 0.95,
) -> TailEstimate:
    """Counts the joint event {deviation >= threshold} and {conditioning} over replicates."""
    exceed = deviation >= threshold
    event = np.ones_like(exceed) if event is None else event
    joint = exceed & event
    N = int(exceed.size)
    k = int(np.count_nonzero(joint))
    lo, hi = score_interval(k, N, level)
    return TailEstimate(
        exceedances=k,
        replicates=N,
        p_hat=k / N,
        lo=lo,
        hi=hi,
        event_frequency=float(np.count_nonzero(event)) / N,
        unconditioned_frequency=float(np.count_nonzero(exceed)) / N,
        threshold=threshold,
        bound=bound,
    )


class TailOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    case: str
    params: Dict[str, Optional[float]]
    bound: BoundValue
    estimate: TailEstimate
    pilot_size: int = 0

    @property
    def passed(self) -> bool:
        return self.estimate.passed

    def row(self) -> Dict[str, object]:
        est = self.estimate
        return {
            "case": self.case,
            "alpha": self.params.get("alpha"),
            "beta_prime": self.params.get("beta_prime"),
            "eps": self.params.get("eps"),
            "L": self.params.get("L"),
            "t": self.params.get("t"),
            "nu_t": self.params.get("nu_t"),
            "threshold": self.bound.threshold,
            "bound": self.bound.probability_bound,
            "k": est.exceedances,
            "N": est.replicates,
            "p_hat": est.p_hat,
            "lo": est.lo,
            "hi": est.hi,
            "event_freq": est.event_frequency,
            "pass": est.passed,
        }


TAIL_COLUMNS = [
    "case", "alpha", "beta_prime", "eps", "L", "t", "nu_t", "threshold", "bound",
    "k", "N", "p_hat", "lo", "hi", "event_freq", "pass",
]


def conditioning_statistic(kind: str, stats: np.ndarray, beta_prime: Optional[float]) -> Optional[np.ndarray]:
    """The quantity bounded by nu_t: (int |xi|^beta')^(2/beta') or int xi^2; None when unconditioned."""
    if kind in ("i", "remark"):
        return stats[:, MOMENT] ** (2.0 / beta_prime)
    if kind in ("ii", "intro"):
        return stats[:, QV]
    return None


def within_level(statistic: Optional[np.ndarray], nu_t: float) -> Optional[np.ndarray]:
    if statistic is None:
        return None
    return statistic <= nu_t * (1.0 + EVENT_RTOL)


def calibrate_nu(job: PathJob, kind: str, seed: int, pilot_size: int = FRACMART_PILOT_SIZE, workers: int = 1) -> float:
    """
    Function Description:
        nu_t as the median of the conditioning statistic over a pilot run drawn
        from replicate indices disjoint from the main run.
    Args:
        job : PathJob : Simulation parameters
        kind : str : Bound kind (i, ii, intro, remark)
        seed : int : Master seed
    Keyword Args:
        pilot_size : int : Pilot replicates
        workers : int : Process count
    Returns:
        float : nu_t
    """
    pilot_job = job.model_copy(update={"terminal_only": True})
    stats = simulate_statistics(pilot_job, seed, pilot_size, workers, offset=PILOT_OFFSET)
    statistic = conditioning_statistic(kind, stats, job.beta_prime)
    require(statistic is not None, "conditioned bound", f"{kind} has no conditioning event")
    return float(np.median(statistic))


def _bound_params(params: Dict[str, object], integrand: IntegrandSpec) -> Dict[str, Optional[float]]:
    case = params["case"]
    c_inf = params.get("c_inf")
    if case == "iii":
        if c_inf is None:
            c_inf = integrand.c_inf
        c_inf = float(c_inf)
        require(c_inf >= integrand.c_inf, "|xi| <= c_inf", f"integrand reaches {integrand.c_inf}, c_inf={c_inf}")
    return {
        "alpha": float(params["alpha"]),
        "beta_prime": params.get("beta_prime") if case == "i" else None,
        "eps": params.get("eps") if case in ("ii", "iii") else None,
        "L": float(params.get("L", 1.0)),
        "t": float(params.get("t", 1.0)),
        "nu_t": params.get("nu_t"),
        "c_inf": c_inf,
    }


def run_tail(config: ExperimentConfig, integrand: IntegrandSpec = IntegrandSpec(), workers: int = 1) -> TailOutcome:
    """
    Function Description:
        Simulates sup |M^(alpha)| and the conditioning statistic and compares the
        empirical joint-event frequency with the matching deviation bound.
    Args:
        config : ExperimentConfig : params hold case, alpha, beta_prime, eps, L, t, nu_t, c_inf
    Keyword Args:
        integrand : IntegrandSpec : xi
        workers : int : Process count
    Returns:
        TailOutcome : bound, estimate and the effective parameters
    """
    case = config.params["case"]
    if case == "classical":
        return run_classical(config, integrand, workers)
    params = _bound_params(config.params, integrand)
    # constraints are checked before any simulation
    bound_value(BoundSpec(case=case, **{**params, "nu_t": 1.0}))

    grid = make_grid(params["t"], config.cells)
    job = PathJob(alpha=params["alpha"], grid=grid, integrand=integrand, beta_prime=params["beta_prime"])
    pilot_size = 0
    if case != "iii" and params["nu_t"] is None:
        pilot_size = int(config.params.get("pilot_size") or FRACMART_PILOT_SIZE)
        params["nu_t"] = calibrate_nu(job, case, config.seed, pilot_size, workers)
    if params["nu_t"] is None:
        params["nu_t"] = 1.0

    bound = bound_value(BoundSpec(case=case, **params))
    stats = simulate_statistics(job, config.seed, config.replicates, workers)
    statistic = conditioning_statistic(case, stats, params["beta_prime"])
    event = within_level(statistic, params["nu_t"])
    estimate = tail_estimate(stats[:, SUP], bound.threshold, event, bound.probability_bound)
    return TailOutcome(case=case, params=params, bound=bound, estimate=estimate, pilot_size=pilot_size)


def verify_bound(config: ExperimentConfig, integrand: IntegrandSpec = IntegrandSpec(), workers: int = 1) -> TailEstimate:
    return run_tail(config, integrand, workers).estimate


def run_classical(config: ExperimentConfig, integrand: IntegrandSpec = IntegrandSpec(), workers: int = 1) -> TailOutcome:
    """P(sup_{s<=t} |M_s| >= a t) for M = int xi dW against 2 exp(-a^2 t / (2c))."""
    a = float(config.params.get("a", 2.0))
    t = float(config.params.get("t", 1.0))
    c = float(config.params.get("c") or integrand.c_inf**2)
    # <M>_s <= c s for every s as soon as xi^2 <= c
    require(integrand.c_inf**2 <= c, "<M>_t <= c t", f"|xi| reaches {integrand.c_inf}, c={c}")
    bound = BoundValue(
        case="classical",
        threshold=a * t,
        probability_bound=bound_classical(a, t, c),
        constants={"c": c},
        conditioning="<M>_t <= c t",
    )
    job = PathJob(alpha=0.0, grid=make_grid(t, config.cells), integrand=integrand)
    stats = simulate_statistics(job, config.seed, config.replicates, workers)
    estimate = tail_estimate(stats[:, SUP], bound.threshold, None, bound.probability_bound)
    params = {"alpha": 0.0, "beta_prime": None, "eps": None, "L": None, "t": t, "nu_t": c}
    return TailOutcome(case="classical", params=params, bound=bound, estimate=estimate)


def verify_classical(a: float, t: float, c: float, cells: int, replicates: int, seed: int, workers: int = 1) -> TailEstimate:
    config = ExperimentConfig(kind="tail", params={"case": "classical", "a": a, "t": t, "c": c}, cells=cells, replicates=replicates, seed=seed)
    return run_classical(config, IntegrandSpec(constant=1.0), workers).estimate


def run_fixed_time(
    config: ExperimentConfig,
    variant: Literal["intro", "remark"] = "intro",
    integrand: IntegrandSpec = IntegrandSpec(),
    workers: int = 1,
) -> TailOutcome:
    """
    Function Description:
        Fixed-time bound check on |M^(alpha)_t| at the terminal time. The level u
        is taken from params["u"], or calibrated so the bound equals params["target"].
    Args:
        config : ExperimentConfig : params hold alpha, t, nu_t, u or target, beta_prime
    Keyword Args:
        variant : str : intro or remark
        integrand : IntegrandSpec : xi
        workers : int : Process count
    Returns:
        TailOutcome : bound, estimate and effective parameters
    """
    p = config.params
    alpha = float(p["alpha"])
    t = float(p.get("t", 1.0))
    beta_prime = p.get("beta_prime") if variant == "remark" else None
    require(alpha < 0, "alpha < 0", f"fixed-time bounds need alpha < 0, got {alpha}")
    grid = make_grid(t, config.cells)
    job = PathJob(alpha=alpha, grid=grid, integrand=integrand, beta_prime=beta_prime, terminal_only=True)

    nu_t = p.get("nu_t")
    pilot_size = 0
    if nu_t is None:
        pilot_size = int(p.get("pilot_size") or FRACMART_PILOT_SIZE)
        nu_t = calibrate_nu(job, variant, config.seed, pilot_size, workers)
    u = p.get("u")
    if u is None:
        u = fixed_time_level(alpha, float(p.get("target", 0.1)), t, nu_t, variant, beta_prime)
    probability = bound_fixed_time(alpha, u, t, nu_t, variant, beta_prime)
    bound = BoundValue(
        case=f"fixed-{variant}",
        threshold=u,
        probability_bound=probability,
        constants={},
        conditioning="int xi^2 <= nu_t" if variant == "intro" else "(int |xi|^beta')^(2/beta') <= nu_t",
    )

    stats = simulate_statistics(job, config.seed, config.replicates, workers)
    event = within_level(conditioning_statistic(variant, stats, beta_prime), nu_t)
    estimate = tail_estimate(np.abs(stats[:, TERMINAL]), u, event, probability)
    params = {"alpha": alpha, "beta_prime": beta_prime, "eps": None, "L": None, "t": t, "nu_t": nu_t}
    return TailOutcome(case=bound.case, params=params, bound=bound, estimate=estimate, pilot_size=pilot_size)


def verify_fixed_time(
    config: ExperimentConfig,
    variant: Literal["intro", "remark"] = "intro",
    integrand: IntegrandSpec = IntegrandSpec(),
    workers: int = 1,
) -> TailEstimate:
    return run_fixed_time(config, variant, integrand, workers).estimate


def bound_matrix(
    cells: int,
    replicates: int,
    seed: int,
    workers: int = 1,
    alphas: Sequence[float] = (-0.25, 0.0, 0.25),
    t_values: Sequence[float] = (1.0, 4.0, 16.0),
    L_values: Sequence[float] = (1.0, 2.0, 4.0),
    beta_prime: float = 6.0,
    integrand: IntegrandSpec = IntegrandSpec(),
    pilot_size: int = FRACMART_PILOT_SIZE,
) -> List[TailOutcome]:
    """
    Function Description:
        Every valid (case, alpha, t, L) cell of the uniform deviation bounds.
        One simulation per (alpha, t) serves all cases and all L.
    Args:
        cells : int : Grid cells per horizon
        replicates : int : Paths per (alpha, t)
        seed : int : Master seed
    Keyword Args:
        workers, alphas, t_values, L_values, beta_prime, integrand, pilot_size
    Returns:
        List[TailOutcome] : one per cell
    """
    outcomes = []
    for alpha in alphas:
        cases = ["iii"] + (["i"] if alpha < 0 else []) + (["ii"] if alpha > 0 else [])
        for t in t_values:
            grid = make_grid(t, cells)
            job = PathJob(alpha=alpha, grid=grid, integrand=integrand, beta_prime=beta_prime if alpha < 0 else None)
            stats = simulate_statistics(job, seed, replicates, workers)
            for case in sorted(cases):
                nu_t = None if case == "iii" else calibrate_nu(job, case, seed, pilot_size, workers)
                statistic = conditioning_statistic(case, stats, job.beta_prime)
                event = within_level(statistic, nu_t)
                for L in L_values:
                    params = {
                        "alpha": alpha,
                        "beta_prime": beta_prime if case == "i" else None,
                        "eps": None if case == "i" else (alpha / 2.0 if case == "ii" else (0.5 + alpha) / 2.0),
                        "L": L,
                        "t": t,
                        "nu_t": 1.0 if nu_t is None else nu_t,
                        "c_inf": integrand.c_inf if case == "iii" else None,
                    }
                    bound = bound_value(BoundSpec(case=case, **params))
                    estimate = tail_estimate(stats[:, SUP], bound.threshold, event, bound.probability_bound)
                    outcomes.append(
                        TailOutcome(
                            case=case,
                            params={k: v for k, v in params.items() if k != "c_inf"},
                            bound=bound,
                            estimate=estimate,
                            pilot_size=0 if nu_t is None else pilot_size,
                        )
                    )
    return outcomes


def verify_wlln(
    alphas: Sequence[float],
    eta: float,
    t_values: Sequence[float],
    integrand: IntegrandSpec,
    cells: int,
    replicates: int,
    seed: int,
    workers: int = 1,
) -> TrendReport:
    """
    Function Description:
        Estimates P(sup_{s<=t} |M^(alpha)_s| / S_{beta,n} > eta) along increasing t.
        The beta-variation is realised on the simulation grid, so c_alpha is not needed.
    Args:
        alphas : Sequence[float] : one series per alpha
        eta : float : Level, eta > 0
        t_values : Sequence[float] : increasing horizons
        integrand : IntegrandSpec : bounded xi
        cells, replicates, seed : simulation size and seed
    Keyword Args:
        workers : int : Process count
    Returns:
        TrendReport : halving rule per alpha series
    """
    require(eta > 0, "eta > 0", f"got eta={eta}")
    require(integrand.c_inf is not None, "bounded xi")
    statistics, errors, degenerate = {}, {}, {}
    for alpha in alphas:
        name = f"alpha={alpha:g}"
        statistics[name], errors[name], degenerate[name] = [], [], []
        for t in t_values:
            job = PathJob(alpha=alpha, grid=make_grid(t, cells), integrand=integrand)
            stats = simulate_statistics(job, seed, replicates, workers)
            s_beta = stats[:, S_BETA]
            usable = s_beta > 0
            ratio = stats[usable, SUP] / s_beta[usable]
            n_ok = max(1, int(np.count_nonzero(usable)))
            p_hat = float(np.count_nonzero(ratio > eta)) / n_ok
            statistics[name].append(p_hat)
            errors[name].append(math.sqrt(p_hat * (1.0 - p_hat) / n_ok))
            degenerate[name].append(int(np.count_nonzero(~usable)))
    return TrendReport(
        kind="wlln",
        t_values=list(t_values),
        statistics=statistics,
        standard_errors=errors,
        rule="halving",
        notes={"eta": eta, "degenerate_paths": degenerate, "replicates": replicates},
    )


class LocalTimeEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    raw: float
    delta: float
    bias_warning: bool
    corrected: bool = False


def local_time_rows(paths: np.ndarray, grid: TimeGrid, delta: float, level: float = 0.0) -> np.ndarray:
    """(2 delta)^(-1) times the grid occupation time of [level - delta, level + delta]."""
    require(delta > 0, "delta > 0", f"got delta={delta}")
    near = np.abs(np.atleast_2d(paths)[:, :-1] - level) <= delta
    return grid.step * np.count_nonzero(near, axis=1) / (2.0 * delta)


def local_time_estimate(
    path: SamplePath,
    delta: float = LOCAL_TIME_DELTA,
    level: float = 0.0,
    hurst: Optional[float] = None,
) -> LocalTimeEstimate:
    """
    Function Description:
        Occupation-measure estimate of the local time L(t, level).
        Flags a bias warning when delta is below the typical path increment.
        With the path's Hurst parameter the raw window count is rescaled so its
        mean equals E[L^H(t, level)].
    Args:
        path : SamplePath : fBm path
    Keyword Args:
        delta : float : Half-width of the occupation window
        level : float : Level y
        hurst : float : Hurst parameter of the path, enables the correction
    Returns:
        LocalTimeEstimate : value, raw count and warning flag
    """
    raw = float(local_time_rows(path.values, path.grid, delta, level)[0])
    typical_increment = float(np.sqrt(np.mean(np.diff(path.values) ** 2)))
    warn = delta < typical_increment
    if warn:
        logging.warning(f"local time bandwidth {delta} below typical increment {typical_increment:.3g}")
    if hurst is None:
        return LocalTimeEstimate(value=raw, raw=raw, delta=delta, bias_warning=warn)
    value = raw * local_time_correction(hurst, path.grid, delta, level)
    return LocalTimeEstimate(value=value, raw=raw, delta=delta, bias_warning=warn, corrected=True)


class OccupationJob(BaseModel):
    model_config = ConfigDict(frozen=True)

    hurst: float
    grid: TimeGrid
    kind: Literal["local-time", "occupation"]
    delta: float = LOCAL_TIME_DELTA
    beta: float = 2.0
    phi: str = "gauss"
    method: Literal["exact", "circulant", "auto"] = "auto"
    bias_corrected: bool = True


def occupation_statistics(job: OccupationJob, indices: Sequence[int], seed: int) -> np.ndarray:
    """
    Function Description:
        Per-path fBm functionals: the local time at 0 (kind local-time), or
        t^(-(1-H)) int_0^t |Phi(B^H_s)|^beta ds by left-point quadrature (kind occupation).
    Args:
        job : OccupationJob : parameters
        indices : Sequence[int] : replicate indices
        seed : int : Master seed
    Keyword Args:
        None
    Returns:
        np.ndarray : one value per replicate
    """
    substream = SUBSTREAM_LOCAL_TIME if job.kind == "local-time" else SUBSTREAM_OCCUPATION
    paths = fbm_matrix(job.grid, job.hurst, streams_for(seed, indices, substream), method=job.method)
    if job.kind == "local-time":
        values = local_time_rows(paths, job.grid, job.delta)
        if job.bias_corrected:
            values = values * local_time_correction(job.hurst, job.grid, job.delta)
        return values
    weights = np.abs(PHI_FUNCTIONS[job.phi](paths[:, :-1])) ** job.beta
    integral = job.grid.step * np.sum(weights, axis=1)
    return integral / job.grid.horizon ** (1.0 - job.hurst)


def local_time_sample(
    hurst: float,
    replicates: int,
    seed: int,
    delta: float = LOCAL_TIME_DELTA,
    cells: int = LOCAL_TIME_CELLS,
    workers: int = 1,
    bias_corrected: bool = True,
) -> np.ndarray:
    job = OccupationJob(
        hurst=hurst,
        grid=make_grid(1.0, cells),
        kind="local-time",
        delta=delta,
        bias_corrected=bias_corrected,
    )
    return run_replicates(partial(occupation_statistics, job), seed, replicates, workers)


def local_time_sensitivity(
    hurst: float,
    replicates: int,
    seed: int,
    delta: float = LOCAL_TIME_DELTA,
    cells: int = LOCAL_TIME_CELLS,
    workers: int = 1,
    bias_corrected: bool = True,
) -> Dict[float, Tuple[float, float]]:
    """Mean and standard error of the local-time estimate at delta/2, delta and 2 delta."""
    result = {}
    for d in (delta / 2.0, delta, 2.0 * delta):
        sample = local_time_sample(hurst, replicates, seed, d, cells, workers, bias_corrected)
        mean, var = compensated_mean_var(sample)
        result[d] = (mean, math.sqrt(var / sample.size))
    return result


class KSResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    distance: float
    critical: float
    p_value: float
    level: float

    @property
    def passed(self) -> bool:
        return self.distance <= self.critical


def ks_two_sample(a: np.ndarray, b: np.ndarray, level: float = 0.01) -> KSResult:
    """Two-sample Kolmogorov-Smirnov distance with its asymptotic critical value at level."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    require(a.size > 0 and b.size > 0, "nonempty samples")
    result = ks_2samp(a, b, method="asymp")
    critical = float(kstwobign.ppf(1.0 - level)) * math.sqrt((a.size + b.size) / (a.size * b.size))
    return KSResult(distance=float(result.statistic), critical=critical, p_value=float(result.pvalue), level=level)


def ks_self_test(sample: np.ndarray, level: float = 0.01) -> KSResult:
    sample = np.asarray(sample)
    half = sample.size // 2
    return ks_two_sample(sample[:half], sample[half : 2 * half], level)


def verify_apply(
    hurst: float,
    alpha: float,
    t_values: Sequence[float],
    replicates: int,
    seed: int,
    cells_per_unit: float = 100.0,
    workers: int = 1,
    delta: float = LOCAL_TIME_DELTA,
    local_time_cells: int = LOCAL_TIME_CELLS,
    level: float = 0.01,
) -> TrendReport:
    """
    Function Description:
        Compares t^(-(1-H)) int_0^t |Phi(B^H_s)|^beta ds with its limit in law
        (int |Phi|^beta) L^H(1, 0) through the two-sample KS distance along t.
        Each horizon keeps the step 1 / cells_per_unit, so the quadrature error
        does not grow with t. The limit side uses the bias-corrected local time.
    Args:
        hurst : float : Hurst parameter
        alpha : float : fixes beta = 2 / (1 + 2 alpha)
        t_values : Sequence[float] : increasing horizons
        replicates : int : Samples per side
        seed : int : Master seed
    Keyword Args:
        cells_per_unit : float : Grid cells per unit of time on [0, t]
        workers, delta, local_time_cells, level
    Returns:
        TrendReport : KS distances under the halving rule, final one below the critical value
    """
    require(cells_per_unit > 0, "cells_per_unit > 0", f"got {cells_per_unit}")
    beta = make_alpha(alpha).beta
    phi_integral = gaussian_phi_integral("gauss", beta).value
    limit = phi_integral * local_time_sample(hurst, replicates, seed, delta, local_time_cells, workers)
    limit_mean = phi_integral * expected_local_time_bm(hurst)

    distances, critical, errors, cells, predicted = [], [], [], [], []
    for t in t_values:
        n = max(1, round(cells_per_unit * t))
        job = OccupationJob(hurst=hurst, grid=make_grid(t, n), kind="occupation", beta=beta, phi="gauss")
        sample = run_replicates(partial(occupation_statistics, job), seed, replicates, workers)
        ks = ks_two_sample(sample, limit, level)
        distances.append(ks.distance)
        critical.append(ks.critical)
        # null spread of the scaled KS distance
        errors.append(float(kstwobign.std()) * math.sqrt(2.0 / replicates))
        cells.append(n)
        predicted.append(expected_gauss_occupation(hurst, beta, t) / limit_mean)
    return TrendReport(
        kind="apply-fbm",
        t_values=list(t_values),
        statistics={"ks_distance": distances},
        standard_errors={"ks_distance": errors},
        rule="halving",
        final_pass=distances[-1] <= critical[-1],
        notes={
            "hurst": hurst,
            "alpha": alpha,
            "beta": beta,
            "critical": critical,
            "cells": cells,
            "predicted_mean_ratio": predicted,
            "replicates": replicates,
        },
    )


class Conv00Job(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    grid: TimeGrid
    integrand: IntegrandSpec


def conv00_ratios(job: Conv00Job, indices: Sequence[int], seed: int) -> np.ndarray:
    """int (t-s)^alpha xi dW / int (t-s)^(2 alpha) xi^2 ds for each replicate, same xi realisation."""
    streams = streams_for(seed, indices)
    dW = bm_increment_matrix(job.grid, streams)
    xi = integrand_matrix(job.integrand, job.grid, streams)
    numerator = frac_terminal(make_alpha(job.alpha), job.grid, xi, dW)
    weights = WeightedQuadrature.build(2.0 * job.alpha, job.grid).weights
    denominator = (xi[:, :-1] ** 2) @ weights
    assert np.all(denominator > 0)
    return numerator / denominator


def verify_conv00(
    alpha: float,
    integrand: IntegrandSpec,
    t_values: Sequence[float],
    cells: int,
    replicates: int,
    seed: int,
    workers: int = 1,
) -> TrendReport:
    """
    Function Description:
        Median and 90th percentile of the absolute ratio along increasing t;
        both must strictly decrease.
    Args:
        alpha : float : alpha > 0
        integrand : IntegrandSpec : xi with divergent int xi^2 (constant or shifted-gauss)
        t_values, cells, replicates, seed : ladder and simulation size
    Keyword Args:
        workers : int : Process count
    Returns:
        TrendReport : strict rule on both series
    """
    require(alpha > 0, "alpha > 0", f"got alpha={alpha}")
    make_alpha(alpha)
    require(
        (integrand.kind == "constant" and integrand.constant != 0)
        or (integrand.kind == "phi-of-fbm" and integrand.phi == "shifted-gauss"),
        "int_0^inf xi^2 = inf",
        "use a nonzero constant or shifted-gauss integrand",
    )
    medians, p90s, predicted = [], [], []
    for t in t_values:
        job = Conv00Job(alpha=alpha, grid=make_grid(t, cells), integrand=integrand)
        ratios = np.abs(run_replicates(partial(conv00_ratios, job), seed, replicates, workers))
        medians.append(float(np.median(ratios)))
        p90s.append(float(np.quantile(ratios, 0.9)))
        predicted.append(math.sqrt(2.0 * alpha + 1.0) * t ** -(alpha + 0.5))
    return TrendReport(
        kind="conv00",
        t_values=list(t_values),
        statistics={"median": medians, "p90": p90s},
        rule="strict",
        notes={"alpha": alpha, "predicted_sd_constant_xi": predicted, "replicates": replicates},
    )


class IsometryCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    t: float
    sample_variance: float
    expected: float
    standard_error: float

    @property
    def passed(self) -> bool:
        return abs(self.sample_variance - self.expected) <= 3.0 * self.standard_error


def verify_isometry(alpha: float, t: float, cells: int, replicates: int, seed: int, workers: int = 1) -> IsometryCheck:
    """Var(M^(alpha)_t) for xi = 1 against t^(2 alpha + 1) / (2 alpha + 1)."""
    job = PathJob(alpha=alpha, grid=make_grid(t, cells), terminal_only=True)
    terminal = simulate_statistics(job, seed, replicates, workers)[:, TERMINAL]
    _, var = compensated_mean_var(terminal)
    return IsometryCheck(
        alpha=alpha,
        t=t,
        sample_variance=var,
        expected=t ** (2.0 * alpha + 1.0) / (2.0 * alpha + 1.0),
        standard_error=var * math.sqrt(2.0 / (replicates - 1)),
    )


class BetaGapJob(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    grid: TimeGrid
    integrand: IntegrandSpec
    m_values: Tuple[int, ...]
    c_alpha: float


def beta_gap_rows(job: BetaGapJob, indices: Sequence[int], seed: int) -> np.ndarray:
    """|S_{beta,m} - c_alpha int |xi|^beta ds| per replicate, one column per m."""
    a = make_alpha(job.alpha)
    grid = job.grid
    streams = streams_for(seed, indices)
    dW = bm_increment_matrix(grid, streams)
    xi = integrand_matrix(job.integrand, grid, streams)
    paths = frac_convolve_matrix(a, grid, xi, dW)
    limit = job.c_alpha * grid.step * np.sum(np.abs(xi[:, :-1]) ** a.beta, axis=1)
    columns = [np.abs(beta_variation_rows(paths, grid, a.beta, m) - limit) for m in job.m_values]
    return np.column_stack(columns)


def verify_beta_convergence(
    alpha: float,
    grid: TimeGrid,
    m_values: Sequence[int],
    replicates: int,
    seed: int,
    integrand: IntegrandSpec = IntegrandSpec(),
    c_alpha: Optional[float] = None,
    workers: int = 1,
) -> TrendReport:
    """
    Function Description:
        Mean L1 gap |S_{beta,m} - c_alpha int |xi|^beta ds| along increasing m,
        all m read off the same simulated paths. Without c_alpha the estimate
        at the finest m from an independent xi = 1 run is used.
    Args:
        alpha : float : kernel exponent
        grid : TimeGrid : simulation grid, every m must divide its cells
        m_values : Sequence[int] : increasing subdivisions
        replicates, seed : simulation size and seed
    Keyword Args:
        integrand, c_alpha, workers
    Returns:
        TrendReport : strictly decreasing gaps
    """
    a = make_alpha(alpha)
    if c_alpha is None:
        c_alpha = estimate_c_alpha(a, replicates, grid, seed=seed + 1)[grid.cells].value
    job = BetaGapJob(alpha=alpha, grid=grid, integrand=integrand, m_values=tuple(m_values), c_alpha=c_alpha)
    gaps = run_replicates(partial(beta_gap_rows, job), seed, replicates, workers)
    means, errors = [], []
    for column in gaps.T:
        mean, var = compensated_mean_var(column)
        means.append(mean)
        errors.append(math.sqrt(var / replicates))
    return TrendReport(
        kind="beta-variation",
        t_values=[float(m) for m in m_values],
        statistics={"l1_gap": means},
        standard_errors={"l1_gap": errors},
        rule="strict",
        notes={"axis": "m", "alpha": alpha, "c_alpha": c_alpha},
    )


class HolderSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    c_alpha: float
    tolerance: float
    holding: int
    replicates: int

    @property
    def fraction(self) -> float:
        return self.holding / self.replicates

    @property
    def passed(self) -> bool:
        return self.fraction >= 0.99


def verify_holder_relations(
    alpha: float,
    grid: TimeGrid,
    replicates: int,
    seed: int,
    integrand: IntegrandSpec = IntegrandSpec(),
    c_alpha: Optional[float] = None,
    m: Optional[int] = None,
    tolerance: float = 0.1,
    workers: int = 1,
) -> HolderSummary:
    """
    Function Description:
        Counts the simulated paths on which the Hölder relation between
        S_{beta,m} and <M>_t = int xi^2 ds holds up to a relative tolerance.
        Without c_alpha it is estimated from an independent xi = 1 run at the same m.
    Args:
        alpha : float : kernel exponent, alpha != 0
        grid : TimeGrid : simulation grid
        replicates, seed : simulation size and seed
    Keyword Args:
        integrand, c_alpha, m, tolerance, workers
    Returns:
        HolderSummary : paths satisfying the relation
    """
    require(alpha != 0, "alpha != 0", "the relations are identities at alpha = 0")
    a = make_alpha(alpha)
    m = m or grid.cells
    if c_alpha is None:
        c_alpha = estimate_c_alpha(a, replicates, grid, seed=seed + 1, m_values=[m])[m].value
    job = PathJob(alpha=alpha, grid=grid, integrand=integrand, m=m)
    stats = simulate_statistics(job, seed, replicates, workers)
    holding = sum(
        holder_relation_bounds(alpha, c_alpha, grid.horizon, row[S_BETA], row[QV]).holds(tolerance)
        for row in stats
    )
    return HolderSummary(
        alpha=alpha,
        c_alpha=c_alpha,
        tolerance=tolerance,
        holding=int(holding),
        replicates=replicates,
    )


def simulate_paths(
    alpha: float,
    grid: TimeGrid,
    integrand: IntegrandSpec,
    seed: int,
    replicates: int = 1,
) -> pd.DataFrame:
    """Long-format table of W, xi, M^(alpha) (and the fBm driving xi) for plotting."""
    a = make_alpha(alpha)
    streams = streams_for(seed, range(replicates))
    dW = bm_increment_matrix(grid, streams)
    xi = integrand_matrix(integrand, grid, streams)
    M = frac_convolve_matrix(a, grid, xi, dW)
    W = np.concatenate((np.zeros((replicates, 1)), np.cumsum(dW, axis=1)), axis=1)
    frames = []
    for r in range(replicates):
        frame = pd.DataFrame({"replicate": r, "t": grid.points, "W": W[r], "xi": xi[r], "M": M[r]})
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True)
    if integrand.kind == "phi-of-fbm":
        drivers = [s.substream(SUBSTREAM_XI) for s in streams]
        table["B_H"] = fbm_matrix(grid, integrand.hurst, drivers).reshape(-1)
    return table
