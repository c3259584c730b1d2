import argparse
import logging
from typing import Any, Dict, List, Optional

from pydantic import ValidationError
from termcolor import colored

from . import __version__
from .bounds import (
    MAYO_SWEEP_PAIRS,
    C_beta_betaprime,
    bound_value,
    c1_constant,
    c_t,
    kappa_case_i,
    kappa_eps,
    mayo_sweep,
)
from .data_models import (
    BoundSpec,
    CirculantEmbeddingError,
    ConstraintViolation,
    ExperimentConfig,
    IntegrandSpec,
    make_alpha,
    make_grid,
    require,
)
from .deterministic import toeplitz_trend
from .experiments import (
    TAIL_COLUMNS,
    bound_matrix,
    run_fixed_time,
    run_tail,
    simulate_paths,
    verify_apply,
    verify_conv00,
    verify_wlln,
)
from .fm_sysenv import (
    FRACMART_GRID_CELLS,
    FRACMART_LOG_LEVEL,
    FRACMART_OUTPUT_DIR,
    FRACMART_PILOT_SIZE,
    FRACMART_REPLICATES,
)
from .fractional import estimate_c_alpha
from .helpers import load_config_file, log_action, merge_config, resolve_workers
from .reports import write_paths, write_report, write_trend_report

MONTE_CARLO_COMMANDS = {"tail", "fixed-time", "wlln", "apply-fbm", "conv00", "calpha", "simulate"}

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "constants": {"t": 1.0},
    "bound": {"L": 1.0, "t": 1.0, "nu_t": 1.0},
    "tail": {"L": 1.0, "t": 1.0, "a": 2.0, "pilot_size": FRACMART_PILOT_SIZE},
    "fixed-time": {"variant": "intro", "alpha": -0.25, "t": 1.0, "target": 0.1, "pilot_size": FRACMART_PILOT_SIZE},
    "wlln": {"alphas": [0.0], "eta": 0.5, "t_values": [10.0, 40.0, 160.0]},
    "apply-fbm": {"hurst": 0.5, "alpha": 0.0, "t_values": [10.0, 100.0, 1000.0], "delta": 0.05, "local_time_cells": 2**12, "cells_per_unit": 100.0},
    "conv00": {"alpha": 0.25, "t_values": [10.0, 100.0, 1000.0]},
    "toeplitz": {"alpha": 0.3, "t_values": [10.0, 100.0, 1000.0], "cells_per_unit": 100.0},
    "mayo": {"points": 50},
    "calpha": {"alpha": 0.0, "t": 1.0},
    "simulate": {"alpha": 0.0, "t": 1.0, "paths": 1},
}

AMBIENT_DEFAULTS = {
    "cells": FRACMART_GRID_CELLS,
    "paths": FRACMART_REPLICATES,
    "output_dir": FRACMART_OUTPUT_DIR,
    "log_level": FRACMART_LOG_LEVEL,
    "xi": "constant",
    "xi_constant": 1.0,
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat JSON config file, keys mirror long flag names")
    parser.add_argument("--seed", type=int, help="master seed (required for Monte Carlo runs)")
    parser.add_argument("--workers", type=int, help="worker processes (falls back to FRACMART_WORKERS)")
    parser.add_argument("--output-dir", help="directory for CSV/JSON reports")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level")
    parser.add_argument("--cells", type=int, help="grid cells n")
    parser.add_argument("--paths", type=int, help="Monte Carlo replicates N")


def _add_integrand(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--xi", choices=["constant", "gauss", "shifted-gauss"], help="integrand family")
    parser.add_argument("--xi-constant", type=float, help="value of a constant integrand")
    parser.add_argument("--hurst", type=float, help="Hurst parameter of the fBm driving xi")
    parser.add_argument("--xi-bound", type=float, help="declared bound c_inf on |xi|")


def _add_bound_params(parser: argparse.ArgumentParser, cases=("i", "ii", "iii")) -> None:
    parser.add_argument("--case", choices=list(cases), help="theorem case")
    parser.add_argument("--alpha", type=float, help="kernel exponent in (-1/2, 1/2)")
    parser.add_argument("--beta-prime", type=float, help="moment exponent beta' (case i)")
    parser.add_argument("--eps", type=float, help="epsilon (cases ii, iii)")
    parser.add_argument("--L", type=float, help="deviation multiplier L >= 1")
    parser.add_argument("--t", type=float, help="time horizon")
    parser.add_argument("--nu-t", type=float, help="conditioning level nu_t")
    parser.add_argument("--c-inf", type=float, help="bound on |xi| (case iii)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracmart", description="Fractional martingale bounds and Monte Carlo checks")
    parser.add_argument("--version", action="version", version=f"fracmart {__version__}")
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    constants_parser = subparsers.add_parser("constants", help="print C_t, kappa, c1 and C_{beta,beta'}")
    constants_parser.add_argument("--t", type=float, help="time t")
    constants_parser.add_argument("--alpha", type=float, help="kernel exponent")
    constants_parser.add_argument("--beta-prime", type=float, help="moment exponent beta'")
    constants_parser.add_argument("--eps", type=float, help="epsilon")

    bound_parser = subparsers.add_parser("bound", help="evaluate a deviation bound")
    _add_bound_params(bound_parser)

    tail_parser = subparsers.add_parser("tail", help="Monte Carlo tail check against a deviation bound")
    _add_bound_params(tail_parser, cases=("i", "ii", "iii", "classical"))
    _add_integrand(tail_parser)
    tail_parser.add_argument("--a", type=float, help="slope a of the classical baseline")
    tail_parser.add_argument("--c", type=float, help="rate c with <M>_t <= c t (classical)")
    tail_parser.add_argument("--matrix", action="store_true", default=None, help="run every valid case x alpha x t x L cell")
    tail_parser.add_argument("--pilot-size", type=int, help="pilot replicates for nu_t")

    fixed_parser = subparsers.add_parser("fixed-time", help="fixed-time bound check at the terminal time")
    fixed_parser.add_argument("--variant", choices=["intro", "remark"], help="conditioning variant")
    fixed_parser.add_argument("--alpha", type=float, help="kernel exponent, alpha < 0")
    fixed_parser.add_argument("--beta-prime", type=float, help="moment exponent (remark)")
    fixed_parser.add_argument("--t", type=float, help="time t")
    fixed_parser.add_argument("--nu-t", type=float, help="conditioning level (pilot median if unset)")
    fixed_parser.add_argument("--u", type=float, help="deviation level")
    fixed_parser.add_argument("--target", type=float, help="bound value used to calibrate u")
    fixed_parser.add_argument("--pilot-size", type=int, help="pilot replicates for nu_t")
    _add_integrand(fixed_parser)

    wlln_parser = subparsers.add_parser("wlln", help="weak law of large numbers trend")
    wlln_parser.add_argument("--alphas", type=float, nargs="+", help="kernel exponents")
    wlln_parser.add_argument("--eta", type=float, help="level eta")
    wlln_parser.add_argument("--t-values", type=float, nargs="+", help="increasing horizons")
    _add_integrand(wlln_parser)

    apply_parser = subparsers.add_parser("apply-fbm", help="occupation functional of fBm against its local-time limit")
    apply_parser.add_argument("--hurst", type=float, help="Hurst parameter")
    apply_parser.add_argument("--alpha", type=float, help="kernel exponent fixing beta")
    apply_parser.add_argument("--t-values", type=float, nargs="+", help="increasing horizons")
    apply_parser.add_argument("--delta", type=float, help="local-time bandwidth")
    apply_parser.add_argument("--local-time-cells", type=int, help="grid cells on [0, 1] for the local time")
    apply_parser.add_argument("--cells-per-unit", type=float, help="grid cells per unit of time on [0, t]")

    conv_parser = subparsers.add_parser("conv00", help="almost sure convergence of the normalised ratio")
    conv_parser.add_argument("--alpha", type=float, help="kernel exponent, alpha > 0")
    conv_parser.add_argument("--t-values", type=float, nargs="+", help="increasing horizons")
    _add_integrand(conv_parser)

    toeplitz_parser = subparsers.add_parser("toeplitz", help="fractional Toeplitz ratio ladder")
    toeplitz_parser.add_argument("--alpha", type=float, help="alpha > 0")
    toeplitz_parser.add_argument("--t-values", type=float, nargs="+", help="increasing horizons")
    toeplitz_parser.add_argument("--cells-per-unit", type=float, help="grid density")

    mayo_parser = subparsers.add_parser("mayo", help="increment inequality constant and sweep")
    mayo_parser.add_argument("--alpha", type=float, help="alpha (sweep all reference pairs if unset)")
    mayo_parser.add_argument("--eps", type=float, help="epsilon")
    mayo_parser.add_argument("--points", type=int, help="sweep points per axis")

    calpha_parser = subparsers.add_parser("calpha", help="Monte Carlo estimate of c_alpha")
    calpha_parser.add_argument("--alpha", type=float, help="kernel exponent")
    calpha_parser.add_argument("--t", type=float, help="time horizon")
    calpha_parser.add_argument("--m-values", type=int, nargs="+", help="subdivisions dividing n")

    simulate_parser = subparsers.add_parser("simulate", help="dump W, xi, M^(alpha) as CSV")
    simulate_parser.add_argument("--alpha", type=float, help="kernel exponent")
    simulate_parser.add_argument("--t", type=float, help="time horizon")
    _add_integrand(simulate_parser)

    for sub in subparsers.choices.values():
        _add_common(sub)
    return parser


def effective_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Flags over config file over environment-backed defaults."""
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    file_values = load_config_file(args.config) if args.config else {}
    defaults = {**AMBIENT_DEFAULTS, **COMMAND_DEFAULTS[args.command]}
    cfg = merge_config(defaults, file_values, flags)
    cfg["workers"] = resolve_workers(cfg.get("workers"))
    cfg["command"] = args.command
    cfg["config"] = args.config
    return cfg


def integrand_from(cfg: Dict[str, Any]) -> IntegrandSpec:
    bound = cfg.get("xi_bound")
    if cfg.get("table"):
        return IntegrandSpec(kind="table", table=tuple(cfg["table"]), bound=bound)
    if cfg["xi"] == "constant":
        return IntegrandSpec(kind="constant", constant=cfg["xi_constant"], bound=bound)
    return IntegrandSpec(kind="phi-of-fbm", phi=cfg["xi"], hurst=cfg.get("hurst") or 0.75, bound=bound)


def verdict(passed: bool) -> str:
    return colored("PASS", "green") if passed else colored("FAIL", "red")


def _need(cfg: Dict[str, Any], *keys: str) -> None:
    for key in keys:
        require(cfg.get(key) is not None, f"{key} set", f"pass --{key.replace('_', '-')} or set it in the config file")


def run_constants(cfg: Dict[str, Any]) -> bool:
    print(f"C_t = {c_t(cfg['t']):.10g}")
    alpha, beta_prime, eps = cfg.get("alpha"), cfg.get("beta_prime"), cfg.get("eps")
    if eps is not None:
        print(f"kappa (eps={eps:g}) = {kappa_eps(eps):.10g}")
    if alpha is not None:
        beta = make_alpha(alpha).beta
        print(f"beta = {beta:.10g}")
        if beta_prime is not None:
            print(f"kappa (beta={beta:g}, beta'={beta_prime:g}) = {kappa_case_i(beta, beta_prime):.10g}")
            print(f"C_(beta,beta') = {C_beta_betaprime(beta, beta_prime):.10g}")
            if beta > 2:
                print(f"c1 = {c1_constant(beta, beta_prime):.10g}")
    return True


def run_bound(cfg: Dict[str, Any]) -> bool:
    _need(cfg, "case", "alpha")
    spec = BoundSpec(
        case=cfg["case"],
        alpha=cfg["alpha"],
        beta_prime=cfg.get("beta_prime"),
        eps=cfg.get("eps"),
        L=cfg["L"],
        t=cfg["t"],
        nu_t=cfg["nu_t"],
        c_inf=cfg.get("c_inf"),
    )
    value = bound_value(spec)
    print(f"case {value.case}: P(sup |M| >= {value.threshold:.10g}, {value.conditioning}) <= {value.probability_bound:.10g}")
    for name, constant in value.constants.items():
        print(f"  {name} = {constant:.10g}")
    return True


def _print_tail(outcome) -> None:
    row = outcome.row()
    est = outcome.estimate
    print(
        f"case={row['case']} alpha={row['alpha']} L={row['L']} t={row['t']} "
        f"k/N={est.exceedances}/{est.replicates} lo={est.lo:.4g} bound={est.bound:.4g} {verdict(est.passed)}"
    )


def run_tail_command(cfg: Dict[str, Any]) -> bool:
    integrand = integrand_from(cfg)
    if cfg.get("matrix"):
        outcomes = bound_matrix(
            cfg["cells"],
            cfg["paths"],
            cfg["seed"],
            cfg["workers"],
            alphas=cfg.get("alphas") or (-0.25, 0.0, 0.25),
            t_values=cfg.get("t_values") or (1.0, 4.0, 16.0),
            L_values=cfg.get("L_values") or (1.0, 2.0, 4.0),
            beta_prime=cfg.get("beta_prime") or 6.0,
            integrand=integrand,
            pilot_size=cfg["pilot_size"],
        )
    else:
        _need(cfg, "case")
        if cfg["case"] != "classical":
            _need(cfg, "alpha")
        keys = ("case", "alpha", "beta_prime", "eps", "L", "t", "nu_t", "c_inf", "a", "c", "pilot_size")
        config = ExperimentConfig(
            kind="tail",
            params={k: cfg.get(k) for k in keys},
            cells=cfg["cells"],
            replicates=cfg["paths"],
            seed=cfg["seed"],
            output_dir=cfg["output_dir"],
        )
        outcomes = [run_tail(config, integrand, cfg["workers"])]
    for outcome in outcomes:
        _print_tail(outcome)
    passed = all(o.passed for o in outcomes)
    write_report("tail", [o.row() for o in outcomes], TAIL_COLUMNS, cfg, cfg["output_dir"], passed)
    return passed


def run_fixed_time_command(cfg: Dict[str, Any]) -> bool:
    keys = ("alpha", "beta_prime", "t", "nu_t", "u", "target", "pilot_size")
    config = ExperimentConfig(
        kind="fixed-time",
        params={k: cfg.get(k) for k in keys},
        cells=cfg["cells"],
        replicates=cfg["paths"],
        seed=cfg["seed"],
        output_dir=cfg["output_dir"],
    )
    outcome = run_fixed_time(config, cfg["variant"], integrand_from(cfg), cfg["workers"])
    est = outcome.estimate
    print(
        f"{outcome.case} alpha={cfg['alpha']} t={cfg['t']} u={outcome.bound.threshold:.6g} "
        f"nu_t={outcome.params['nu_t']:.6g} k/N={est.exceedances}/{est.replicates} "
        f"[{est.lo:.4g}, {est.hi:.4g}] bound={est.bound:.4g} {verdict(est.passed)}"
    )
    write_report("fixed-time", [outcome.row()], TAIL_COLUMNS, cfg, cfg["output_dir"], est.passed)
    return est.passed


def _print_trend(report) -> None:
    for name, series in report.statistics.items():
        values = " ".join(f"{v:.4g}" for v in series)
        print(f"{report.kind} {name}: {values} {verdict(report.series_ok(name))}")
    if report.final_pass is not None:
        print(f"{report.kind} final: {verdict(report.final_pass)}")


def run_trend_command(cfg: Dict[str, Any]) -> bool:
    command = cfg["command"]
    if command == "wlln":
        report = verify_wlln(
            cfg["alphas"], cfg["eta"], cfg["t_values"], integrand_from(cfg),
            cfg["cells"], cfg["paths"], cfg["seed"], cfg["workers"],
        )
    elif command == "apply-fbm":
        report = verify_apply(
            cfg["hurst"], cfg["alpha"], cfg["t_values"], cfg["paths"], cfg["seed"],
            cells_per_unit=cfg["cells_per_unit"], workers=cfg["workers"], delta=cfg["delta"],
            local_time_cells=cfg["local_time_cells"],
        )
    elif command == "conv00":
        report = verify_conv00(
            cfg["alpha"], integrand_from(cfg), cfg["t_values"],
            cfg["cells"], cfg["paths"], cfg["seed"], cfg["workers"],
        )
    else:
        report = toeplitz_trend(cfg["alpha"], cfg["t_values"], cells_per_unit=cfg["cells_per_unit"])
    _print_trend(report)
    if command != "toeplitz":
        write_trend_report(report, cfg, cfg["output_dir"])
    return report.verdict


def run_mayo(cfg: Dict[str, Any]) -> bool:
    if cfg.get("alpha") is None and cfg.get("eps") is None:
        pairs = MAYO_SWEEP_PAIRS
    else:
        _need(cfg, "alpha", "eps")
        pairs = [(cfg["alpha"], cfg["eps"])]
    passed = True
    for alpha, eps in pairs:
        sweep = mayo_sweep(alpha, eps, points=cfg["points"])
        print(
            f"alpha={alpha:g} eps={eps:g} C = {sweep.constant:.5f} (numeric {sweep.constant_numeric:.5f}) "
            f"failures {sweep.failures}/{sweep.points} {verdict(sweep.passed)}"
        )
        passed = passed and sweep.passed
    return passed


def run_calpha(cfg: Dict[str, Any]) -> bool:
    grid = make_grid(cfg["t"], cfg["cells"])
    estimates = estimate_c_alpha(make_alpha(cfg["alpha"]), cfg["paths"], grid, seed=cfg["seed"], m_values=cfg.get("m_values"))
    rows = []
    for m, est in estimates.items():
        flag = colored(" (few replicates)", "yellow") if est.few_replicates else ""
        print(f"alpha={est.alpha:g} m={m} c_alpha = {est.value:.6g} +/- {est.standard_error:.2g}{flag}")
        rows.append(est.model_dump())
    columns = ["alpha", "m", "value", "standard_error", "replicates", "few_replicates"]
    write_report("calpha", rows, columns, cfg, cfg["output_dir"], True)
    return True


def run_simulate(cfg: Dict[str, Any]) -> bool:
    grid = make_grid(cfg["t"], cfg["cells"])
    table = simulate_paths(cfg["alpha"], grid, integrand_from(cfg), cfg["seed"], cfg["paths"])
    print(f"paths written to {write_paths(table, cfg['output_dir'])}")
    return True


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if args.command is None:
        parser.print_help()
        return 2

    try:
        cfg = effective_config(args)
        logging.basicConfig(
            level=getattr(logging, str(cfg["log_level"]).upper(), logging.WARNING),
            format="%(asctime)s %(levelname)s %(message)s",
        )
        if args.command in MONTE_CARLO_COMMANDS:
            _need(cfg, "seed")
        log_action("command", f"{args.command} seed={cfg.get('seed')} workers={cfg['workers']}")

        if args.command == "constants":
            passed = run_constants(cfg)
        elif args.command == "bound":
            passed = run_bound(cfg)
        elif args.command == "tail":
            passed = run_tail_command(cfg)
        elif args.command == "fixed-time":
            passed = run_fixed_time_command(cfg)
        elif args.command in ("wlln", "apply-fbm", "conv00", "toeplitz"):
            passed = run_trend_command(cfg)
        elif args.command == "mayo":
            passed = run_mayo(cfg)
        elif args.command == "calpha":
            passed = run_calpha(cfg)
        else:
            passed = run_simulate(cfg)
    except (ConstraintViolation, ValidationError, CirculantEmbeddingError, ValueError, FileNotFoundError) as exc:
        print(colored(f"Error: {exc}", "red"))
        return 2

    return 0 if passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
