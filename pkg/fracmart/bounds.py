"""Closed-form deviation bounds for fractional martingales and their constants."""

import math
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.optimize import minimize_scalar

from .data_models import BoundSpec, BoundValue, make_alpha, require

# (alpha, eps) pairs spanning alpha in (-1/2, 1/2), alpha < eps < 1
MAYO_SWEEP_PAIRS: List[Tuple[float, float]] = [
    (-0.45, 0.05),
    (-0.4, 0.5),
    (-0.25, 0.5),
    (-0.1, 0.9),
    (-0.05, 0.3),
    (0.05, 0.1),
    (0.1, 0.95),
    (0.25, 0.5),
    (0.4, 0.7),
    (0.45, 0.5),
]


def c_t(t: float) -> float:
    """C_t = 2 + 2^(1/2) t^2."""
    return 2.0 + math.sqrt(2.0) * t * t


def kappa_case_i(beta: float, beta_prime: float) -> float:
    """
    Function Description:
        kappa for case (i), from kappa^2 = 4 pi (beta beta' / (beta' - beta))^3.
    Args:
        beta : float : beta = 2 / (1 + 2 alpha)
        beta_prime : float : Moment exponent, beta' > beta
    Keyword Args:
        None
    Returns:
        float : kappa
    """
    require(beta_prime > beta, "beta' > beta", f"beta={beta}, beta'={beta_prime}")
    return math.sqrt(4.0 * math.pi) * (beta * beta_prime / (beta_prime - beta)) ** 1.5


def kappa_eps(eps: float) -> float:
    """kappa = (pi/2)^(1/2) eps^(-3/2) for cases (ii) and (iii)."""
    require(eps > 0, "eps > 0", f"got eps={eps}")
    return math.sqrt(math.pi / 2.0) * eps**-1.5


def c1_constant(beta: float, beta_prime: float) -> float:
    require(beta > 2, "beta > 2", f"got beta={beta}")
    require(beta_prime > beta, "beta' > beta", f"beta={beta}, beta'={beta_prime}")
    ratio = beta * beta_prime / (beta_prime - beta)
    bracket = beta * (beta_prime - 2.0) / (beta_prime - beta)
    return 2.0**5.5 * math.sqrt(math.pi) * ratio**1.5 * bracket ** ((beta_prime - 2.0) / (2.0 * beta))


def C_beta_betaprime(beta: float, beta_prime: float) -> float:
    """C_{beta,beta'} = [beta (beta' - 2) / (beta' - beta)]^((beta' - 2) / beta)."""
    require(beta_prime > beta, "beta' > beta", f"beta={beta}, beta'={beta_prime}")
    require(beta_prime > 2, "beta' > 2", f"got beta'={beta_prime}")
    return (beta * (beta_prime - 2.0) / (beta_prime - beta)) ** ((beta_prime - 2.0) / beta)


def _check_common(spec: BoundSpec) -> None:
    require(spec.L >= 1, "L >= 1", f"got L={spec.L}")
    require(spec.t > 0, "t > 0", f"got t={spec.t}")
    require(spec.nu_t >= 0, "nu_t >= 0", f"got nu_t={spec.nu_t}")
    make_alpha(spec.alpha)


def bound_theorem_i(spec: BoundSpec) -> BoundValue:
    """
    Function Description:
        Uniform deviation bound when alpha < 0, on the event
        (int_0^t |xi|^beta')^(2/beta') <= nu_t.
    Args:
        spec : BoundSpec : needs alpha < 0 and beta' > beta
    Keyword Args:
        None
    Returns:
        BoundValue : threshold and raw (uncapped) probability bound
    """
    _check_common(spec)
    require(spec.alpha < 0, "alpha < 0", f"case i got alpha={spec.alpha}")
    require(spec.beta_prime is not None, "beta' set", "case i needs beta'")
    beta, beta_prime = spec.beta, spec.beta_prime
    require(beta_prime > beta, "beta' > beta", f"beta={beta:.6g}, beta'={beta_prime}")
    kappa = kappa_case_i(beta, beta_prime)
    c1 = c1_constant(beta, beta_prime)
    power = (beta_prime - beta) / (beta * beta_prime)
    return BoundValue(
        case="i",
        threshold=spec.L * c1 * spec.t ** (power / 2.0) * math.sqrt(spec.nu_t),
        probability_bound=c_t(spec.t) * math.exp(-(kappa**2) * spec.L**2 / spec.t**power),
        constants={"C_t": c_t(spec.t), "kappa": kappa, "c1": c1},
        conditioning="(int |xi|^beta')^(2/beta') <= nu_t",
    )


def bound_theorem_ii(spec: BoundSpec) -> BoundValue:
    _check_common(spec)
    require(spec.alpha > 0, "alpha > 0", f"case ii got alpha={spec.alpha}")
    require(spec.eps is not None and 0 < spec.eps < spec.alpha, "0 < eps < alpha", f"eps={spec.eps}, alpha={spec.alpha}")
    kappa = kappa_eps(spec.eps)
    power = spec.alpha - spec.eps
    return BoundValue(
        case="ii",
        threshold=64.0 * spec.L * kappa * spec.t**power * math.sqrt(spec.nu_t),
        probability_bound=c_t(spec.t) * math.exp(-(kappa**2) * spec.L**2 / spec.t ** (2.0 * power)),
        constants={"C_t": c_t(spec.t), "kappa": kappa},
        conditioning="int xi^2 <= nu_t",
    )


def bound_theorem_iii(spec: BoundSpec) -> BoundValue:
    _check_common(spec)
    require(spec.c_inf is not None and spec.c_inf > 0, "c_inf set", "case iii needs a bound on xi")
    require(spec.eps is not None and 0 < spec.eps < 0.5 + spec.alpha, "0 < eps < 1/2 + alpha", f"eps={spec.eps}, alpha={spec.alpha}")
    kappa = kappa_eps(spec.eps)
    power = 0.5 + spec.alpha - spec.eps
    return BoundValue(
        case="iii",
        threshold=64.0 * spec.L * kappa * spec.c_inf * spec.t**power,
        probability_bound=c_t(spec.t) * math.exp(-(kappa**2) * spec.L**2 / spec.t ** (2.0 * power)),
        constants={"C_t": c_t(spec.t), "kappa": kappa},
    )


def bound_value(spec: BoundSpec) -> BoundValue:
    return {"i": bound_theorem_i, "ii": bound_theorem_ii, "iii": bound_theorem_iii}[spec.case](spec)


def fixed_time_exponent_scale(
    alpha: float, t: float, variant: Literal["intro", "remark"], beta_prime: Optional[float] = None
) -> float:
    """Denominator factor D in 2 exp(-u^2 / (4 D nu_t))."""
    a = make_alpha(alpha)
    require(alpha < 0, "alpha < 0", f"fixed-time bounds need alpha < 0, got {alpha}")
    require(t > 0, "t > 0")
    if variant == "intro":
        return t ** (2.0 * alpha)
    require(variant == "remark", "variant in {intro, remark}", f"got {variant!r}")
    require(beta_prime is not None, "beta' set", "remark variant needs beta'")
    beta = a.beta
    return C_beta_betaprime(beta, beta_prime) * t ** (2.0 * (beta_prime - beta) / (beta * beta_prime))


def bound_fixed_time(
    alpha: float,
    u: float,
    t: float,
    nu_t: float,
    variant: Literal["intro", "remark"] = "intro",
    beta_prime: Optional[float] = None,
) -> float:
    """
    Function Description:
        Fixed-time bound on P(|M^(alpha)_t| >= u, conditioning event).
        intro: 2 exp(-u^2 / (4 t^(2 alpha) nu_t)) with int xi^2 <= nu_t.
        remark: 2 exp(-u^2 / (4 C_{beta,beta'} t^(2(beta'-beta)/(beta beta')) nu_t))
        with (int |xi|^beta')^(2/beta') <= nu_t.
    Args:
        alpha : float : alpha < 0
        u : float : Deviation level, u > 0
        t : float : Time
        nu_t : float : Conditioning level
    Keyword Args:
        variant : str : intro or remark
        beta_prime : float : needed by the remark variant
    Returns:
        float : the bound
    """
    require(u > 0, "u > 0", f"got u={u}")
    require(nu_t >= 0, "nu_t >= 0")
    scale = fixed_time_exponent_scale(alpha, t, variant, beta_prime)
    if nu_t == 0:
        return 0.0
    return 2.0 * math.exp(-(u**2) / (4.0 * scale * nu_t))


def fixed_time_level(
    alpha: float,
    target: float,
    t: float,
    nu_t: float,
    variant: Literal["intro", "remark"] = "intro",
    beta_prime: Optional[float] = None,
) -> float:
    """Deviation level u at which the fixed-time bound equals target (0 < target < 2)."""
    require(0 < target < 2, "0 < target < 2", f"got {target}")
    scale = fixed_time_exponent_scale(alpha, t, variant, beta_prime)
    return math.sqrt(4.0 * scale * nu_t * math.log(2.0 / target))


def bound_classical(a: float, t: float, c: float) -> float:
    """2 exp(-a^2 t / (2c)) for P(sup_{s<=t} |M_s| >= a t) when <M>_t <= c t."""
    require(a > 0 and t > 0 and c > 0, "a, t, c > 0", f"a={a}, t={t}, c={c}")
    return 2.0 * math.exp(-(a**2) * t / (2.0 * c))


def _check_mayo_domain(alpha: float, eps: float) -> None:
    make_alpha(alpha)
    require(eps > 0, "eps > 0", f"got eps={eps}")
    require(eps > alpha, "eps > alpha", f"alpha={alpha}, eps={eps}")
    require(eps < 1, "eps < 1", f"got eps={eps}")


def _mayo_profile(x: float, alpha: float, eps: float) -> float:
    return x ** (1.0 - eps) / (1.0 + x) ** (1.0 - alpha)


def mayo_constant(alpha: float, eps: float) -> float:
    """
    Function Description:
        Constant C with |(u+h)^alpha - u^alpha| <= C h^eps u^(alpha-eps) for all
        u, h > 0: C = |alpha|/eps * sup_x x^(1-eps)/(1+x)^(1-alpha), the supremum
        attained at x* = (1-eps)/(eps-alpha). alpha = 0 gives C = 0.
    Args:
        alpha : float : alpha in (-1/2, 1/2)
        eps : float : alpha < eps < 1
    Keyword Args:
        None
    Returns:
        float : C
    """
    _check_mayo_domain(alpha, eps)
    if alpha == 0:
        return 0.0
    x_star = (1.0 - eps) / (eps - alpha)
    return abs(alpha) / eps * _mayo_profile(x_star, alpha, eps)


def mayo_constant_numeric(alpha: float, eps: float) -> float:
    """Same constant, supremum located by golden-section search in log x."""
    _check_mayo_domain(alpha, eps)
    if alpha == 0:
        return 0.0
    result = minimize_scalar(
        lambda y: -_mayo_profile(math.exp(y), alpha, eps),
        bracket=(-1.0, 1.0),
        method="golden",
        options={"xtol": 1e-12},
    )
    return abs(alpha) / eps * -result.fun


def mayo_check(alpha: float, eps: float, C: float, u: float, h: float) -> bool:
    """True iff |(u+h)^alpha - u^alpha| <= C h^eps u^(alpha-eps)."""
    require(u > 0 and h > 0, "u, h > 0", f"u={u}, h={h}")
    lhs = u**alpha * abs(math.expm1(alpha * math.log1p(h / u)))
    return lhs <= C * h**eps * u ** (alpha - eps)


class MayoSweep(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    eps: float
    constant: float
    constant_numeric: float
    points: int
    failures: int

    @property
    def relative_gap(self) -> float:
        if self.constant == 0:
            return abs(self.constant_numeric)
        return abs(self.constant - self.constant_numeric) / self.constant

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.relative_gap <= 1e-8


def mayo_sweep(alpha: float, eps: float, points: int = 50, low: float = -3.0, high: float = 3.0) -> MayoSweep:
    """Checks the inequality on a points x points log-grid of (u, h) in [10^low, 10^high]^2."""
    constant = mayo_constant(alpha, eps)
    grid = np.logspace(low, high, points)
    failures = sum(not mayo_check(alpha, eps, constant, float(u), float(h)) for u in grid for h in grid)
    return MayoSweep(
        alpha=alpha,
        eps=eps,
        constant=constant,
        constant_numeric=mayo_constant_numeric(alpha, eps),
        points=points * points,
        failures=failures,
    )
