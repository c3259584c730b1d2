import math

import pytest

from fracmart.bounds import (
    MAYO_SWEEP_PAIRS,
    C_beta_betaprime,
    bound_classical,
    bound_fixed_time,
    bound_value,
    c1_constant,
    c_t,
    fixed_time_level,
    kappa_case_i,
    kappa_eps,
    mayo_check,
    mayo_constant,
    mayo_constant_numeric,
    mayo_sweep,
)
from fracmart.data_models import BoundSpec, ConstraintViolation


def test_c_t():
    assert c_t(1.0) == pytest.approx(2.0 + math.sqrt(2.0))
    assert c_t(0.0) == 2.0


def test_kappa_case_i():
    assert kappa_case_i(4.0, 6.0) ** 2 == pytest.approx(4.0 * math.pi * 12.0**3)
    assert kappa_case_i(4.0, 6.0) ** 2 == pytest.approx(21714.69, rel=1e-6)
    with pytest.raises(ConstraintViolation, match="beta' > beta"):
        kappa_case_i(4.0, 3.0)


def test_kappa_eps():
    assert kappa_eps(0.25) == pytest.approx(math.sqrt(math.pi / 2.0) * 8.0)
    with pytest.raises(ConstraintViolation):
        kappa_eps(0.0)


def test_c1_and_holder_constant():
    assert c1_constant(4.0, 6.0) == pytest.approx(9.43e3, rel=1e-3)
    assert C_beta_betaprime(4.0, 6.0) == pytest.approx(8.0)
    with pytest.raises(ConstraintViolation, match="beta > 2"):
        c1_constant(2.0, 6.0)


def test_case_iii_example():
    value = bound_value(BoundSpec(case="iii", alpha=0.0, eps=0.25, L=1.0, t=1.0, c_inf=1.0))
    kappa = kappa_eps(0.25)
    assert value.threshold == pytest.approx(64.0 * kappa)
    assert value.threshold == pytest.approx(641.7, rel=1e-3)
    assert value.probability_bound == pytest.approx((2.0 + math.sqrt(2.0)) * math.exp(-(kappa**2)))
    assert value.capped == value.probability_bound


def test_case_i_threshold_scales_with_nu():
    spec = BoundSpec(case="i", alpha=-0.25, beta_prime=6.0, L=2.0, t=4.0, nu_t=1.0)
    one = bound_value(spec)
    four = bound_value(spec.model_copy(update={"nu_t": 4.0}))
    assert four.threshold == pytest.approx(2.0 * one.threshold)
    assert four.probability_bound == one.probability_bound
    assert one.constants["c1"] == pytest.approx(c1_constant(4.0, 6.0))


def test_case_ii_decreases_in_L():
    spec = BoundSpec(case="ii", alpha=0.25, eps=0.125, L=1.0, t=4.0)
    assert bound_value(spec.model_copy(update={"L": 2.0})).probability_bound < bound_value(spec).probability_bound


@pytest.mark.parametrize(
    "spec, constraint",
    [
        (BoundSpec(case="ii", alpha=0.2, eps=0.3), "0 < eps < alpha"),
        (BoundSpec(case="i", alpha=0.1, beta_prime=6.0), "alpha < 0"),
        (BoundSpec(case="i", alpha=-0.25), "beta' set"),
        (BoundSpec(case="i", alpha=-0.25, beta_prime=3.0), "beta' > beta"),
        (BoundSpec(case="iii", alpha=0.0, eps=0.25, c_inf=1.0, L=0.5), "L >= 1"),
        (BoundSpec(case="iii", alpha=0.0, eps=0.25), "c_inf set"),
        (BoundSpec(case="iii", alpha=0.0, eps=0.6, c_inf=1.0), "0 < eps < 1/2 + alpha"),
        (BoundSpec(case="iii", alpha=0.0, eps=0.25, c_inf=1.0, nu_t=-1.0), "nu_t >= 0"),
    ],
)
def test_bound_constraints(spec, constraint):
    with pytest.raises(ConstraintViolation) as info:
        bound_value(spec)
    assert info.value.constraint == constraint


def test_fixed_time_bound_inverse():
    u = math.sqrt(4.0 * math.log(20.0))
    assert bound_fixed_time(-0.25, u, 1.0, 1.0) == pytest.approx(0.1)
    assert fixed_time_level(-0.25, 0.1, 1.0, 1.0) == pytest.approx(u)
    assert bound_fixed_time(-0.25, 1e-9, 1.0, 1.0) == pytest.approx(2.0)
    assert bound_fixed_time(-0.25, 1.0, 1.0, 0.0) == 0.0


def test_fixed_time_remark_is_wider():
    intro = bound_fixed_time(-0.25, 3.0, 1.0, 1.0)
    remark = bound_fixed_time(-0.25, 3.0, 1.0, 1.0, variant="remark", beta_prime=6.0)
    assert remark == pytest.approx(2.0 * math.exp(-9.0 / (4.0 * 8.0)))
    assert remark > intro


def test_fixed_time_requires_negative_alpha():
    with pytest.raises(ConstraintViolation, match="alpha < 0"):
        bound_fixed_time(0.25, 1.0, 1.0, 1.0)
    with pytest.raises(ConstraintViolation, match="beta' set"):
        bound_fixed_time(-0.25, 1.0, 1.0, 1.0, variant="remark")


def test_classical_bound():
    assert bound_classical(2.0, 1.0, 1.0) == pytest.approx(2.0 * math.exp(-2.0))
    with pytest.raises(ConstraintViolation):
        bound_classical(0.0, 1.0, 1.0)


def test_mayo_constant_example():
    assert mayo_constant(0.4, 0.7) == pytest.approx(0.37700, abs=1e-5)
    assert mayo_constant(0.0, 0.3) == 0.0


@pytest.mark.parametrize("alpha, eps", MAYO_SWEEP_PAIRS)
def test_mayo_closed_form_matches_numeric(alpha, eps):
    closed = mayo_constant(alpha, eps)
    assert mayo_constant_numeric(alpha, eps) == pytest.approx(closed, rel=1e-8)


@pytest.mark.parametrize("alpha, eps", MAYO_SWEEP_PAIRS)
def test_mayo_sweep_passes(alpha, eps):
    sweep = mayo_sweep(alpha, eps, points=20)
    assert sweep.points == 400
    assert sweep.failures == 0
    assert sweep.passed


def test_mayo_check_rejects_small_constant():
    assert not mayo_check(0.4, 0.7, 0.01, 1.0, 1.0)


def test_mayo_domain():
    with pytest.raises(ConstraintViolation, match="eps > alpha"):
        mayo_constant(0.4, 0.3)
    with pytest.raises(ConstraintViolation, match="eps < 1"):
        mayo_constant(0.1, 1.0)
