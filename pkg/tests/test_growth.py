"""Growth function evaluation, combinations, and certified jets."""

import math
import random
from fractions import Fraction

import mpmath
import pytest

from intergrow.growth import (
    GrowthParams,
    ShiftedCombination,
    eval_G,
    eval_log_pow,
    jet_F,
    jet_G,
    jet_G_mpfr,
    phase_floor,
    phase_smooth,
)
from intergrow.precision import ExtReal
from intergrow.reals import AlgebraicReal

from conftest import mp_G, oracle_jet

C_GRID = [0.1, 0.3, 0.49]


@pytest.mark.parametrize("bad", [0.0, 0.5, -0.1, 0.75, 1])
def test_params_reject_out_of_range(bad):
    with pytest.raises(ValueError):
        GrowthParams(bad)


def test_exponent_is_exact_float_shift():
    p = GrowthParams(0.3)
    assert p.exponent == 0.3 + 1.0


@pytest.mark.parametrize("c", C_GRID)
def test_eval_G_matches_oracle(c):
    params = GrowthParams(c)
    with mpmath.workprec(512):
        for x in [2, 10, 97, 10**4, 10**7]:
            got = eval_G(params, x, 192)
            want = mp_G(params, x)
            rel = abs(float(got) - float(want)) / float(want)
            assert rel < 1e-15


def test_eval_G_error_bound_covers_truth():
    params = GrowthParams(0.3)
    with mpmath.workprec(512):
        for x in [3, 1000, 10**6]:
            got = eval_G(params, x, 128)
            want = mp_G(params, x)
            true_err = abs(mpmath.mpf(float(got)) - want)
            # err_ulps is relative to the value's own binade
            exp2 = math.frexp(float(got))[1]
            bound = got.err_ulps * 2.0 ** (exp2 - 128)
            # float64 rounding of `got` adds at most half an ulp at 53 bits
            slack = abs(float(got)) * 2.0**-53
            assert float(true_err) <= bound + slack


def test_eval_log_pow_domain():
    params = GrowthParams(0.2)
    assert float(eval_log_pow(params, 1, 64)) == 0.0
    with pytest.raises(ValueError):
        eval_log_pow(params, 0.5, 64)


def test_G_at_one_is_one():
    params = GrowthParams(0.25)
    assert float(eval_G(params, 1, 64)) == 1.0


def test_combination_make_and_views():
    comb = ShiftedCombination.make([1, -2, 1], [2, 1, 0])
    assert comb.shifts == (2, 1, 0)
    assert comb.min_shift == 0
    assert comb.max_shift == 2
    assert comb.max_abs_shift == 2
    assert comb.n_start == 1
    assert comb.coeff_sum().is_zero
    assert comb.coeff_l1() == pytest.approx(4.0)


def test_combination_negative_shift_moves_start():
    comb = ShiftedCombination.make([1, -1], [0, -3])
    assert comb.n_start == 4


def test_combination_rejects_all_zero():
    with pytest.raises(ValueError):
        ShiftedCombination.make([0, 0], [1, 0])


def test_combination_scaled():
    comb = ShiftedCombination.make([1, -1], [1, 0])
    doubled = comb.scaled(2)
    assert [a.as_fraction() for a, _ in doubled.terms] == [
        Fraction(2),
        Fraction(-2),
    ]
    irr = ShiftedCombination.make([AlgebraicReal.sqrt(2)], [0]).scaled(Fraction(1, 2))
    assert irr.terms[0][0] == AlgebraicReal.sqrt(2, mult=Fraction(1, 2))
    with pytest.raises(TypeError):
        comb.scaled(AlgebraicReal.sqrt(3))


@pytest.mark.parametrize("c", C_GRID)
def test_jet_G_matches_mpmath_taylor(c):
    params = GrowthParams(c)
    for x0 in [50, 10**3]:
        want = oracle_jet(params, x0, 6)
        got = jet_G(params, x0, 6, 256)
        for k in range(7):
            assert abs(float(got[k]) - want[k]) <= 1e-9 * abs(want[k])


def test_jet_G_error_bounds_cover_truth():
    params = GrowthParams(0.3)
    x0 = 997
    want = oracle_jet(params, x0, 5)
    got = jet_G(params, x0, 5, 128)
    for k in range(6):
        coeff = got[k]
        exp2 = math.frexp(float(coeff))[1]
        bound = coeff.err_ulps * 2.0 ** (exp2 - 128)
        slack = abs(float(coeff)) * 2.0**-52
        assert abs(float(coeff) - want[k]) <= bound + slack


def test_jet_G_mpfr_agrees_with_certified_jet():
    params = GrowthParams(0.3)
    a = jet_G(params, 777, 8, 192)
    b = jet_G_mpfr(params, 777, 8, 320)
    for k in range(9):
        assert abs(float(a[k]) - float(b[k])) <= 1e-13 * abs(float(b[k]))


def test_jet_F_is_linear_in_the_combination():
    params = GrowthParams(0.3)
    comb = ShiftedCombination.make([1, -2, 1], [2, 1, 0])
    x0 = 500
    jet = jet_F(params, comb, x0, 4, 192)
    parts = [jet_G(params, x0 + h, 4, 192) for _, h in comb.terms]
    coefs = [a.as_fraction() for a, _ in comb.terms]
    for k in range(5):
        direct = sum(float(p[k]) * float(q) for p, q in zip(parts, coefs))
        # the float64 recombination cancels ~G(x0) down to ~G''(x0)
        assert float(jet.coeffs[k]) == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_taylorjet_derivative_scales_by_factorial():
    params = GrowthParams(0.2)
    jet = jet_F(params, ShiftedCombination.make([1], [0]), 100, 4, 128)
    for s in range(5):
        assert float(jet.derivative(s)) == pytest.approx(
            float(jet.coeffs[s]) * math.factorial(s), rel=1e-25
        )
    with pytest.raises(ValueError):
        jet.derivative(5)


def test_phase_smooth_matches_oracle():
    params = GrowthParams(0.3)
    comb = ShiftedCombination.make([1, -1], [1, 0])
    with mpmath.workprec(512):
        for n in [1, 17, 4096]:
            p = phase_smooth(params, comb, n, 192)
            want = mpmath.frac(mp_G(params, n + 1) - mp_G(params, n))
            assert p.trusted
            assert abs(p.as_float() - float(want)) < 1e-12


def test_phase_smooth_domain_guard():
    params = GrowthParams(0.3)
    comb = ShiftedCombination.make([1, -1], [0, -2])
    with pytest.raises(ValueError):
        phase_smooth(params, comb, 2, 128)


def test_phase_floor_rational_matches_direct():
    params = GrowthParams(0.3)
    alpha = AlgebraicReal(Fraction(1, 2))
    with mpmath.workprec(512):
        for n in [1, 9, 1000]:
            p = phase_floor(params, [(alpha, 0, True)], n, 192)
            fl = int(mpmath.floor(mp_G(params, n)))
            assert p.trusted
            assert p.as_float() == pytest.approx((fl % 2) / 2, abs=1e-12)


def test_phase_floor_irrational_matches_direct():
    params = GrowthParams(0.3)
    alpha = AlgebraicReal.sqrt(2, offset=-1)
    with mpmath.workprec(512):
        for n in [1, 9, 1000]:
            p = phase_floor(params, [(alpha, 0, False)], n, 192)
            fl = int(mpmath.floor(mp_G(params, n)))
            want = float(mpmath.frac((mpmath.sqrt(2) - 1) * fl))
            assert p.trusted
            assert abs(p.as_float() - want) < 1e-12


def test_phase_floor_rational_tag_mismatch_raises():
    params = GrowthParams(0.3)
    with pytest.raises(TypeError):
        phase_floor(params, [(AlgebraicReal.sqrt(2), 0, True)], 5, 128)


def test_random_combinations_against_oracle():
    """Property sweep: random small combinations, eval and first derivative."""
    rng = random.Random(4242)
    with mpmath.workprec(512):
        for _ in range(10):
            c = rng.choice(C_GRID)
            params = GrowthParams(c)
            r = rng.randrange(1, 4)
            alphas = [rng.randrange(-3, 4) or 1 for _ in range(r)]
            shifts = rng.sample(range(0, 6), r)
            comb = ShiftedCombination.make(alphas, shifts)
            x0 = rng.choice([30, 300, 3000])
            jet = jet_F(params, comb, x0, 2, 256)
            want = sum(
                a * mp_G(params, x0 + h) for a, h in zip(alphas, shifts)
            )
            assert abs(float(jet.coeffs[0]) - float(want)) <= 1e-12 * max(
                1.0, abs(float(want))
            )
