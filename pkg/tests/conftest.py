"""Shared oracles for the test suite.

Everything here is computed with mpmath at 512 bits, straight from the
defining formulas, with none of the package's planning or error tracking.
Agreement between these sums and the production engine is the core check:
two independent code paths landing on the same digits.
"""

import json
import math
import pathlib
from fractions import Fraction

import mpmath
import pytest

from intergrow.growth import GrowthParams, ShiftedCombination
from intergrow.reals import AlgebraicReal, LazyReal

ORACLE_BITS = 512

GOLDEN_DIR = pathlib.Path(__file__).parent / "golden"


def load_golden(name: str) -> dict:
    path = GOLDEN_DIR / f"{name}.json"
    if not path.exists():
        pytest.skip(f"golden fixture {name}.json missing; run scripts/run_pilots.py")
    with open(path) as fh:
        return json.load(fh)


def mp_coef(coef):
    """Exact coefficient -> mpmath value, built from its defining fields."""
    if isinstance(coef, AlgebraicReal):
        acc = mpmath.mpf(coef.rational.numerator) / coef.rational.denominator
        for rad, mult in coef.radicals:
            acc += mpmath.sqrt(rad) * mpmath.mpf(mult.numerator) / mult.denominator
        return acc
    if isinstance(coef, LazyReal):
        raise TypeError("oracle needs a closed-form coefficient")
    if isinstance(coef, Fraction):
        return mpmath.mpf(coef.numerator) / coef.denominator
    return mpmath.mpf(coef)


def mp_G(params: GrowthParams, x):
    """exp(log(x)^(c+1)); the exponent is taken as the same binary float the
    package uses, so both sides evaluate the identical mathematical function."""
    return mpmath.exp(mpmath.log(x) ** mpmath.mpf(params.exponent))


def e_of(theta):
    """e(theta) = exp(2 pi i theta), argument reduced before the call."""
    return mpmath.expjpi(2 * mpmath.frac(theta))


def _poly_at(poly, n):
    acc = mpmath.mpf(0)
    for j, coef in enumerate(poly):
        acc += mp_coef(coef) * mpmath.mpf(n) ** j
    return acc


def oracle_smooth_sum(params: GrowthParams, comb: ShiftedCombination, N: int, poly=()):
    """Direct sum of e(sum_j alpha_j G(n+h_j) + poly(n)) at 512 bits."""
    with mpmath.workprec(ORACLE_BITS):
        coefs = [(mp_coef(a), h) for a, h in comb.terms]
        n0 = comb.n_start
        total = mpmath.mpc(0)
        for n in range(n0, N + 1):
            theta = mpmath.mpf(0)
            for a, h in coefs:
                theta += a * mp_G(params, n + h)
            if poly:
                theta += _poly_at(poly, n)
            total += e_of(theta)
        return complex(total)


def oracle_floor_sum(params: GrowthParams, comb: ShiftedCombination, N: int, poly=()):
    """Direct sum of e(sum_j alpha_j floor(G(n+h_j)) + poly(n)) at 512 bits."""
    with mpmath.workprec(ORACLE_BITS):
        coefs = [(mp_coef(a), h) for a, h in comb.terms]
        n0 = comb.n_start
        total = mpmath.mpc(0)
        for n in range(n0, N + 1):
            theta = mpmath.mpf(0)
            for a, h in coefs:
                theta += a * mpmath.floor(mp_G(params, n + h))
            if poly:
                theta += _poly_at(poly, n)
            total += e_of(theta)
        return complex(total)


def oracle_floor_values(params: GrowthParams, h: int, lo: int, hi: int):
    """floor(G(n+h)) for n in [lo, hi) as exact ints, 512-bit evaluation."""
    with mpmath.workprec(ORACLE_BITS):
        return [int(mpmath.floor(mp_G(params, n + h))) for n in range(lo, hi)]


def oracle_jet(params: GrowthParams, x0, order: int):
    """Taylor coefficients G^(k)(x0)/k! via mpmath.taylor at 512 bits."""
    with mpmath.workprec(ORACLE_BITS):
        beta = mpmath.mpf(params.exponent)

        def g(t):
            return mpmath.exp(mpmath.log(t) ** beta)

        return [complex(v).real for v in mpmath.taylor(g, mpmath.mpf(x0), order)]


def richardson_derivative(params: GrowthParams, comb: ShiftedCombination, x0, s: int):
    """F^(s)(x0) by central differences with Richardson extrapolation.

    Runs at 512 bits so the subtractive cancellation (catastrophic for
    float64 at these magnitudes) stays far below the 1e-6 relative target.
    """
    with mpmath.workprec(ORACLE_BITS):
        coefs = [(mp_coef(a), h) for a, h in comb.terms]

        def F(t):
            acc = mpmath.mpf(0)
            for a, h in coefs:
                acc += a * mp_G(params, t + h)
            return acc

        x = mpmath.mpf(x0)
        h0 = x / 64
        levels = 8
        tableau = []
        for i in range(levels):
            h = h0 / 2**i
            if s == 0:
                val = F(x)
            else:
                val = mpmath.mpf(0)
                for j in range(s + 1):
                    val += (-1) ** j * mpmath.binomial(s, j) * F(x + (s / mpmath.mpf(2) - j) * h)
                val /= h**s
            row = [val]
            for k in range(1, i + 1):
                row.append(row[k - 1] + (row[k - 1] - tableau[i - 1][k - 1]) / (4**k - 1))
            tableau.append(row)
        return float(tableau[-1][-1])
