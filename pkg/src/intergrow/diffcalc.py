"""Finite-difference representation of shifted combinations.

With Delta H(x) = H(x+1) - H(x) and binomial expansion
G(x + k) = (I + Delta)^k G(x), any combination
F(x) = sum_j alpha_j G(x + h_j) can be rewritten over the base point
x + min_h (shifts normalized to k_j = h_j - min_h >= 0) as

    F(x) = p(Delta) G(x + min_h),     p(D) = sum_j alpha_j (1 + D)^{k_j}.

The expansion is exact binomial arithmetic; no linear solve is needed since
(1 + D)^k is unitriangular in the power basis.  The leading index
tau = min{ i : d_i != 0 } and its coefficient d_tau drive every lower bound
downstream, so both are first-class fields.  The same identity holds for all
derivatives: F^(s)(x) = sum_i d_i Delta^i G^(s)(x + min_h), which
verify_identity checks numerically at high precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .growth import GrowthParams, ShiftedCombination, jet_F, jet_G
from .precision import ExtReal
from .reals import AlgebraicReal

__all__ = [
    "DiffPoly",
    "change_of_basis",
    "apply_delta",
    "verify_identity",
]

# relative tolerance below which a numerically computed coefficient is
# declared zero (irrational coefficients only; rational input is exact)
ZERO_REL_TOL = 2.0 ** -80
NUMERIC_BITS = 192


@dataclass(frozen=True)
class DiffPoly:
    """p(Delta) = sum_i coeffs[i] Delta^i over the base point x + min_shift."""

    coeffs: tuple
    exact: bool
    tau: int
    d_tau: object
    shift_offset: int  # normalization subtracted from every shift (= min shift)
    coeff_sum: object
    sign_flipped: bool
    zeroed: tuple[int, ...] = ()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __str__(self) -> str:
        parts = []
        for i, d in enumerate(self.coeffs):
            if d == 0:
                continue
            parts.append(f"{d}*D^{i}" if i else f"{d}")
        return " + ".join(parts) if parts else "0"


def change_of_basis(comb: ShiftedCombination) -> DiffPoly:
    """Expand sum_j alpha_j G(x + h_j) = sum_i d_i Delta^i G(x + min_h).

    Exact over the rationals whenever every coefficient is rational.  For
    numeric coefficients, entries with |d_i| below 2^-80 of the largest are
    zeroed with a warning (they would otherwise poison tau).
    """
    min_h = comb.min_shift
    norm = [(a, h - min_h) for a, h in comb.terms]
    deg = max(k for _, k in norm)
    all_rational = all(
        isinstance(a, AlgebraicReal) and a.is_rational for a, _ in norm
    )

    if all_rational:
        coeffs = [Fraction(0)] * (deg + 1)
        for a, k in norm:
            q = a.as_fraction()
            for i in range(k + 1):
                coeffs[i] += q * math.comb(k, i)
        zeroed: tuple[int, ...] = ()
        exact = True
    else:
        vals = []
        for a, k in norm:
            v, _err = a.to_mpfr(NUMERIC_BITS)
            vals.append((float(v), k))
        num = [0.0] * (deg + 1)
        for v, k in vals:
            for i in range(k + 1):
                num[i] += v * math.comb(k, i)
        top = max(abs(d) for d in num)
        zlist = []
        for i, d in enumerate(num):
            if d != 0.0 and abs(d) < ZERO_REL_TOL * top:
                num[i] = 0.0
                zlist.append(i)
        if zlist:
            warnings.warn(
                f"difference coefficients {zlist} below relative tolerance "
                f"{ZERO_REL_TOL:.2g}; treated as exact zeros",
                stacklevel=2,
            )
        coeffs = num
        zeroed = tuple(zlist)
        exact = False

    nonzero = [i for i, d in enumerate(coeffs) if d != 0]
    if not nonzero:
        raise ValueError("combination reduced to the zero polynomial")
    tau = nonzero[0]
    d_tau = coeffs[tau]
    return DiffPoly(
        coeffs=tuple(coeffs),
        exact=exact,
        tau=tau,
        d_tau=d_tau,
        shift_offset=-min_h,
        coeff_sum=coeffs[0],
        sign_flipped=d_tau < 0,
        zeroed=zeroed,
    )


def roundtrip_combination(poly: DiffPoly) -> dict[int, Fraction]:
    """Re-expand sum_i d_i Delta^i in the shift basis (exact polys only).

    Returns {normalized shift: coefficient}; inverse of change_of_basis up to
    the shift normalization, used as a self-check.
    """
    if not poly.exact:
        raise ValueError("round trip is defined for exact polynomials")
    out: dict[int, Fraction] = {}
    for i, d in enumerate(poly.coeffs):
        if d == 0:
            continue
        for j in range(i + 1):
            shift = i - j
            out[shift] = out.get(shift, Fraction(0)) + d * ((-1) ** j) * math.comb(i, j)
    return {k: v for k, v in out.items() if v != 0}


def apply_delta(fn: Callable, k: int, x):
    """k-th forward difference: sum_j (-1)^j C(k,j) fn(x + k - j)."""
    if k < 0:
        raise ValueError("difference order must be >= 0")
    acc = None
    for j in range(k + 1):
        term = fn(x + (k - j)) * math.comb(k, j)
        if j % 2 == 1:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def verify_identity(
    params: GrowthParams,
    comb: ShiftedCombination,
    x: int,
    s_max: int = 8,
    bits: int = NUMERIC_BITS,
) -> float:
    """Max over s <= s_max of the relative residual of the derivative identity.

    Compares F^(s)(x) against sum_i d_i Delta^i G^(s)(base) with
    base = x + min shift, everything in certified arithmetic.
    """
    if x + comb.min_shift <= 1:
        raise ValueError("base point must stay above 1")
    poly = change_of_basis(comb)
    base = x + comb.min_shift

    jf = jet_F(params, comb, x, s_max, bits)
    # G jets at base + 0 .. base + degree, reused across all s
    gjets = [jet_G(params, base + j, s_max, bits) for j in range(poly.degree + 1)]

    worst = 0.0
    for s in range(s_max + 1):
        fact = math.factorial(s)
        lhs = jf.coeffs[s] * fact

        def g_s(idx: int, _s=s, _f=fact) -> ExtReal:
            return gjets[idx][_s] * _f

        rhs: ExtReal | None = None
        for i, d in enumerate(poly.coeffs):
            if d == 0:
                continue
            di = apply_delta(g_s, i, 0)
            term = di * (d if isinstance(d, Fraction) else Fraction(d))
            rhs = term if rhs is None else rhs + term
        resid = abs(lhs - rhs)
        denom = abs(lhs)
        if float(denom.value) == 0.0:
            rel = float(resid.value)
        else:
            rel = float((resid / denom).value)
        worst = max(worst, rel)
    return worst
