"""The intermediate-growth function, shifted combinations, and Taylor jets.

The phase generator is G(x) = exp((log x)^(c+1)) with 0 < c < 1/2, evaluated
through the chain log -> power -> exp so that every step carries a certified
error bound.  Derivatives are never formed symbolically: a truncated power
series (jet) of G at a point is composed from the jets of log, of the real
power, and of exp, each via the classical recurrences for series of the form
u = l^beta and e = exp(u).  The recurrences are written once and run both on
ExtReal (certified, used by public operations and identity checks) and on raw
mpfr values (fast path used by the table engine, which budgets rounding error
at the block level instead of per operation).

A shifted combination F(x) = sum_j alpha_j G(x + h_j) is described by exact
coefficient objects so residue arithmetic stays exact for rational alphas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import gmpy2
from gmpy2 import mpfr

from .precision import ExtReal, PhaseValue, PrecisionError, floor_residue, reduce_mod1
from .reals import AlgebraicReal, CoefLike, coerce_real, lazy_mul

__all__ = [
    "GrowthParams",
    "ShiftedCombination",
    "TaylorJet",
    "eval_G",
    "eval_log_pow",
    "jet_G",
    "jet_F",
    "jet_G_mpfr",
    "phase_smooth",
    "phase_floor",
]


@dataclass(frozen=True)
class GrowthParams:
    """Growth exponent c, strictly inside (0, 1/2)."""

    c: float

    def __post_init__(self):
        if not (isinstance(self.c, float) and 0.0 < self.c < 0.5):
            raise ValueError(f"growth exponent must satisfy 0 < c < 1/2, got {self.c!r}")

    @property
    def exponent(self) -> float:
        """The power applied to log x; exact as a binary float."""
        return self.c + 1.0

    def log2_G(self, x: float) -> float:
        """log2 G(x) in double precision, safe for magnitude planning."""
        if x <= 1.0:
            return 0.0
        return math.log(x) ** self.exponent / math.log(2.0)


@dataclass(frozen=True)
class ShiftedCombination:
    """F(x) = sum_j alpha_j G(x + h_j) with distinct integer shifts."""

    terms: tuple[tuple[CoefLike, int], ...]

    def __post_init__(self):
        shifts = [h for _, h in self.terms]
        if len(shifts) != len(set(shifts)):
            raise ValueError("shifts must be distinct")
        if not self.terms:
            raise ValueError("a combination needs at least one term")
        if all(getattr(a, "is_zero", False) for a, _ in self.terms):
            raise ValueError("all coefficients vanish")

    @staticmethod
    def make(alphas: Sequence, shifts: Sequence[int]) -> "ShiftedCombination":
        if len(alphas) != len(shifts):
            raise ValueError("alphas and shifts must have equal length")
        return ShiftedCombination(
            tuple((coerce_real(a), int(h)) for a, h in zip(alphas, shifts))
        )

    @property
    def shifts(self) -> tuple[int, ...]:
        return tuple(h for _, h in self.terms)

    @property
    def min_shift(self) -> int:
        return min(self.shifts)

    @property
    def max_shift(self) -> int:
        return max(self.shifts)

    @property
    def max_abs_shift(self) -> int:
        """The window radius a = max |h_j|."""
        return max(abs(h) for h in self.shifts)

    @property
    def n_start(self) -> int:
        """First index n with every n + h_j >= 1."""
        return max(1, 1 - self.min_shift)

    def coeff_sum(self) -> AlgebraicReal:
        acc = AlgebraicReal(Fraction(0))
        for a, _ in self.terms:
            if isinstance(a, AlgebraicReal):
                acc = acc + a
            else:
                raise TypeError("coefficient sum needs algebraic coefficients")
        return acc

    def coeff_l1(self, bits: int = 64) -> float:
        """C = sum |alpha_j| as a float upper bound."""
        tot = 0.0
        for a, _ in self.terms:
            v, _err = a.to_mpfr(bits)
            tot += abs(float(v))
        return tot

    def scaled(self, factor) -> "ShiftedCombination":
        """Combination with every coefficient multiplied by an exact rational factor."""
        factor = coerce_real(factor)
        if not isinstance(factor, AlgebraicReal) or not factor.is_rational:
            raise TypeError("scaled() needs an exact rational factor")
        q = factor.as_fraction()
        return ShiftedCombination(
            tuple(
                (a.scale(q) if isinstance(a, AlgebraicReal) else lazy_mul(coerce_real(q), a), h)
                for a, h in self.terms
            )
        )


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------


def eval_log_pow(params: GrowthParams, x, bits: int) -> ExtReal:
    """(log x)^(c+1) as a certified value, for x >= 1."""
    X = x if isinstance(x, ExtReal) else ExtReal.exact(x, bits)
    if X.value < 1:
        raise ValueError("growth function is defined for x >= 1")
    if X.value == 1:
        return ExtReal.exact(0, bits)
    return X.log() ** params.exponent


def eval_G(params: GrowthParams, x, bits: int) -> ExtReal:
    """G(x) = exp((log x)^(c+1)), certified."""
    return eval_log_pow(params, x, bits).exp()


# ---------------------------------------------------------------------------
# jets: truncated power series through log -> power -> exp
# ---------------------------------------------------------------------------


def _log_jet(x0, order: int, one):
    """Series of log(x0 + t) about t=0: [log x0, 1/x0, -1/(2 x0^2), ...]."""
    if isinstance(x0, ExtReal):
        out = [x0.log()]
    else:
        out = [gmpy2.log(x0)]
    inv = one / x0
    power = inv
    for k in range(1, order + 1):
        term = power / k
        out.append(term if k % 2 == 1 else -term)
        power = power * inv
    return out


def _pow_jet(l, beta, order: int):
    """Series of l(t)^beta given the series l; classical u' l = beta u l'."""
    if isinstance(l[0], ExtReal):
        out = [l[0] ** beta]
    else:
        out = [l[0] ** mpfr(beta)]
    for k in range(1, order + 1):
        acc = None
        for j in range(1, k + 1):
            # j*(beta+1) - k, kept exact: beta is a binary float and the
            # naive beta + 1.0 rounds, which would skew every derivative
            scale = Fraction(j) * Fraction(beta) + (j - k)
            if scale == 0:
                continue
            term = l[j] * out[k - j] * scale
            acc = term if acc is None else acc + term
        if acc is None:
            acc = l[0] - l[0]  # exact zero of the right type
        out.append(acc / (l[0] * k))
    return out


def _exp_jet(u, order: int):
    """Series of exp(u(t)) given the series u."""
    if isinstance(u[0], ExtReal):
        out = [u[0].exp()]
    else:
        out = [gmpy2.exp(u[0])]
    for k in range(1, order + 1):
        acc = None
        for j in range(1, k + 1):
            term = u[j] * out[k - j] * j
            acc = term if acc is None else acc + term
        out.append(acc / k)
    return out


def jet_G(params: GrowthParams, x0, order: int, bits: int) -> list[ExtReal]:
    """Certified jet of G at x0: coefficients G^(k)(x0)/k!, k = 0..order."""
    X = x0 if isinstance(x0, ExtReal) else ExtReal.exact(x0, bits)
    if X.value <= 1:
        raise ValueError("jets need x0 > 1")
    one = ExtReal.exact(1, bits)
    l = _log_jet(X, order, one)
    u = _pow_jet(l, params.exponent, order)
    return _exp_jet(u, order)


def jet_G_mpfr(params: GrowthParams, x0: mpfr, order: int, bits: int) -> list[mpfr]:
    """Raw-mpfr jet of G at x0, computed under a `bits` context.

    No per-op accounting; callers own the error budget (the table engine
    inflates `bits` so that the whole recurrence stays far below its target).
    """
    with gmpy2.context(precision=bits):
        one = mpfr(1)
        l = _log_jet(mpfr(x0), order, one)
        u = _pow_jet(l, params.exponent, order)
        return _exp_jet(u, order)


@dataclass(frozen=True)
class TaylorJet:
    """Coefficients F^(k)(x0)/k! with certified error bounds."""

    x0: float
    order: int
    coeffs: tuple[ExtReal, ...]

    def derivative(self, s: int) -> ExtReal:
        """F^(s)(x0) = s! * coeffs[s]."""
        if not 0 <= s <= self.order:
            raise ValueError(f"derivative order {s} outside jet order {self.order}")
        return self.coeffs[s] * math.factorial(s)


def jet_F(
    params: GrowthParams, comb: ShiftedCombination, x0, order: int, bits: int
) -> TaylorJet:
    """Certified jet of F(x) = sum_j alpha_j G(x + h_j) at x0."""
    acc: list[ExtReal | None] = [None] * (order + 1)
    X = x0 if isinstance(x0, ExtReal) else ExtReal.exact(x0, bits)
    for a, h in comb.terms:
        coef = ExtReal.from_coef(a, bits)
        g = jet_G(params, X + h, order, bits)
        for k in range(order + 1):
            term = coef * g[k]
            acc[k] = term if acc[k] is None else acc[k] + term
    return TaylorJet(float(X.value), order, tuple(acc))  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# pointwise phases
# ---------------------------------------------------------------------------


def phase_smooth(
    params: GrowthParams, comb: ShiftedCombination, n: int, bits: int
) -> PhaseValue:
    """frac(F(n)) certified; n must satisfy n + h_j >= 1 for every shift."""
    if n + comb.min_shift < 1:
        raise ValueError(f"n={n} puts {n + comb.min_shift} below the domain")
    acc: ExtReal | None = None
    for a, h in comb.terms:
        coef = ExtReal.from_coef(a, bits)
        term = coef * eval_G(params, n + h, bits)
        acc = term if acc is None else acc + term
    return reduce_mod1(acc)


def phase_floor(
    params: GrowthParams,
    terms: Sequence[tuple[CoefLike, int, bool]],
    n: int,
    bits: int,
) -> PhaseValue:
    """frac(sum_j lambda_j * floor(G(n + h_j))).

    Each term is (lambda, shift, rational_flag).  Rational lambdas p/q are
    handled exactly through floor residues mod q; the rest go through the
    certified floor.  The two groups are combined at full precision.
    """
    rational_part = Fraction(0)
    irr_acc: ExtReal | None = None
    for lam, h, is_rational in terms:
        if n + h < 1:
            raise ValueError(f"n={n} puts {n + h} below the domain")
        g = eval_G(params, n + h, bits)
        if is_rational:
            if not isinstance(lam, AlgebraicReal) or not lam.is_rational:
                raise TypeError("rational-tagged term with non-rational multiplier")
            pq = lam.as_fraction()
            _, res = floor_residue(g, pq.denominator)
            rational_part += Fraction(pq.numerator * res, pq.denominator)
        else:
            fl = g.floor_certified()
            coef = ExtReal.from_coef(coerce_real(lam), bits)
            term = coef * ExtReal.exact(fl, bits)
            irr_acc = term if irr_acc is None else irr_acc + term
    rational_part -= math.floor(rational_part)
    if irr_acc is None:
        frac_val = ExtReal.exact(rational_part, bits)
    else:
        frac_val = irr_acc + ExtReal.exact(rational_part, bits)
    return reduce_mod1(frac_val)
