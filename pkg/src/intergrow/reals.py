"""Exact coefficient values for phase combinations.

Coefficients, floor multipliers and rotation entries need two things floats
cannot give: exact rational arithmetic (residue phases live in (1/q)Z) and a
faithful value at whatever working precision a run selects.  A small tower of
the form  rational + sum_d rational*sqrt(d)  covers every value used in the
experiments (1, -2, 7/17, sqrt2-1, ...), keeps integrality tests exact, and
converts to mpfr at any precision on demand.

Values that are only defined numerically (for example scan endpoints computed
from the growth function itself) are wrapped as LazyReal, which produces an
mpfr for a requested precision together with an ulp bound.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import gmpy2
from gmpy2 import mpfr

__all__ = [
    "AlgebraicReal",
    "LazyReal",
    "CoefLike",
    "coerce_real",
    "parse_real",
]


def _square_free_split(n: int) -> tuple[int, int]:
    """Return (outside, radicand) with n = outside^2 * radicand, radicand square-free."""
    if n <= 0:
        raise ValueError("radicand must be positive")
    outside = 1
    rad = n
    f = 2
    while f * f <= rad:
        while rad % (f * f) == 0:
            rad //= f * f
            outside *= f
        f += 1
    return outside, rad


@dataclass(frozen=True)
class AlgebraicReal:
    """rational + sum of coef*sqrt(radicand) with square-free radicands >= 2."""

    rational: Fraction
    radicals: tuple[tuple[int, Fraction], ...] = ()

    # ---- constructors -------------------------------------------------

    @staticmethod
    def from_rational(q) -> "AlgebraicReal":
        return AlgebraicReal(Fraction(q))

    @staticmethod
    def sqrt(n: int, mult=1, offset=0) -> "AlgebraicReal":
        mult = Fraction(mult)
        outside, rad = _square_free_split(n)
        mult *= outside
        if rad == 1:
            return AlgebraicReal(Fraction(offset) + mult)
        return AlgebraicReal(Fraction(offset), ((rad, mult),))

    # ---- algebra (closed under the ops we need) ------------------------

    def _norm(self, rads: dict[int, Fraction]) -> "AlgebraicReal":
        items = tuple(sorted((d, c) for d, c in rads.items() if c != 0))
        return AlgebraicReal(self.rational, items)

    def __add__(self, other: "AlgebraicReal") -> "AlgebraicReal":
        rads = dict(self.radicals)
        for d, c in other.radicals:
            rads[d] = rads.get(d, Fraction(0)) + c
        items = tuple(sorted((d, c) for d, c in rads.items() if c != 0))
        return AlgebraicReal(self.rational + other.rational, items)

    def __neg__(self) -> "AlgebraicReal":
        return AlgebraicReal(-self.rational, tuple((d, -c) for d, c in self.radicals))

    def __sub__(self, other: "AlgebraicReal") -> "AlgebraicReal":
        return self + (-other)

    def scale(self, q) -> "AlgebraicReal":
        q = Fraction(q)
        if q == 0:
            return AlgebraicReal(Fraction(0))
        return AlgebraicReal(
            self.rational * q, tuple((d, c * q) for d, c in self.radicals)
        )

    # ---- predicates ----------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return not self.radicals

    @property
    def is_zero(self) -> bool:
        return self.rational == 0 and not self.radicals

    @property
    def is_integer(self) -> bool:
        return self.is_rational and self.rational.denominator == 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.rational

    # ---- numeric conversion ---------------------------------------------

    def to_mpfr(self, bits: int) -> tuple[mpfr, float]:
        """Value rounded to `bits`; returns (value, error bound in ulps)."""
        with gmpy2.context(precision=bits + 32):
            acc = mpfr(self.rational.numerator) / self.rational.denominator
            for d, c in self.radicals:
                acc += gmpy2.sqrt(mpfr(d)) * mpfr(c.numerator) / c.denominator
        with gmpy2.context(precision=bits):
            out = mpfr(acc)
        # the 32 guard bits make every intermediate error < 2^-bits-20;
        # 1 ulp absorbs them all, plus 0.5 for the final rounding.
        return out, 1.5

    def __float__(self) -> float:
        v, _ = self.to_mpfr(64)
        return float(v)

    def __str__(self) -> str:
        parts = []
        if self.rational != 0 or not self.radicals:
            parts.append(str(self.rational))
        for d, c in self.radicals:
            if c == 1:
                parts.append(f"sqrt{d}")
            else:
                parts.append(f"{c}*sqrt{d}")
        return "+".join(parts).replace("+-", "-")


@dataclass(frozen=True)
class LazyReal:
    """A value defined by a computation at a requested precision.

    fn(bits) must return (mpfr, err_ulps).  Used for scan endpoints such as
    powers of the growth function, which are not algebraic numbers.
    """

    fn: Callable[[int], tuple[mpfr, float]]
    label: str = "lazy"

    def to_mpfr(self, bits: int) -> tuple[mpfr, float]:
        return self.fn(bits)

    @property
    def is_rational(self) -> bool:
        return False

    def __float__(self) -> float:
        v, _ = self.to_mpfr(64)
        return float(v)

    def __str__(self) -> str:
        return self.label


CoefLike = Union[AlgebraicReal, LazyReal]


def lazy_mul(a: CoefLike, b: CoefLike, label: str | None = None) -> LazyReal:
    """Product of two coefficient-like values as a new lazy value."""

    def fn(bits: int) -> tuple[mpfr, float]:
        va, ea = a.to_mpfr(bits + 32)
        vb, eb = b.to_mpfr(bits + 32)
        with gmpy2.context(precision=bits):
            out = va * vb
        # relative errors add; the 32 guard bits leave ample headroom
        return out, ea + eb + 1.0

    return LazyReal(fn, label or f"({a})*({b})")


def lazy_neg(a: CoefLike, label: str | None = None) -> LazyReal:
    def fn(bits: int) -> tuple[mpfr, float]:
        v, e = a.to_mpfr(bits)
        with gmpy2.context(precision=bits):
            return -v, e

    return LazyReal(fn, label or f"-({a})")

_SQRT_RE = re.compile(
    r"^(?:(?P<mult>[+-]?\d+(?:/\d+)?)\*)?"
    r"(?P<sign>[+-]?)sqrt(?P<rad>\d+)"
    r"(?:/(?P<den>\d+))?"
    r"(?P<off>[+-]\d+(?:/\d+)?)?$"
)

# rational-first spelling ("-1+sqrt2"), which is what __str__ emits
_OFF_SQRT_RE = re.compile(
    r"^(?P<off>[+-]?\d+(?:/\d+)?)"
    r"(?P<rest>[+-].+sqrt.+|[+-]sqrt.+)$"
)


def parse_real(text: str) -> AlgebraicReal:
    """Parse '7/17', '-0.25', 'sqrt2-1', '-1+sqrt2', '3/2*sqrt5', 'sqrt2/2'."""
    s = text.strip().replace(" ", "")
    m = _OFF_SQRT_RE.match(s)
    if m:
        root = parse_real(m.group("rest").lstrip("+"))
        return root + AlgebraicReal(Fraction(m.group("off")))
    m = _SQRT_RE.match(s)
    if m:
        mult = Fraction(m.group("mult")) if m.group("mult") else Fraction(1)
        if m.group("sign") == "-":
            mult = -mult
        if m.group("den"):
            mult /= int(m.group("den"))
        off = Fraction(m.group("off")) if m.group("off") else Fraction(0)
        return AlgebraicReal.sqrt(int(m.group("rad")), mult=mult, offset=off)
    try:
        return AlgebraicReal(Fraction(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse real value {text!r}") from exc


def coerce_real(x) -> CoefLike:
    """Accept AlgebraicReal/LazyReal/int/Fraction/float/str."""
    if isinstance(x, (AlgebraicReal, LazyReal)):
        return x
    if isinstance(x, (int, Fraction)):
        return AlgebraicReal(Fraction(x))
    if isinstance(x, float):
        # floats are exact binary rationals; keep the exact value
        return AlgebraicReal(Fraction(x))
    if isinstance(x, str):
        return parse_real(x)
    raise TypeError(f"cannot interpret {x!r} as a real coefficient")
