"""Certified extended-precision scalars and phase reduction.

Everything downstream (growth evaluation, Taylor jets, bound certificates,
pointwise phase checks) runs on ExtReal: an MPFR value of fixed precision P
together with a running bound on its accumulated rounding error, kept in
units of 2^-P relative to the value ("ulps").  Error propagation is
first-order with a safety half-ulp per operation; MPFR itself guarantees
correctly rounded results (<= 0.5 ulp) for every primitive we use.

Reducing a value mod 1 turns the relative bound into an absolute one.  A
phase is *trusted* only if that absolute bound is below 2^-40; untrusted
phases refuse to be turned into unit-circle points.  Nothing in this module
ever guesses: if the error interval of a value straddles an integer, floor
and residue extraction raise PrecisionError instead of picking a side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

__all__ = [
    "PrecisionError",
    "ExtReal",
    "PhaseValue",
    "reduce_mod1",
    "floor_residue",
    "required_bits",
    "supported_width",
    "unit_circle",
    "TRUST_ABS_ERR",
    "MIN_BITS",
]

TRUST_ABS_ERR = 2.0 ** -40
GUARD_BITS = 48
MIN_BITS = 64
WIDTH_STEP = 64
TWO_PI = 2.0 * math.pi


class PrecisionError(ArithmeticError):
    """Raised when a certified bound cannot support the requested operation."""


def _ctx(bits: int):
    return gmpy2.context(precision=bits)


def _ctx_up():
    """Error-bound arithmetic: 64 bits, rounded up, so bounds stay bounds."""
    return gmpy2.context(precision=64, round=gmpy2.RoundUp)


class ExtReal:
    """A P-bit value plus an accumulated relative error bound in ulps (2^-P)."""

    __slots__ = ("value", "err_ulps", "bits")

    def __init__(self, value: mpfr, err_ulps: float, bits: int):
        if bits < MIN_BITS:
            raise ValueError(f"precision {bits} below minimum {MIN_BITS}")
        self.value = value
        self.err_ulps = float(err_ulps)
        self.bits = bits

    # ---- constructors ---------------------------------------------------

    @staticmethod
    def exact(x, bits: int) -> "ExtReal":
        """From int/Fraction/float; error is zero when representable."""
        with _ctx(bits):
            if isinstance(x, Fraction):
                v = mpfr(x.numerator) / x.denominator
                num_bits = abs(x.numerator).bit_length()
                den_pow2 = (x.denominator & (x.denominator - 1)) == 0
                err = 0.0 if (den_pow2 and num_bits <= bits) else 0.5
            elif isinstance(x, int):
                v = mpfr(x)
                err = 0.0 if abs(x).bit_length() <= bits else 0.5
            else:
                v = mpfr(x)
                err = 0.0 if isinstance(x, float) else 0.5
        return ExtReal(v, err, bits)

    @staticmethod
    def from_coef(coef, bits: int) -> "ExtReal":
        """From an AlgebraicReal / LazyReal coefficient."""
        v, err = coef.to_mpfr(bits)
        return ExtReal(v, err, bits)

    # ---- error bookkeeping ----------------------------------------------

    def _abs_err(self) -> mpfr:
        """Absolute error bound as an mpfr (wide exponent range, no underflow)."""
        if self.err_ulps == 0.0 or self.value == 0:
            with _ctx_up():
                return mpfr(self.err_ulps) * gmpy2.exp2(-self.bits)
        e = gmpy2.get_exp(self.value)
        with _ctx_up():
            return mpfr(self.err_ulps) * gmpy2.exp2(e - self.bits)

    def _wrap(self, r: mpfr, abs_err: mpfr, extra_ulps: float = 0.5) -> "ExtReal":
        if r == 0:
            if abs_err == 0:
                return ExtReal(r, 0.0, self.bits)
            return ExtReal(r, math.inf, self.bits)
        e = gmpy2.get_exp(r)
        with _ctx_up():
            ulps = abs_err * gmpy2.exp2(self.bits - e)
        u = float(ulps)
        if math.isnan(u):
            u = math.inf
        return ExtReal(r, u + extra_ulps, self.bits)

    def _require_same(self, other: "ExtReal") -> None:
        if self.bits != other.bits:
            raise ValueError("mixed precisions in ExtReal arithmetic")

    # ---- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, Fraction)):
            other = ExtReal.exact(other, self.bits)
        self._require_same(other)
        with _ctx(self.bits):
            r = self.value + other.value
        return self._wrap(r, self._abs_err() + other._abs_err())

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float, Fraction)):
            other = ExtReal.exact(other, self.bits)
        self._require_same(other)
        with _ctx(self.bits):
            r = self.value - other.value
        return self._wrap(r, self._abs_err() + other._abs_err())

    def __rsub__(self, other):
        return ExtReal.exact(other, self.bits) - self

    def __neg__(self):
        with _ctx(self.bits):
            r = -self.value
        return ExtReal(r, self.err_ulps, self.bits)

    def __abs__(self):
        with _ctx(self.bits):
            r = abs(self.value)
        return ExtReal(r, self.err_ulps, self.bits)

    def __mul__(self, other):
        if isinstance(other, (int, float, Fraction)):
            other = ExtReal.exact(other, self.bits)
        elif isinstance(other, mpfr):
            # scalar assumed correct to 1 ulp of its own representation
            other = ExtReal(other, 1.0, self.bits)
        self._require_same(other)
        with _ctx(self.bits):
            r = self.value * other.value
        if r == 0:
            return ExtReal(r, 0.0, self.bits)
        u = self.err_ulps + other.err_ulps + 1.0
        return ExtReal(r, u, self.bits)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, Fraction)):
            other = ExtReal.exact(other, self.bits)
        elif isinstance(other, mpfr):
            other = ExtReal(other, 1.0, self.bits)
        self._require_same(other)
        if other.value == 0:
            raise ZeroDivisionError("ExtReal division by zero")
        with _ctx(self.bits):
            r = self.value / other.value
        if r == 0:
            return ExtReal(r, 0.0, self.bits)
        u = self.err_ulps + other.err_ulps + 1.0
        return ExtReal(r, u, self.bits)

    def __rtruediv__(self, other):
        return ExtReal.exact(other, self.bits) / self

    # ---- transcendentals ---------------------------------------------------

    def exp(self) -> "ExtReal":
        if self.value == 0 and self.err_ulps == 0.0:
            with _ctx(self.bits):
                return ExtReal(mpfr(1), 0.0, self.bits)
        with _ctx(self.bits):
            r = gmpy2.exp(self.value)
        abs_in = self._abs_err()
        with _ctx_up():
            abs_out = abs_in * abs(r)
        return self._wrap(r, abs_out)

    def log(self) -> "ExtReal":
        if self.value <= 0:
            raise ValueError("log needs a positive value")
        with _ctx(self.bits):
            r = gmpy2.log(self.value)
        with _ctx_up():
            abs_out = self._abs_err() / abs(self.value)
        return self._wrap(r, abs_out)

    def __pow__(self, k) -> "ExtReal":
        """Power with an exact scalar exponent (int, float or mpfr)."""
        if self.value < 0:
            raise ValueError("power of a negative base is not supported")
        if self.value == 0:
            with _ctx(self.bits):
                return ExtReal(mpfr(0), 0.0, self.bits)
        with _ctx(self.bits):
            r = self.value ** mpfr(k)
        with _ctx_up():
            abs_out = abs(mpfr(k)) * self._abs_err() / abs(self.value) * abs(r)
        return self._wrap(r, abs_out)

    def sqrt(self) -> "ExtReal":
        return self ** 0.5

    # ---- integer extraction --------------------------------------------------

    def floor_certified(self) -> int:
        """Floor as an exact int; PrecisionError if the bound straddles an integer."""
        e = gmpy2.get_exp(self.value) if self.value != 0 else 0
        if e >= self.bits:
            raise PrecisionError(
                f"floor needs {e + 1} bits, value carries only {self.bits}"
            )
        with _ctx(max(self.bits, MIN_BITS)):
            fl = gmpy2.floor(self.value)
            dist_down = self.value - fl
            dist_up = (fl + 1) - self.value
        abs_err = self._abs_err()
        if abs_err != 0:
            if dist_down == 0 or dist_down <= abs_err or dist_up <= abs_err:
                raise PrecisionError(
                    "error bound straddles an integer; increase precision"
                )
        return int(fl)

    # ---- conversions ------------------------------------------------------

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return f"ExtReal({self.value!s}, err_ulps={self.err_ulps:.3g}, bits={self.bits})"


@dataclass(frozen=True)
class PhaseValue:
    """A value reduced mod 1 with a certified absolute error bound."""

    frac: mpfr
    abs_err: float
    bits: int

    @property
    def trusted(self) -> bool:
        return self.abs_err < TRUST_ABS_ERR

    def as_float(self) -> float:
        f = float(self.frac)
        if f >= 1.0:
            f -= 1.0
        return f

    def __repr__(self) -> str:
        tag = "trusted" if self.trusted else "UNTRUSTED"
        return f"PhaseValue({float(self.frac):.15f}, abs_err={self.abs_err:.3g}, {tag})"


def reduce_mod1(x: ExtReal) -> PhaseValue:
    """Fractional part with absolute error bound |x| * 2^-(P-8), or the
    tracked bound if that is (honestly) larger."""
    with _ctx(x.bits):
        f = gmpy2.frac(x.value)
        if f < 0:
            f += 1
        if f >= 1:
            f = mpfr(0)
    with _ctx_up():
        static = abs(x.value) * gmpy2.exp2(-(x.bits - 8))
        tracked = x._abs_err()
        bound = static if static >= tracked else tracked
    return PhaseValue(f, float(bound), x.bits)


def floor_residue(x: ExtReal, q: int) -> tuple[PhaseValue, int]:
    """(fractional part, floor mod q), both certified against the error bound."""
    if q < 1:
        raise ValueError("modulus must be a positive integer")
    fl = x.floor_certified()
    with _ctx(x.bits):
        f = x.value - fl
    with _ctx_up():
        static = abs(x.value) * gmpy2.exp2(-(x.bits - 8))
        tracked = x._abs_err()
        bound = static if static >= tracked else tracked
    return PhaseValue(f, float(bound), x.bits), fl % q


def required_bits(N: int, c: float) -> int:
    """Mantissa bits so that the integer part of G(N) plus 48 guard bits fit.

    Callers round up to the next supported width (multiples of 64, minimum 64).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0.0 < c < 0.5:
        raise ValueError("growth exponent must satisfy 0 < c < 1/2")
    log2_g = math.log(N) ** (c + 1.0) / math.log(2.0) if N > 1 else 0.0
    return math.ceil(log2_g) + GUARD_BITS


def supported_width(bits: int) -> int:
    """Round a raw bit requirement up to the next supported mantissa width."""
    if bits <= MIN_BITS:
        return MIN_BITS
    return ((bits + WIDTH_STEP - 1) // WIDTH_STEP) * WIDTH_STEP


def unit_circle(p: PhaseValue) -> complex:
    """e(frac) as a double-precision point on the unit circle.

    Refuses untrusted phases: a phase without a certified bound must never
    silently enter a sum.
    """
    if not p.trusted:
        raise PrecisionError(
            f"phase abs_err={p.abs_err:.3g} exceeds trust threshold {TRUST_ABS_ERR:.3g}"
        )
    ang = TWO_PI * p.as_float()
    return complex(math.cos(ang), math.sin(ang))
