"""Exponential sums over growth phases: partial sums, dyadic series, batteries.

S(N) = sum over n of e(theta(n)), where theta comes from a SequenceSpec:
a smooth combination sum_j alpha_j G(n+h_j), the floor variant
sum_j lambda_j floor(G(n+h_j)), a linear phase n*beta, a polynomial, or a
prebuilt phase table.

The summation order is canonical and documented: the range splits into the
dyadic blocks (floor(N/2^(k+1)), floor(N/2^k)], processed k = 0, 1, ... (so
the largest indices first); inside a block, fixed-size chunks ascending, each
chunk reduced with Neumaier compensation by a compiled kernel; chunk sums
merge with Neumaier compensation in ascending order and block sums add in
plain complex arithmetic in k order.  partial_sum and dyadic_series share
that exact arithmetic, so the series blocks sum bitwise to the partial sum,
and thread counts never change any digit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np

from . import _kernels
from .growth import GrowthParams, ShiftedCombination, eval_G
from .phasetable import PhaseModel, PhaseTable, floor_phase_table, phase_table
from .precision import ExtReal, MIN_BITS, PrecisionError, required_bits, supported_width
from .reals import AlgebraicReal, CoefLike, LazyReal, coerce_real, lazy_mul, lazy_neg

CHUNK = 1 << 19

SMOOTH = "smooth"
FLOOR = "floor"
LINEAR = "linear"
POLY = "poly"
TABLE = "table"
_KINDS = (SMOOTH, FLOOR, LINEAR, POLY, TABLE)


@dataclass(frozen=True)
class SequenceSpec:
    """What gets summed.  Use the factory constructors."""

    kind: str
    params: GrowthParams | None = None
    comb: ShiftedCombination | None = None
    poly: tuple[CoefLike, ...] = ()
    table: PhaseTable | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if self.kind in (SMOOTH, FLOOR):
            if self.comb is None or self.params is None:
                raise ValueError(f"{self.kind} spec needs growth parameters and a combination")
        elif self.kind in (LINEAR, POLY):
            if not self.poly:
                raise ValueError(f"{self.kind} spec needs phase coefficients")
        elif self.table is None:
            raise ValueError("table spec needs a phase table")

    @staticmethod
    def smooth(
        params: GrowthParams, comb: ShiftedCombination, poly: Sequence = ()
    ) -> "SequenceSpec":
        """Optional `poly` adds a polynomial phase on top of the combination."""
        return SequenceSpec(
            SMOOTH, params=params, comb=comb,
            poly=tuple(coerce_real(x) for x in poly),
        )

    @staticmethod
    def floor(
        params: GrowthParams, comb: ShiftedCombination, poly: Sequence = ()
    ) -> "SequenceSpec":
        """Coefficients of `comb` act as the multipliers lambda_j."""
        return SequenceSpec(
            FLOOR, params=params, comb=comb,
            poly=tuple(coerce_real(x) for x in poly),
        )

    @staticmethod
    def linear(beta) -> "SequenceSpec":
        return SequenceSpec(LINEAR, poly=(coerce_real(0), coerce_real(beta)))

    @staticmethod
    def polynomial(coeffs: Sequence) -> "SequenceSpec":
        return SequenceSpec(POLY, poly=tuple(coerce_real(x) for x in coeffs))

    @staticmethod
    def from_table(table: PhaseTable) -> "SequenceSpec":
        return SequenceSpec(TABLE, table=table)

    @property
    def n_start(self) -> int:
        """Smallest summand index the spec can evaluate."""
        if self.kind in (SMOOTH, FLOOR):
            return self.comb.n_start
        if self.kind == TABLE:
            return max(self.table.lo, 1)
        return 1

    def describe(self) -> str:
        if self.kind in (SMOOTH, FLOOR):
            inner = ", ".join(f"{a}@{h}" for a, h in self.comb.terms)
            if self.poly:
                inner += "; poly " + ",".join(str(p) for p in self.poly)
            return f"{self.kind}[c={self.params.c}; {inner}]"
        if self.kind == TABLE:
            return f"table[{self.table.lo},{self.table.hi})"
        return f"{self.kind}{tuple(str(p) for p in self.poly)}"


@dataclass(frozen=True)
class ExpSumResult:
    N: int
    n_start: int
    sum: complex
    normalized: float
    precision_bits: int
    blocks: int
    wall_time_ms: int
    phase_abs_err: float
    sum_abs_err: float


@dataclass(frozen=True)
class DyadicBlock:
    k: int
    lo: int
    hi: int  # inclusive
    sum: complex

    @property
    def count(self) -> int:
        return self.hi - self.lo + 1

    @property
    def normalized(self) -> float:
        return abs(self.sum) / self.count


@dataclass(frozen=True)
class DyadicSeries:
    N: int
    n_start: int
    blocks: tuple[DyadicBlock, ...]
    precision_bits: int
    boundary_slack: int
    phase_abs_err: float


def resolve_precision(spec: SequenceSpec, N: int, precision) -> int:
    """Working precision: at least what the largest phase magnitude demands."""
    if spec.kind in (SMOOTH, FLOOR):
        base = required_bits(max(N + spec.comb.max_shift, 1), spec.params.c)
        mag = max(
            (_coef_mag_log2(a) for a, _ in spec.comb.terms if not _is_zero(a)),
            default=0.0,
        )
        base += max(0, math.ceil(mag))
        if spec.poly:
            lx = math.log2(max(N + spec.comb.max_shift, 2))
            pm = max(
                (_coef_mag_log2(p) + j * lx
                 for j, p in enumerate(spec.poly) if not _is_zero(p)),
                default=float("-inf"),
            )
            if pm != float("-inf"):
                base = max(base, math.ceil(pm) + 48)
    else:
        base = MIN_BITS
    if precision is None or precision == "auto":
        return supported_width(base)
    p = int(precision)
    if p < base:
        raise PrecisionError(
            f"requested {p} bits but the phase magnitude needs at least {base}"
        )
    return supported_width(p)


def _is_zero(a: CoefLike) -> bool:
    return getattr(a, "is_zero", False)


def _coef_mag_log2(a: CoefLike) -> float:
    v, _ = a.to_mpfr(64)
    if v == 0:
        return float("-inf")
    return float(gmpy2.log2(abs(v)))


def _fracs_for(
    spec: SequenceSpec, lo: int, hi: int, threads: int, min_bits: int
) -> tuple[np.ndarray, float]:
    """Phase fractions for n in [lo, hi), plus their absolute error bound."""
    if spec.kind == SMOOTH:
        t = phase_table(
            PhaseModel(spec.params, spec.comb.terms, spec.poly),
            lo, hi, threads=threads, min_bits=min_bits,
        )
        return t.fracs, t.abs_err
    if spec.kind == FLOOR:
        t = floor_phase_table(
            spec.params, spec.comb.terms, lo, hi,
            poly=spec.poly, threads=threads, min_bits=min_bits,
        )
        return t.fracs, t.abs_err
    if spec.kind in (LINEAR, POLY):
        t = phase_table(
            PhaseModel(None, (), spec.poly), lo, hi, threads=threads, min_bits=min_bits
        )
        return t.fracs, t.abs_err
    if lo < spec.table.lo or hi > spec.table.hi:
        raise ValueError(
            f"table covers [{spec.table.lo}, {spec.table.hi}) "
            f"but the sum needs [{lo}, {hi})"
        )
    return spec.table.fracs[lo - spec.table.lo : hi - spec.table.lo], spec.table.abs_err


def _neumaier_complex(parts: Sequence[complex]) -> complex:
    sr = si = cr = ci = 0.0
    for z in parts:
        x = z.real
        t = sr + x
        if abs(sr) >= abs(x):
            cr += (sr - t) + x
        else:
            cr += (x - t) + sr
        sr = t
        y = z.imag
        t = si + y
        if abs(si) >= abs(y):
            ci += (si - t) + y
        else:
            ci += (y - t) + si
        si = t
    return complex(sr + cr, si + ci)


def _range_sum(
    spec: SequenceSpec, lo: int, hi: int, threads: int, min_bits: int
) -> tuple[complex, float]:
    """Sum of e(theta(n)) over the inclusive range [lo, hi]."""
    parts: list[complex] = []
    err = 0.0
    a = lo
    while a <= hi:
        b = min(a + CHUNK - 1, hi)
        fr, pe = _fracs_for(spec, a, b + 1, threads, min_bits)
        re, im = _kernels.esum_fracs(fr, 0, b + 1 - a)
        parts.append(complex(re, im))
        err = max(err, pe)
        a = b + 1
    return _neumaier_complex(parts), err


def dyadic_ranges(n_start: int, N: int) -> list[tuple[int, int, int]]:
    """(k, lo, hi) with lo..hi inclusive covering [n_start, N], k ascending."""
    out = []
    k = 0
    while True:
        hi = N >> k
        lo = (N >> (k + 1)) + 1
        if hi < n_start:
            break
        lo = max(lo, n_start)
        if lo <= hi:
            out.append((k, lo, hi))
        if lo == n_start:
            break
        k += 1
    return out


def _block_sums(
    spec: SequenceSpec, N: int, bits: int, threads: int
) -> tuple[list[tuple[int, int, int, complex]], float]:
    out = []
    phase_err = 0.0
    for k, lo, hi in dyadic_ranges(spec.n_start, N):
        s, pe = _range_sum(spec, lo, hi, threads, bits)
        phase_err = max(phase_err, pe)
        out.append((k, lo, hi, s))
    return out, phase_err


def partial_sum(
    spec: SequenceSpec,
    N: int,
    *,
    precision="auto",
    threads: int = 1,
) -> ExpSumResult:
    """S(N) = sum of e(theta(n)) for n from the spec's start through N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    t0 = time.perf_counter()
    bits = resolve_precision(spec, N, precision)
    blocks, phase_err = _block_sums(spec, N, bits, threads)
    total = 0j
    for _, _, _, s in blocks:
        total = total + s
    count = max(N - spec.n_start + 1, 0)
    sum_err = count * (2.0 * math.pi * phase_err + 2.0 ** -50)
    return ExpSumResult(
        N=N,
        n_start=spec.n_start,
        sum=total,
        normalized=abs(total) / N,
        precision_bits=bits,
        blocks=len(blocks),
        wall_time_ms=int(round((time.perf_counter() - t0) * 1000)),
        phase_abs_err=phase_err,
        sum_abs_err=sum_err,
    )


def dyadic_series(
    spec: SequenceSpec,
    N: int,
    *,
    precision="auto",
    threads: int = 1,
) -> DyadicSeries:
    """Per-block sums over (N/2^(k+1), N/2^k]; adding them in the listed
    order reproduces partial_sum(N).sum exactly."""
    if N < 1:
        raise ValueError("N must be >= 1")
    bits = resolve_precision(spec, N, precision)
    blocks, phase_err = _block_sums(spec, N, bits, threads)
    slack = 0
    if spec.kind in (SMOOTH, FLOOR):
        slack = 2 * spec.comb.max_abs_shift
    return DyadicSeries(
        N=N,
        n_start=spec.n_start,
        blocks=tuple(DyadicBlock(k, lo, hi, s) for k, lo, hi, s in blocks),
        precision_bits=bits,
        boundary_slack=slack,
        phase_abs_err=phase_err,
    )


# ---------------------------------------------------------------------------
# Weyl vectors and the goodness scan
# ---------------------------------------------------------------------------


def weyl_vector_test(
    params: GrowthParams,
    shifts: Sequence[int],
    kvec: Sequence[int],
    N: int,
    *,
    floor_mode: bool = False,
    alpha=None,
    precision="auto",
    threads: int = 1,
) -> ExpSumResult:
    """Weyl sum for the integer vector (k_1..k_r) against shifted growth values.

    Smooth mode sums e(sum_j k_j G(n+h_j)); floor mode sums
    e(alpha * sum_j k_j floor(G(n+h_j))).
    """
    if len(shifts) != len(kvec):
        raise ValueError("shifts and kvec must have equal length")
    ks = [int(k) for k in kvec]
    if not any(ks):
        raise ValueError("the zero vector tests nothing")
    pairs = [(k, h) for k, h in zip(ks, shifts) if k != 0]
    if floor_mode:
        if alpha is None:
            raise ValueError("floor mode needs the multiplier alpha")
        al = coerce_real(alpha)
        coeffs = []
        for k, _ in pairs:
            if isinstance(al, AlgebraicReal):
                coeffs.append(al.scale(Fraction(k)))
            else:
                coeffs.append(lazy_mul(coerce_real(k), al))
        comb = ShiftedCombination(tuple(zip(coeffs, (h for _, h in pairs))))
        spec = SequenceSpec.floor(params, comb)
    else:
        comb = ShiftedCombination.make([k for k, _ in pairs], [h for _, h in pairs])
        spec = SequenceSpec.smooth(params, comb)
    return partial_sum(spec, N, precision=precision, threads=threads)


@dataclass(frozen=True)
class GoodnessEntry:
    alpha: CoefLike
    alpha_log2: float
    negative: bool
    result: ExpSumResult | None
    error: str | None
    flagged: bool


@dataclass(frozen=True)
class GoodnessScan:
    N: int
    gamma: float
    big_exp: float
    threshold: float | None
    entries: tuple[GoodnessEntry, ...]

    @property
    def worst(self) -> float:
        vals = [e.result.normalized for e in self.entries if e.result is not None]
        return max(vals) if vals else float("nan")


def _endpoint_low(params: GrowthParams, N: int, gamma: float) -> LazyReal:
    def fn(bits: int):
        e = eval_G(params, 2 * N, bits) ** (-gamma)
        return e.value, e.err_ulps

    return LazyReal(fn, f"G({2 * N})^-{gamma}")


def _endpoint_high(params: GrowthParams, N: int, big_exp: float) -> LazyReal:
    def fn(bits: int):
        e = eval_G(params, N, bits) ** big_exp
        return e.value, e.err_ulps

    return LazyReal(fn, f"G({N})^{big_exp}")


def _geometric_blend(a: LazyReal, b: LazyReal, t: float, label: str) -> LazyReal:
    """a^(1-t) * b^t through certified log/exp arithmetic."""

    def fn(bits: int):
        va, ea = a.to_mpfr(bits + 32)
        vb, eb = b.to_mpfr(bits + 32)
        xa = ExtReal(va, ea, bits + 32)
        xb = ExtReal(vb, eb, bits + 32)
        out = (xa.log() * (1.0 - t) + xb.log() * t).exp()
        return out.value, out.err_ulps

    return LazyReal(fn, label)


def goodness_grid(
    params: GrowthParams,
    N: int,
    *,
    gamma: float = 0.5,
    big_exp: float = 1.0,
    count: int = 9,
) -> list[LazyReal]:
    """Log-spaced multipliers from G(2N)^-gamma up to G(N)^big_exp inclusive."""
    if count < 2:
        raise ValueError("a scan needs at least the two endpoints")
    lo = _endpoint_low(params, N, gamma)
    hi = _endpoint_high(params, N, big_exp)
    out = [lo]
    for i in range(1, count - 1):
        t = i / (count - 1)
        out.append(_geometric_blend(lo, hi, t, f"alpha[{i}/{count - 1}]"))
    out.append(hi)
    return out


def goodness_scan(
    params: GrowthParams,
    comb: ShiftedCombination,
    N: int,
    *,
    gamma: float = 0.5,
    big_exp: float = 1.0,
    count: int = 9,
    include_negative: bool = True,
    alphas: Sequence | None = None,
    threshold: float | None = None,
    precision="auto",
    threads: int = 1,
) -> GoodnessScan:
    """Partial sums of e(alpha * F(n)) over a grid of multipliers alpha.

    The default grid is geometric between the scan endpoints; an explicit
    `alphas` list overrides it.  Multipliers that push the phase past the
    requested precision produce error entries instead of results.
    """
    if alphas is not None:
        grid: list[CoefLike] = [coerce_real(a) for a in alphas]
    else:
        grid = list(goodness_grid(params, N, gamma=gamma, big_exp=big_exp, count=count))
    entries: list[GoodnessEntry] = []
    for alpha in grid:
        variants = [(alpha, False)]
        if include_negative:
            neg = alpha.scale(Fraction(-1)) if isinstance(alpha, AlgebraicReal) else lazy_neg(alpha)
            variants.append((neg, True))
        for a, is_neg in variants:
            mag = _coef_mag_log2(a)
            scaled = ShiftedCombination(
                tuple(
                    (lazy_mul(a, cj, label=f"({a})*({cj})"), h)
                    for cj, h in comb.terms
                )
            )
            spec = SequenceSpec.smooth(params, scaled)
            try:
                res = partial_sum(spec, N, precision=precision, threads=threads)
                err = None
            except PrecisionError as exc:
                res, err = None, str(exc)
            flagged = bool(
                threshold is not None and res is not None and res.normalized > threshold
            )
            entries.append(GoodnessEntry(a, mag, is_neg, res, err, flagged))
    return GoodnessScan(N, gamma, big_exp, threshold, tuple(entries))
