"""Model measure-preserving systems driven by the floor-growth sequence.

Three families, each commuting by construction: rotations of the d-torus
(one rotation vector per transformation), shifts of a finite cyclic group,
and the skew product S(x, y) = (x + alpha, y + x) on the 2-torus.
Observables are trigonometric polynomials over the character basis, so
invariant projections, inner products, and L2 norms are exact; the only
numerical content is the phase sums, and those all delegate to
`expsums.partial_sum`.  An ergodic average along n -> floor(G(n+h)) of a
character e(k.x) is e(k.x) times a floor-phase exponential sum, so the
average's L2 deviation from the projected observable comes out of the same
engine (bit-for-bit) that the sum batteries use.

Orbits are never iterated point by point: the skew product's n-th image
has a closed quadratic form, checked against direct iteration in the
tests, and the engine gets it as a polynomial phase.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import gmpy2

from .expsums import SequenceSpec, partial_sum
from .furstenberg import SequenceId
from .growth import GrowthParams, ShiftedCombination
from .reals import AlgebraicReal, coerce_real

TORUS = "torus_rotation"
CYCLIC = "cyclic"
SKEW = "skew"

_TWO_PI = 2.0 * math.pi


def _exact(value, what: str) -> AlgebraicReal:
    """Coerce to an AlgebraicReal; reject values without decidable rationality."""
    c = coerce_real(value)
    if not isinstance(c, AlgebraicReal):
        raise TypeError(
            f"{what} needs an exact value (int, Fraction, float, or sqrt form), "
            f"got {value!r}"
        )
    return c


@dataclass(frozen=True)
class ModelSystem:
    """A finite family of commuting maps on a compact abelian group.

    kind "torus_rotation": r rotations of T^dim, one exact vector each.
    kind "cyclic": r shifts n -> n + step on Z/q.
    kind "skew": the single map (x, y) -> (x + alpha, y + x) on T^2.
    """

    kind: str
    dim: int
    rotations: tuple[tuple[AlgebraicReal, ...], ...] = ()
    q: int = 0
    steps: tuple[int, ...] = ()
    alpha: AlgebraicReal | None = None

    def __post_init__(self):
        if self.kind == TORUS:
            if not self.rotations:
                raise ValueError("a torus system needs at least one rotation")
            if self.dim < 1 or any(len(v) != self.dim for v in self.rotations):
                raise ValueError("every rotation vector must have length dim")
        elif self.kind == CYCLIC:
            if self.q < 1:
                raise ValueError("cyclic modulus must be >= 1")
            if not self.steps:
                raise ValueError("a cyclic system needs at least one step")
        elif self.kind == SKEW:
            if self.alpha is None:
                raise ValueError("the skew product needs a rotation number")
        else:
            raise ValueError(f"unknown system kind {self.kind!r}")

    @staticmethod
    def torus(rotations: Sequence[Sequence]) -> "ModelSystem":
        vecs = tuple(
            tuple(_exact(b, "rotation coordinate") for b in vec)
            for vec in rotations
        )
        if not vecs:
            raise ValueError("a torus system needs at least one rotation")
        return ModelSystem(TORUS, dim=len(vecs[0]), rotations=vecs)

    @staticmethod
    def cyclic(q: int, steps: Sequence[int]) -> "ModelSystem":
        return ModelSystem(CYCLIC, dim=1, q=int(q), steps=tuple(int(s) for s in steps))

    @staticmethod
    def skew(alpha) -> "ModelSystem":
        return ModelSystem(SKEW, dim=2, alpha=_exact(alpha, "skew rotation number"))

    @property
    def r(self) -> int:
        """Number of transformations in the family."""
        if self.kind == TORUS:
            return len(self.rotations)
        if self.kind == CYCLIC:
            return len(self.steps)
        return 1

    @property
    def commuting(self) -> bool:
        """Each family lives in one abelian action, so always true."""
        return True

    def describe(self) -> str:
        if self.kind == TORUS:
            vecs = "; ".join(
                "(" + ", ".join(str(b) for b in v) + ")" for v in self.rotations
            )
            return f"torus T^{self.dim} rotations {vecs}"
        if self.kind == CYCLIC:
            return f"Z/{self.q} steps {self.steps}"
        return f"skew on T^2, alpha={self.alpha}"


@dataclass(frozen=True)
class ObservableSpec:
    """Trigonometric polynomial sum_k coef_k e(k.x) with finite support."""

    dim: int
    terms: tuple[tuple[tuple[int, ...], complex], ...]

    def __post_init__(self):
        seen = set()
        for kvec, coef in self.terms:
            if len(kvec) != self.dim:
                raise ValueError(f"frequency {kvec} does not match dim {self.dim}")
            if kvec in seen:
                raise ValueError(f"duplicate frequency {kvec}")
            if coef == 0:
                raise ValueError(f"zero coefficient at {kvec}; drop the term")
            seen.add(kvec)

    @staticmethod
    def make(dim: int, terms: Sequence[tuple]) -> "ObservableSpec":
        """Merge duplicate frequencies, drop exact zeros, sort canonically."""
        acc: dict[tuple[int, ...], complex] = {}
        for kvec, coef in terms:
            k = tuple(int(x) for x in kvec)
            acc[k] = acc.get(k, 0j) + complex(coef)
        kept = tuple((k, c) for k, c in sorted(acc.items()) if c != 0)
        return ObservableSpec(dim, kept)

    @staticmethod
    def character(kvec: Sequence[int], coef: complex = 1.0) -> "ObservableSpec":
        return ObservableSpec.make(len(tuple(kvec)), [(tuple(kvec), coef)])

    @staticmethod
    def constant(dim: int, value: complex = 1.0) -> "ObservableSpec":
        return ObservableSpec.make(dim, [((0,) * dim, value)])

    @property
    def l2_norm_sq(self) -> float:
        return sum(abs(c) ** 2 for _, c in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, kvec: Sequence[int]) -> complex:
        k = tuple(int(x) for x in kvec)
        for kv, c in self.terms:
            if kv == k:
                return c
        return 0j

    def inner(self, other: "ObservableSpec") -> complex:
        """L2 inner product <self, other>, exact on the character basis."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        theirs = dict(other.terms)
        return sum(c * theirs[k].conjugate() for k, c in self.terms if k in theirs)

    def describe(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c:g}*e({k}.x)" for k, c in self.terms)


# ---- invariant projection -------------------------------------------------


def _dot(kvec: tuple[int, ...], vec: tuple[AlgebraicReal, ...]) -> AlgebraicReal:
    acc = AlgebraicReal(Fraction(0))
    for kj, bj in zip(kvec, vec):
        if kj:
            acc = acc + bj.scale(kj)
    return acc


def _char_multipliers(sys: ModelSystem, kvec: tuple[int, ...]) -> list[AlgebraicReal]:
    """k paired with each transformation: the per-map phase multiplier."""
    if sys.kind == TORUS:
        return [_dot(kvec, vec) for vec in sys.rotations]
    if sys.kind == CYCLIC:
        k = kvec[0]
        return [AlgebraicReal(Fraction(k * s, sys.q)) for s in sys.steps]
    raise ValueError("the skew product does not act diagonally on characters")


def invariant_projection(sys: ModelSystem, f: ObservableSpec) -> ObservableSpec:
    """Restrict f to the characters fixed by every transformation.

    A character e(k.x) is fixed by the rotation with vector b exactly when
    k.b is an integer; the test runs in exact arithmetic, so declared
    irrationals (sqrt forms) never pass for k != 0 and rationals pass
    precisely when the denominator divides out.
    """
    if sys.kind == SKEW:
        raise ValueError(
            "the skew product mixes characters; no diagonal projection here"
        )
    if f.dim != sys.dim:
        raise ValueError(f"observable dim {f.dim} does not match system dim {sys.dim}")
    kept = tuple(
        (kvec, coef)
        for kvec, coef in f.terms
        if all(lam.is_integer for lam in _char_multipliers(sys, kvec))
    )
    return ObservableSpec(f.dim, kept)


def spectral_mass(sys: ModelSystem, f: ObservableSpec) -> float:
    """<Pf, f>: the exact squared mass on the invariant characters."""
    pf = invariant_projection(sys, f)
    return sum(abs(c) ** 2 for _, c in pf.terms)


def _geometric_average(lam: AlgebraicReal, M: int) -> complex:
    """(1/M) sum_{m=1..M} e(m*lam), in closed form."""
    if lam.is_integer:
        return 1.0 + 0j
    with gmpy2.context(precision=128):
        v, _ = lam.to_mpfr(128)
        t = float(gmpy2.frac(v))
        mt = float(gmpy2.frac(v * M))
    z = cmath.exp(1j * _TWO_PI * t)
    num = cmath.exp(1j * _TWO_PI * mt) - 1.0
    den = z - 1.0
    return z * num / (M * den)


def box_average(sys: ModelSystem, f: ObservableSpec, M: int) -> complex:
    """Average of <(T_1^{n_1}...T_r^{n_r} composed with f), f> over n in [1,M]^r.

    Exact per character: the correlation splits into one geometric average
    per transformation, so the box average is a finite product.  As M grows
    it converges to <Pf, f>, which gives the spectral sanity check the
    projection is tested against.
    """
    if M < 1:
        raise ValueError("box size must be >= 1")
    if f.dim != sys.dim:
        raise ValueError(f"observable dim {f.dim} does not match system dim {sys.dim}")
    total = 0j
    for kvec, coef in f.terms:
        w = complex(abs(coef) ** 2)
        for lam in _char_multipliers(sys, kvec):
            w *= _geometric_average(lam, M)
        total += w
    return total


# ---- ergodic averages along the floor-growth times --------------------------


@dataclass(frozen=True)
class VnResult:
    """L2 deviation of the floor-growth ergodic average from the projection."""

    system: ModelSystem
    observable: ObservableSpec
    shifts: tuple[int, ...]
    params: GrowthParams
    N: int
    norm: float
    curve: tuple[tuple[int, float], ...]
    weights: tuple[tuple[tuple[int, ...], complex], ...]
    invariant_mass: float
    precision_bits: int
    wall_ms: int

    def a_norm_sq(self) -> float:
        """Squared L2 norm of the average itself (contraction check)."""
        return self.invariant_mass + sum(
            abs(self.observable.coefficient(k) * w) ** 2 for k, w in self.weights
        )

    def rows(self) -> list[tuple[int, float]]:
        return list(self.curve)

    def summary(self) -> str:
        return (
            f"|A_N f - Pf|_2 = {self.norm:.6g} at N={self.N} "
            f"({len(self.weights)} moving characters, "
            f"invariant mass {self.invariant_mass:g})"
        )


def _dyadic_points(N: int, lo: int) -> list[int]:
    pts = []
    p = max(2, lo)
    while p < N:
        pts.append(p)
        p <<= 1
    pts.append(N)
    return pts


def vn_average(
    sys: ModelSystem,
    f: ObservableSpec,
    shifts: Sequence[int],
    c: float,
    N: int,
    *,
    precision="auto",
    threads: int = 1,
    curve_from: int = 1024,
) -> VnResult:
    """L2 distance between the floor-growth average of f and its projection.

    The average pairs transformation i with shift h_i: each character
    e(k.x) picks up the weight (1/N) sum_n e(sum_i (k.b_i) floor(G(n+h_i))),
    an expsums floor-phase run, while invariant characters keep weight 1
    exactly and never touch the engine.  The curve reports the norm at
    dyadic N (from `curve_from` up) and at N itself; the final entry is the
    headline value.
    """
    params = c if isinstance(c, GrowthParams) else GrowthParams(c)
    if f.dim != sys.dim:
        raise ValueError(f"observable dim {f.dim} does not match system dim {sys.dim}")
    hs = tuple(int(h) for h in shifts)
    if len(hs) != sys.r:
        raise ValueError(f"{sys.r} transformations need {sys.r} shifts, got {len(hs)}")
    if len(set(hs)) != len(hs):
        raise ValueError("shifts must be distinct")
    if min(hs, default=0) < 0:
        raise ValueError("shifts must be nonnegative")
    if N < 1:
        raise ValueError("N must be >= 1")

    t0 = time.perf_counter()
    invariant_mass = 0.0
    moving: list[tuple[tuple[int, ...], complex, SequenceSpec]] = []
    for kvec, coef in f.terms:
        lams = _char_multipliers(sys, kvec)
        if all(lam.is_integer for lam in lams):
            invariant_mass += abs(coef) ** 2
            continue
        comb = ShiftedCombination.make(lams, hs)
        moving.append((kvec, coef, SequenceSpec.floor(params, comb)))

    bits = 0
    curve: list[tuple[int, float]] = []
    weights: tuple[tuple[tuple[int, ...], complex], ...] = ()
    for n in _dyadic_points(N, curve_from):
        dev_sq = 0.0
        final = n == N
        snapshot = []
        for kvec, coef, spec in moving:
            res = partial_sum(spec, n, precision=precision, threads=threads)
            bits = max(bits, res.precision_bits)
            w = res.sum / n
            dev_sq += abs(coef) ** 2 * abs(w) ** 2
            if final:
                snapshot.append((kvec, w))
        curve.append((n, math.sqrt(dev_sq)))
        if final:
            weights = tuple(snapshot)

    wall = int((time.perf_counter() - t0) * 1000)
    return VnResult(
        system=sys,
        observable=f,
        shifts=hs,
        params=params,
        N=N,
        norm=curve[-1][1],
        curve=tuple(curve),
        weights=weights,
        invariant_mass=invariant_mass,
        precision_bits=bits,
        wall_ms=wall,
    )


# ---- sequence-vs-orbit correlations -----------------------------------------


@dataclass(frozen=True)
class ZeroEntropyResult:
    """Normalized correlation of a growth sequence against one orbit."""

    system: ModelSystem
    observable: ObservableSpec
    sequence: SequenceId
    x0: tuple[AlgebraicReal, ...]
    N: int
    value: complex
    precision_bits: int
    wall_ms: int

    @property
    def modulus(self) -> float:
        return abs(self.value)

    def summary(self) -> str:
        return (
            f"(1/N) sum a(n) f(T^n x0) = {self.value:.6g} "
            f"(modulus {self.modulus:.3e}) at N={self.N}"
        )


def _growth_spec(seq: SequenceId, params: GrowthParams, poly) -> SequenceSpec:
    """a(n) phase plus an orbit polynomial, as one engine spec."""
    coeffs = list(poly)
    while coeffs and getattr(coeffs[-1], "is_zero", False):
        coeffs.pop()
    comb = ShiftedCombination.make(
        [1 if seq.kind == "smooth" else seq.alpha], [0]
    )
    if seq.kind == "smooth":
        return SequenceSpec.smooth(params, comb, poly=tuple(coeffs))
    return SequenceSpec.floor(params, comb, poly=tuple(coeffs))


def zero_entropy_correlation(
    sys: ModelSystem,
    f: ObservableSpec,
    x0: Sequence,
    seq: SequenceId,
    N: int,
    *,
    precision="auto",
    threads: int = 1,
) -> ZeroEntropyResult:
    """(1/N) sum_n a(n) f(T^n x0) for a rotation orbit or the skew product.

    a(n) is e(G(n)) for a smooth SequenceId and e(alpha*floor(G(n))) for a
    floor one.  The orbit enters as an exact polynomial phase: nth rotation
    image x0 + n*b, nth skew image (x0 + n*alpha, y0 + n*x0 + n(n-1)/2 * alpha),
    so each character contributes one engine run with a linear or quadratic
    polynomial on top of the growth phase.
    """
    if seq.kind not in ("smooth", "floor"):
        raise ValueError(
            f"correlations take a smooth or floor growth sequence, not {seq.kind!r}"
        )
    if f.dim != sys.dim:
        raise ValueError(f"observable dim {f.dim} does not match system dim {sys.dim}")
    if N < 1:
        raise ValueError("N must be >= 1")
    params = GrowthParams(seq.c)
    point = tuple(_exact(x, "orbit start coordinate") for x in x0)
    if len(point) != sys.dim:
        raise ValueError(f"start point needs {sys.dim} coordinates")

    t0 = time.perf_counter()
    total = 0j
    bits = 0
    if sys.kind == TORUS:
        if sys.r != 1:
            raise ValueError("orbit correlations take a single rotation")
        vec = sys.rotations[0]
        for kvec, coef in f.terms:
            c0 = _dot(kvec, point)
            c1 = _dot(kvec, vec)
            res = partial_sum(
                _growth_spec(seq, params, (c0, c1)),
                N, precision=precision, threads=threads,
            )
            bits = max(bits, res.precision_bits)
            total += coef * res.sum
    elif sys.kind == SKEW:
        a = sys.alpha
        for (k1, k2), coef in f.terms:
            c2 = a.scale(Fraction(k2, 2))
            c1 = a.scale(Fraction(2 * k1 - k2, 2)) + point[0].scale(k2)
            c0 = point[0].scale(k1) + point[1].scale(k2)
            res = partial_sum(
                _growth_spec(seq, params, (c0, c1, c2)),
                N, precision=precision, threads=threads,
            )
            bits = max(bits, res.precision_bits)
            total += coef * res.sum
    else:
        raise ValueError("orbit correlations support torus rotations and the skew map")

    wall = int((time.perf_counter() - t0) * 1000)
    return ZeroEntropyResult(
        system=sys,
        observable=f,
        sequence=seq,
        x0=point,
        N=N,
        value=total / N,
        precision_bits=bits,
        wall_ms=wall,
    )


# ---- the quadratic skew demo -------------------------------------------------


@dataclass(frozen=True)
class SkewDemoResult:
    alpha: AlgebraicReal
    freq: int
    shifts: tuple[int, ...]
    N: int
    time_average: complex
    space_average: complex
    precision_bits: int
    wall_ms: int

    @property
    def deviation(self) -> float:
        return abs(self.time_average - self.space_average)

    def summary(self) -> str:
        return (
            f"time {self.time_average:.6g} vs space {self.space_average:.6g} "
            f"(deviation {self.deviation:.3e}) at N={self.N}"
        )


def _skew_poly(alpha: AlgebraicReal, freq: int, shifts: tuple[int, ...]):
    """Coefficients of freq*alpha/2 * sum_i (n+h_i)(n+h_i-1) in n."""
    r = len(shifts)
    sh = sum(shifts)
    s = Fraction(freq, 2)
    return (
        alpha.scale(s * sum(h * (h - 1) for h in shifts)),
        alpha.scale(s * (2 * sh - r)),
        alpha.scale(s * r),
    )


def skew_demo(
    alpha,
    freq: int,
    shifts: Sequence[int],
    N: int,
    *,
    precision="auto",
    threads: int = 1,
) -> SkewDemoResult:
    """Time average of prod_i e(freq * y(S^{n+h_i}(0,0))) against its integral.

    From the origin the skew orbit's second coordinate is n(n-1)/2 * alpha,
    so the product over shifted times is a single quadratic polynomial phase
    and the time average is one engine run.  The space side is exact: 1 for
    freq = 0, the full-period discrete average when alpha is rational (the
    orbit closure is a finite subgroup, enumerated directly), and 0 for
    irrational alpha with freq != 0.
    """
    a = _exact(alpha, "skew rotation number")
    hs = tuple(int(h) for h in shifts)
    if not hs:
        raise ValueError("need at least one shift")
    if N < 1:
        raise ValueError("N must be >= 1")
    freq = int(freq)

    t0 = time.perf_counter()
    poly = _skew_poly(a, freq, hs)
    res = partial_sum(
        SequenceSpec.polynomial(poly), N, precision=precision, threads=threads
    )
    time_avg = res.sum / N

    if freq == 0:
        space = 1.0 + 0j
    elif a.is_rational:
        frac = a.as_fraction()
        period = 2 * frac.denominator
        acc = 0j
        for n in range(1, period + 1):
            phase = sum(
                Fraction(freq * (n + h) * (n + h - 1), 2) * frac for h in hs
            )
            acc += cmath.exp(1j * _TWO_PI * float(phase % 1))
        space = acc / period
    else:
        space = 0j

    wall = int((time.perf_counter() - t0) * 1000)
    return SkewDemoResult(
        alpha=a,
        freq=freq,
        shifts=hs,
        N=N,
        time_average=time_avg,
        space_average=space,
        precision_bits=res.precision_bits,
        wall_ms=wall,
    )
