"""Bulk phase tables: frac(theta(n)) for n over a range, fast and certified.

theta(n) is a sum of scaled growth values plus an optional polynomial:

    theta(n) = sum_j alpha_j G(n + h_j) + sum_p pi_p n^p

The engine covers a range with blocks.  Within a block [X, X + span) it
computes one high-precision Taylor jet of theta at X, reduces the jet
coefficients mod 1 (valid because every evaluation offset is an integer),
truncates them to 256-bit fixed point, and lets a compiled Horner kernel
produce all fractional parts in the block.  Every source of error is budgeted:

* Taylor remainder, via the Lagrange form with the derivative growth bound
  |G^(s)(x)| <= 2 s! (2/N)^s G(3N) on N < x <= 2N.  The planner picks the
  block span and order so the remainder stays below 2^-56.
* Jet rounding: jets run with 288 guard bits over the coefficient magnitude.
* Fixed-point truncation: each coefficient loses < 2^-256; Horner amplifies
  coefficient k by at most span^k, and the planner enforces
  (log2(span) + 1) * order <= 160, keeping the total under ~2^-96.
* Output conversion: the top 64 bits of the fixed-point result become a
  float64, an error of at most 2^-54.

Small arguments (below 4096) go through a direct per-point mpfr path where
the block machinery would not pay for itself.

Tables are bit-for-bit reproducible: the block plan is a pure function of
(model, range, requested precision), blocks write disjoint slices, and the
thread count changes nothing but wall time.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr

from . import _kernels
from .growth import GrowthParams, ShiftedCombination, eval_G, jet_G_mpfr
from .precision import ExtReal, PrecisionError, _ctx, floor_residue, reduce_mod1, supported_width
from .reals import AlgebraicReal, CoefLike, coerce_real

DIRECT_BELOW = 4096      # growth arguments below this use the per-point path
DIRECT_CHUNK = 1024
MAX_ORDER = 28
POLY_DEG_MAX = 8
TARGET_LOG2 = 56.0       # Taylor remainder target: 2^-56
AMP_BUDGET = 160         # (log2 span + 1) * order cap, see module docstring
SPAN_LOG2_MAX = 15       # growth blocks
POLY_SPAN_LOG2_MAX = 20  # polynomial-only blocks (no remainder to control)
JET_GUARD = 288
CONV_ERR = 2.0 ** -54    # fixed point -> float64


@dataclass(frozen=True)
class PhaseModel:
    """What the table engine evaluates: growth terms plus a polynomial."""

    params: GrowthParams | None
    terms: tuple[tuple[CoefLike, int], ...]
    poly: tuple[CoefLike, ...] = ()

    def __post_init__(self):
        if self.terms and self.params is None:
            raise ValueError("growth terms need growth parameters")
        if not self.terms and not self.poly:
            raise ValueError("empty phase model")
        if len(self.poly) > POLY_DEG_MAX + 1:
            raise ValueError(f"polynomial degree is capped at {POLY_DEG_MAX}")
        shifts = [h for _, h in self.terms]
        if len(shifts) != len(set(shifts)):
            raise ValueError("growth shifts must be distinct")

    @staticmethod
    def make(
        params: GrowthParams | None,
        terms: Sequence[tuple] = (),
        poly: Sequence = (),
    ) -> "PhaseModel":
        return PhaseModel(
            params,
            tuple((coerce_real(a), int(h)) for a, h in terms),
            tuple(coerce_real(p) for p in poly),
        )

    @staticmethod
    def from_combination(params: GrowthParams, comb: ShiftedCombination) -> "PhaseModel":
        return PhaseModel(params, comb.terms)

    @property
    def min_shift(self) -> int:
        return min((h for _, h in self.terms), default=0)

    @property
    def max_shift(self) -> int:
        return max((h for _, h in self.terms), default=0)

    @property
    def n_start(self) -> int:
        """First n with every growth argument >= 1 (0 for pure polynomials)."""
        return max(1, 1 - self.min_shift) if self.terms else 0


@dataclass(frozen=True)
class BlockPlan:
    start: int
    count: int
    order: int   # 0 means the direct per-point path
    bits: int
    abs_err: float


@dataclass(frozen=True)
class PhaseTable:
    lo: int
    hi: int
    fracs: np.ndarray
    abs_err: float
    n_engine: int
    n_direct: int
    n_patched: int = 0

    def frac(self, n: int) -> float:
        if not self.lo <= n < self.hi:
            raise IndexError(f"n={n} outside table range [{self.lo}, {self.hi})")
        return float(self.fracs[n - self.lo])


def _coef_log2(coef: CoefLike) -> float:
    """log2 |coef| in double precision; -inf for an exact zero."""
    v, _ = coef.to_mpfr(64)
    if v == 0:
        return float("-inf")
    return float(gmpy2.log2(abs(v)))


def _term_mags(model: PhaseModel) -> list[float]:
    return [_coef_log2(a) for a, _ in model.terms]


def _poly_mag_log2(model: PhaseModel, poly_mags: list[float], x_top: float) -> float:
    out = float("-inf")
    lx = math.log2(max(x_top, 2.0))
    for p, m in enumerate(poly_mags):
        if m != float("-inf"):
            out = max(out, m + p * lx)
    return out


def _plan_growth_block(
    model: PhaseModel,
    term_mags: list[float],
    poly_mags: list[float],
    X: int,
    remaining: int,
) -> tuple[int, int] | None:
    """Pick (span, order) for an engine block at X, or None to fall back."""
    params = model.params
    assert params is not None
    lo_arg = X + model.min_shift
    if lo_arg < DIRECT_BELOW:
        return None
    poly_deg = len(model.poly) - 1 if model.poly else 0
    b_cap = min(SPAN_LOG2_MAX, int(math.log2(lo_arg / 8.0)))
    for b in range(b_cap, 1, -1):
        span = 1 << b
        need = float("-inf")
        neg_log_rho = float("inf")
        usable = True
        for (_, h), cmag in zip(model.terms, term_mags):
            if cmag == float("-inf"):
                continue
            n_prime = (X + span + h) / 2.0
            rho = 2.0 * span / n_prime
            if rho >= 0.5:
                usable = False
                break
            gmag = cmag + params.log2_G(3.0 * n_prime) + 1.0
            need = max(need, gmag)
            neg_log_rho = min(neg_log_rho, -math.log2(rho))
        if not usable:
            continue
        if need == float("-inf"):
            order = max(1, poly_deg)
        else:
            total = TARGET_LOG2 + need + math.log2(len(model.terms)) + 1.0
            order = max(math.ceil(total / neg_log_rho) - 1, 1, poly_deg)
        if order <= MAX_ORDER and (b + 1) * order <= AMP_BUDGET:
            return span, order
    return None


def _remainder_log2(
    model: PhaseModel, term_mags: list[float], X: int, span: int, order: int
) -> float:
    params = model.params
    if params is None or not model.terms:
        return float("-inf")
    total = float("-inf")
    for (_, h), cmag in zip(model.terms, term_mags):
        if cmag == float("-inf"):
            continue
        n_prime = (X + span + h) / 2.0
        rho = 2.0 * span / n_prime
        t = 1.0 + cmag + params.log2_G(3.0 * n_prime) + (order + 1) * math.log2(rho)
        total = t if total == float("-inf") else max(total, t) + 0.0
    if total == float("-inf"):
        return total
    return total + math.log2(max(len(model.terms), 1))


def plan_blocks(
    model: PhaseModel, lo: int, hi: int, min_bits: int = 0
) -> tuple[BlockPlan, ...]:
    """Deterministic block cover of [lo, hi); depends on nothing else."""
    if hi <= lo:
        return ()
    if model.terms and lo < model.n_start:
        raise ValueError(
            f"range starts at {lo} but the smallest valid index is {model.n_start}"
        )
    term_mags = _term_mags(model)
    poly_mags = [_coef_log2(p) for p in model.poly]
    poly_deg = len(model.poly) - 1 if model.poly else 0
    plans: list[BlockPlan] = []
    X = lo
    while X < hi:
        remaining = hi - X
        if model.terms:
            picked = _plan_growth_block(model, term_mags, poly_mags, X, remaining)
        else:
            order = max(1, poly_deg)
            b = min(POLY_SPAN_LOG2_MAX, AMP_BUDGET // (order + 1))
            picked = (1 << b, order)
        if picked is None:
            # direct region: emit pointwise chunks up to the engine boundary
            boundary = DIRECT_BELOW - model.min_shift
            count = min(DIRECT_CHUNK, remaining, max(boundary - X, 1))
            x_top = X + count + model.max_shift
            amag = max(
                max(
                    (cm + model.params.log2_G(float(x_top)) for cm in term_mags
                     if cm != float("-inf")),
                    default=0.0,
                ),
                _poly_mag_log2(model, poly_mags, float(x_top)),
                1.0,
            )
            bits = supported_width(max(math.ceil(amag) + 96, min_bits))
            err = CONV_ERR + 2.0 ** -(96 - 12)
            plans.append(BlockPlan(X, count, 0, bits, err))
            X += count
            continue
        span, order = picked
        count = min(span, remaining)
        x_top = X + span + model.max_shift
        gm = float("-inf")
        if model.params is not None:
            for (_, h), cm in zip(model.terms, term_mags):
                if cm == float("-inf"):
                    continue
                n_prime = (X + span + h) / 2.0
                gm = max(gm, 1.0 + cm + model.params.log2_G(3.0 * n_prime))
        amag = max(gm, _poly_mag_log2(model, poly_mags, float(x_top)), 1.0)
        bits = supported_width(max(math.ceil(amag) + JET_GUARD, min_bits + 96))
        rem = _remainder_log2(model, term_mags, X, span, order)
        amp = math.log2(order + 1) - 256.0 + math.log2(span) * order
        err = CONV_ERR + 2.0 ** rem + 2.0 ** amp + 2.0 ** -(JET_GUARD - 40)
        plans.append(BlockPlan(X, count, order, bits, err))
        X += count
    return tuple(plans)


def _block_coeffs(model: PhaseModel, X: int, order: int, bits: int) -> list[mpfr]:
    """Taylor coefficients of theta at X, raw mpfr at `bits` precision."""
    with _ctx(bits):
        acc = [mpfr(0) for _ in range(order + 1)]
    for coef, h in model.terms:
        cv, _ = coef.to_mpfr(bits)
        jet = jet_G_mpfr(model.params, X + h, order, bits)
        with _ctx(bits):
            for k in range(order + 1):
                acc[k] = acc[k] + cv * jet[k]
    if model.poly:
        with _ctx(bits):
            xm = mpfr(X)
            for p, pc in enumerate(model.poly):
                pv, _ = pc.to_mpfr(bits)
                if pv == 0:
                    continue
                for k in range(min(p, order) + 1):
                    acc[k] = acc[k] + pv * math.comb(p, k) * xm ** (p - k)
    return acc


def _limbs_from_coeffs(coeffs: list[mpfr], bits: int) -> np.ndarray:
    """Reduce each coefficient mod 1 and truncate to 8x32-bit limbs."""
    out = np.zeros((len(coeffs), 8), dtype=np.uint64)
    mask = (1 << 256) - 1
    with _ctx(bits):
        for k, a in enumerate(coeffs):
            f = gmpy2.frac(a)
            if f < 0:
                f += 1
            z = int(gmpy2.floor(gmpy2.mul_2exp(f, 256))) & mask
            for i in range(8):
                out[k, i] = (z >> (32 * i)) & 0xFFFFFFFF
    return out


def _run_engine_block(model: PhaseModel, plan: BlockPlan, out: np.ndarray) -> None:
    coeffs = _block_coeffs(model, plan.start, plan.order, plan.bits)
    limbs = _limbs_from_coeffs(coeffs, plan.bits)
    _kernels.horner_fracs(limbs, plan.order, plan.count, out)


def _run_direct_block(model: PhaseModel, plan: BlockPlan, out: np.ndarray) -> None:
    bits = plan.bits
    with _ctx(bits):
        coefs = [coef.to_mpfr(bits)[0] for coef, _ in model.terms]
        polyc = [p.to_mpfr(bits)[0] for p in model.poly]
        exponent = model.params.exponent if model.params is not None else 0.0
        for i in range(plan.count):
            n = plan.start + i
            acc = mpfr(0)
            for cv, (_, h) in zip(coefs, model.terms):
                x = n + h
                if x == 1:
                    acc += cv
                else:
                    acc += cv * gmpy2.exp(gmpy2.log(mpfr(x)) ** exponent)
            if polyc:
                nm = mpfr(n)
                acc += sum(pv * nm ** p for p, pv in enumerate(polyc) if pv != 0)
            f = gmpy2.frac(acc)
            if f < 0:
                f += 1
            fl = float(f)
            out[i] = fl if fl < 1.0 else 0.0


def phase_table(
    model: PhaseModel,
    lo: int,
    hi: int,
    *,
    threads: int = 1,
    min_bits: int = 0,
) -> PhaseTable:
    """Fractional parts of theta(n) for n in [lo, hi)."""
    plans = plan_blocks(model, lo, hi, min_bits)
    fracs = np.empty(hi - lo, dtype=np.float64)

    def run(plan: BlockPlan) -> None:
        sl = fracs[plan.start - lo : plan.start - lo + plan.count]
        if plan.order == 0:
            _run_direct_block(model, plan, sl)
        else:
            _run_engine_block(model, plan, sl)

    if threads > 1 and len(plans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(run, plans))
    else:
        for plan in plans:
            run(plan)
    abs_err = max((p.abs_err for p in plans), default=0.0)
    n_eng = sum(p.count for p in plans if p.order > 0)
    n_dir = sum(p.count for p in plans if p.order == 0)
    return PhaseTable(lo, hi, fracs, abs_err, n_eng, n_dir)


# ---------------------------------------------------------------------------
# floor phases:  sum_i lambda_i * floor(G(n + h_i))  (+ optional polynomial)
# ---------------------------------------------------------------------------


def _coef_is_integer(coef: CoefLike) -> bool:
    return isinstance(coef, AlgebraicReal) and coef.is_integer


def _pointwise_floor_poly(
    params: GrowthParams,
    floor_terms: Sequence[tuple[CoefLike, int]],
    poly: Sequence[CoefLike],
    n: int,
    bits: int,
) -> float:
    """Certified frac(sum lambda_i floor(G(n+h_i)) + poly(n)) at one point."""
    for attempt in range(3):
        b = bits + 128 * attempt
        try:
            acc: ExtReal | None = None
            for lam, h in floor_terms:
                fl = eval_G(params, n + h, b).floor_certified()
                term = ExtReal.from_coef(lam, b) * ExtReal.exact(fl, b)
                acc = term if acc is None else acc + term
            for p, pc in enumerate(poly):
                term = ExtReal.from_coef(pc, b) * ExtReal.exact(n ** p, b)
                acc = term if acc is None else acc + term
            return reduce_mod1(acc).as_float()
        except PrecisionError:
            if attempt == 2:
                raise
    raise AssertionError("unreachable")


def floor_phase_table(
    params: GrowthParams,
    floor_terms: Sequence[tuple[CoefLike, int]],
    lo: int,
    hi: int,
    *,
    poly: Sequence = (),
    threads: int = 1,
    min_bits: int = 0,
) -> PhaseTable:
    """Phase table for floor sequences, built from smooth tables.

    Uses floor(G) = G - frac(G):  the phase of sum_i lambda_i floor(G(n+h_i))
    equals frac( sum_i [frac(lambda_i G(n+h_i)) - lambda_i frac(G(n+h_i))] ),
    so two smooth tables per term suffice.  Points where frac(G(n+h_i)) sits
    within the error bound of 0 or 1 are ambiguous (the floor may be off by
    one there) and are recomputed with the certified per-point path.
    """
    terms = [(coerce_real(lam), int(h)) for lam, h in floor_terms]
    polyc = tuple(coerce_real(p) for p in poly)
    if not terms:
        raise ValueError("floor phase needs at least one term")
    count = hi - lo
    if count <= 0:
        raise ValueError("empty range")

    rows: list[np.ndarray] = []
    weights: list[float] = []
    patch_mask = np.zeros(count, dtype=bool)
    abs_err = 0.0
    n_eng = n_dir = 0
    guard_tables: list[tuple[np.ndarray, float]] = []

    for lam, h in terms:
        if _coef_is_integer(lam):
            # an integer multiple of an integer sequence is 0 mod 1
            continue
        t_lam = phase_table(
            PhaseModel(params, ((lam, h),)), lo, hi, threads=threads, min_bits=min_bits
        )
        rows.append(t_lam.fracs)
        weights.append(1.0)
        abs_err += t_lam.abs_err
        n_eng += t_lam.n_engine
        n_dir += t_lam.n_direct
        lam_f = float(lam.to_mpfr(64)[0])
        t_one = phase_table(
            PhaseModel(params, ((coerce_real(1), h),)),
            lo, hi, threads=threads, min_bits=min_bits,
        )
        rows.append(t_one.fracs)
        weights.append(-lam_f)
        abs_err += abs(lam_f) * t_one.abs_err + abs(lam_f) * 2.0 ** -52
        guard_tables.append((t_one.fracs, t_one.abs_err))

    if polyc:
        t_poly = phase_table(
            PhaseModel(None, (), polyc), lo, hi, threads=threads, min_bits=min_bits
        )
        rows.append(t_poly.fracs)
        weights.append(1.0)
        abs_err += t_poly.abs_err

    out = np.empty(count, dtype=np.float64)
    if rows:
        table2 = np.ascontiguousarray(np.vstack(rows))
        w = np.asarray(weights, dtype=np.float64)
        offs = np.zeros(len(rows), dtype=np.int64)
        _kernels.weighted_frac_combine(table2, w, offs, 0, count, out)
        abs_err += (len(rows) + 1) * 2.0 ** -52
    else:
        out.fill(0.0)

    # ambiguity near the floor discontinuity: frac(G) within guard of 0 or 1
    for arr, err in guard_tables:
        guard = 64.0 * err + 2.0 ** -44
        patch_mask |= (arr < guard) | (arr > 1.0 - guard)
    patched = int(patch_mask.sum())
    if patched:
        bits = max(
            supported_width(
                math.ceil(params.log2_G(hi + max(h for _, h in terms))) + 96
            ),
            min_bits,
        )
        for idx in np.nonzero(patch_mask)[0]:
            out[idx] = _pointwise_floor_poly(params, terms, polyc, lo + int(idx), bits)
    return PhaseTable(lo, hi, out, abs_err, n_eng, n_dir, patched)


# ---------------------------------------------------------------------------
# residue tables:  floor(G(n + shift)) mod q, exactly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidueTable:
    lo: int
    hi: int
    q: int
    residues: np.ndarray
    n_patched: int

    def residue(self, n: int) -> int:
        if not self.lo <= n < self.hi:
            raise IndexError(f"n={n} outside table range [{self.lo}, {self.hi})")
        return int(self.residues[n - self.lo])


def residue_table(
    params: GrowthParams,
    shift: int,
    q: int,
    lo: int,
    hi: int,
    *,
    threads: int = 1,
) -> ResidueTable:
    """floor(G(n + shift)) mod q via floor(q * frac(G/q)), straddle-checked."""
    if q < 1:
        raise ValueError("modulus must be a positive integer")
    if q == 1:
        return ResidueTable(lo, hi, 1, np.zeros(hi - lo, dtype=np.int64), 0)
    model = PhaseModel(params, ((coerce_real(Fraction(1, q)), shift),))
    t = phase_table(model, lo, hi, threads=threads)
    scaled = t.fracs * float(q)
    res = np.floor(scaled).astype(np.int64)
    frac_part = scaled - res
    guard = 64.0 * q * t.abs_err + 2.0 ** -40
    bad = (frac_part < guard) | (frac_part > 1.0 - guard)
    res %= q
    patched = int(bad.sum())
    if patched:
        bits = supported_width(math.ceil(params.log2_G(hi + shift)) + 96)
        for idx in np.nonzero(bad)[0]:
            g = eval_G(params, lo + int(idx) + shift, bits)
            _, r = floor_residue(g, q)
            res[idx] = r
    return ResidueTable(lo, hi, q, res, patched)
