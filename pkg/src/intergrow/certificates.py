"""Grid certificates for derivative envelopes of the growth scale.

The asymptotic estimates behind the sum bounds come with non-effective
thresholds ("for x large enough").  This module replaces those thresholds
empirically: each inequality is evaluated on a logarithmic grid over a
dyadic window at certified precision, and the result is a `BoundCertificate`
recording the worst margin, whether every grid point passed, and the
smallest grid point from which the tail of the grid is failure-free.
A certificate never extrapolates beyond its grid.

Also here: the integer window of derivative orders on which a scaled
combination is provably sandwiched between two exponential envelopes
(`admissible_s_set`), and the parameter bundle `karacuba_params` that
decides whether that window is large enough relative to the required
order count k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import gmpy2
from gmpy2 import mpfr

from .diffcalc import DiffPoly, change_of_basis
from .growth import GrowthParams, ShiftedCombination, eval_G, jet_F, jet_G
from .precision import ExtReal, required_bits, supported_width

__all__ = [
    "BoundCertificate",
    "SInterval",
    "KaracubaParams",
    "certify_single",
    "certify_combination",
    "certify_sandwich",
    "certify_combined",
    "admissible_s_set",
    "karacuba_params",
]

LEMMA_IDS = frozenset(
    ["G_lower", "G_upper", "F_lower", "F_upper", "sandwich_delta", "combined_a", "combined_b"]
)

DEFAULT_GRID = 256
GUARD_BITS = 64
THETA0 = 0.75


@dataclass(frozen=True)
class BoundCertificate:
    """Result of checking one inequality on a logarithmic grid.

    margin is the minimum over all checked (x, s) pairs of
    satisfied_side / bound, so passed == (margin >= 1) over the whole grid.
    x0_empirical is the smallest grid point from which every later grid
    point passes (None when the last grid point fails).  Pairs excluded by
    the inequality's own hypothesis are counted in `skipped`, not checked.
    """

    lemma_id: str
    N: int
    x_lo: float
    x_hi: float
    grid_points: int
    s_min: int
    s_max: int
    margin: float
    passed: bool
    x0_empirical: Optional[float]
    skipped: int = 0
    note: str = ""

    def __post_init__(self):
        if self.lemma_id not in LEMMA_IDS:
            raise ValueError(f"unknown lemma id {self.lemma_id!r}")

    def summary(self) -> str:
        state = "passed" if self.passed else "FAILED"
        x0 = "-" if self.x0_empirical is None else f"{self.x0_empirical:.6g}"
        return (
            f"{self.lemma_id}: N={self.N} grid={self.grid_points} "
            f"s={self.s_min}..{self.s_max} margin={self.margin:.4g} "
            f"x0={x0} skipped={self.skipped} {state}"
        )

    def as_dict(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "N": self.N,
            "x_lo": self.x_lo,
            "x_hi": self.x_hi,
            "grid_points": self.grid_points,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "margin": self.margin,
            "passed": self.passed,
            "x0_empirical": self.x0_empirical,
            "skipped": self.skipped,
            "note": self.note,
        }


def _log_grid(lo: float, hi: float, count: int, *, open_left: bool) -> list:
    """count points, log-spaced; (lo, hi] when open_left else [lo, hi]."""
    if not hi > lo > 0:
        raise ValueError(f"bad grid window [{lo}, {hi}]")
    if count < 2:
        raise ValueError("grids need at least 2 points")
    ratio = hi / lo
    if open_left:
        pts = [lo * ratio ** ((i + 1) / count) for i in range(count)]
    else:
        pts = [lo * ratio ** (i / (count - 1)) for i in range(count)]
        pts[0] = float(lo)
    pts[-1] = float(hi)
    return pts


def _certificate(lemma_id, N, grid, s_min, s_max, rows, skipped=0, note=""):
    """Assemble a certificate from per-point results.

    rows: list of (grid_index, ratio) with ratio = satisfied_side / bound.
    """
    if rows:
        margin = min(r for _, r in rows)
        fail = {i for i, r in rows if not r >= 1.0}
    else:
        margin = math.inf
        fail = set()
        note = (note + "; " if note else "") + "no grid pair met the hypothesis"
    x0: Optional[float] = grid[0]
    if fail:
        last_bad = max(fail)
        x0 = grid[last_bad + 1] if last_bad + 1 < len(grid) else None
    return BoundCertificate(
        lemma_id=lemma_id,
        N=N,
        x_lo=grid[0],
        x_hi=grid[-1],
        grid_points=len(grid),
        s_min=s_min,
        s_max=s_max,
        margin=margin,
        passed=margin >= 1.0,
        x0_empirical=x0,
        skipped=skipped,
        note=note,
    )


def _cert_bits(params: GrowthParams, N: int) -> int:
    # the largest magnitude in any envelope below is G(3N)
    return supported_width(required_bits(3 * N, params.c) + GUARD_BITS)


def certify_single(
    params: GrowthParams, N: int, s_max: int, grid_density: int = DEFAULT_GRID
) -> tuple[BoundCertificate, BoundCertificate]:
    """Check both derivative envelopes of G on a log grid over (N, 2N].

    Lower: G^(s)(x)/s! >= G(x) / (2 x^s), only where (c+1) log^c x >= s
    (pairs outside that hypothesis are skipped).  Upper:
    |G^(s)(x)/s!| <= 2 (2/N)^s G(3N) for every pair.  Returns
    (lower_certificate, upper_certificate).
    """
    if N < 10:
        raise ValueError(f"window start must be at least 10, got {N}")
    if not 1 <= s_max <= 64:
        raise ValueError(f"jet order {s_max} out of range 1..64")
    bits = _cert_bits(params, N)
    grid = _log_grid(float(N), float(2 * N), grid_density, open_left=True)

    g3n = eval_G(params, 3 * N, bits)
    step = ExtReal.exact(2, bits) / N
    upper_env = []
    b = g3n * 2
    for _ in range(s_max):
        b = b * step
        upper_env.append(b)

    low_rows: list = []
    up_rows: list = []
    skipped = 0
    for i, x in enumerate(grid):
        jet = jet_G(params, ExtReal.exact(x, bits), s_max, bits)
        hyp_cap = params.exponent * math.log(x) ** params.c
        xe = ExtReal.exact(x, bits)
        pw = ExtReal.exact(1, bits)
        for s in range(1, s_max + 1):
            pw = pw * xe
            if s <= hyp_cap:
                low_rows.append((i, float(((jet[s] * pw) * 2 / jet[0]).value)))
            else:
                skipped += 1
            up_rows.append((i, float((upper_env[s - 1] / abs(jet[s])).value)))

    lower = _certificate("G_lower", N, grid, 1, s_max, low_rows, skipped=skipped)
    upper = _certificate("G_upper", N, grid, 1, s_max, up_rows)
    return lower, upper


def certify_combination(
    params: GrowthParams,
    comb: ShiftedCombination,
    N: int,
    s_max: int,
    grid_density: int = DEFAULT_GRID,
    *,
    poly: Optional[DiffPoly] = None,
) -> tuple[BoundCertificate, BoundCertificate]:
    """Check both derivative envelopes of F = sum_j alpha_j G(. + h_j).

    Lower: F^(s)(x)/s! >= (d_tau/4) G(x) / x^(s+tau) on [N+a, 2N-a] with
    a = max |h_j|; the combination is sign-normalized first (tau, d_tau from
    its difference expansion, d_tau > 0).  The lower bound rests on the
    (s+tau)-th derivative of G, so pairs with (c+1) log^c x < s + tau are
    outside its hypothesis and get skipped (for tau = 0 this is exactly the
    single-G rule).  Upper: |F^(s)(x)/s!| <= C (2/N)^s G(3N) with
    C = sum |alpha_j|, checked for every pair.  Returns (lower, upper).
    """
    if N < 10:
        raise ValueError(f"window start must be at least 10, got {N}")
    if not 1 <= s_max <= 64:
        raise ValueError(f"jet order {s_max} out of range 1..64")
    if poly is None:
        poly = change_of_basis(comb)
    a = comb.max_abs_shift
    lo, hi = float(N + a), float(2 * N - a)
    if not hi > lo:
        raise ValueError(f"shifts of size {a} leave no room inside [{N}, {2 * N}]")
    bits = _cert_bits(params, N)
    grid = _log_grid(lo, hi, grid_density, open_left=False)

    sign = -1 if poly.sign_flipped else 1
    tau = poly.tau
    d_tau = poly.d_tau if isinstance(poly.d_tau, Fraction) else float(poly.d_tau)
    d4 = ExtReal.exact(d_tau, bits) / 4
    coeff_bound = comb.coeff_l1()

    g3n = eval_G(params, 3 * N, bits)
    step = ExtReal.exact(2, bits) / N
    upper_env = []
    b = g3n * coeff_bound
    for _ in range(s_max):
        b = b * step
        upper_env.append(b)

    low_rows: list = []
    up_rows: list = []
    skipped = 0
    for i, x in enumerate(grid):
        xe = ExtReal.exact(x, bits)
        jet = jet_F(params, comb, xe, s_max, bits)
        gx = eval_G(params, xe, bits)
        hyp_cap = params.exponent * math.log(x) ** params.c
        pw = xe ** tau
        for s in range(1, s_max + 1):
            pw = pw * xe
            if s + tau <= hyp_cap:
                v = jet.coeffs[s] * sign
                low_rows.append((i, float(((v * pw) / (d4 * gx)).value)))
            else:
                skipped += 1
            up_rows.append((i, float((upper_env[s - 1] / abs(jet.coeffs[s])).value)))

    note = f"tau={tau} d_tau/4={float(d_tau) / 4:.6g} a={a}"
    lower = _certificate("F_lower", N, grid, 1, s_max, low_rows, skipped=skipped, note=note)
    upper = _certificate("F_upper", N, grid, 1, s_max, up_rows, note=f"C={coeff_bound:.6g}")
    return lower, upper


def certify_sandwich(
    params: GrowthParams,
    N: int,
    *,
    s_max: int = 2,
    k_max: int = 3,
    grid_density: int = 64,
) -> BoundCertificate:
    """Check G^(s+k)(x) <= Delta^k G^(s)(x) <= G^(s+k)(x+k) on (N, 2N].

    Both one-sided ratios enter the margin, so margin >= 1 certifies the
    full two-sided sandwich at every sampled (x, s, k), s = 0..s_max,
    k = 1..k_max.  The sandwich needs G^(s+k) increasing, which holds on
    the zone (c+1) log^c x >= s + k; pairs outside it are skipped (they
    genuinely fail, by a hair, once that derivative turns over).
    """
    if N < 10:
        raise ValueError(f"window start must be at least 10, got {N}")
    if s_max < 0 or not 1 <= k_max <= 16 or s_max + k_max > 64:
        raise ValueError(f"bad order window s_max={s_max} k_max={k_max}")
    bits = _cert_bits(params, N)
    grid = _log_grid(float(N), float(2 * N), grid_density, open_left=True)
    order = s_max + k_max

    rows: list = []
    skipped = 0
    for i, x in enumerate(grid):
        xe = ExtReal.exact(x, bits)
        jets = [jet_G(params, xe + j, order, bits) for j in range(k_max + 1)]
        hyp_cap = params.exponent * math.log(x) ** params.c
        for s in range(s_max + 1):
            sfac = math.factorial(s)
            # derivatives, not jet coefficients: G^(s)(x+j) = s! * jets[j][s]
            ds = [jets[j][s] * sfac for j in range(k_max + 1)]
            for k in range(1, k_max + 1):
                if s + k > hyp_cap:
                    skipped += 1
                    continue
                delta = None
                for j in range(k + 1):
                    term = ds[j] * ((-1) ** (k - j) * math.comb(k, j))
                    delta = term if delta is None else delta + term
                hi_d = jets[k][s + k] * math.factorial(s + k)
                lo_d = jets[0][s + k] * math.factorial(s + k)
                rows.append((i, float((hi_d / delta).value)))
                rows.append((i, float((delta / lo_d).value)))

    return _certificate(
        "sandwich_delta", N, grid, 0, s_max, rows, skipped=skipped, note=f"k=1..{k_max}"
    )


def certify_combined(
    params: GrowthParams,
    comb: ShiftedCombination,
    N: int,
    A: float,
    vartheta: float,
    s_range: tuple[int, int],
    *,
    poly: Optional[DiffPoly] = None,
    grid_density: int = 64,
) -> tuple[BoundCertificate, BoundCertificate]:
    """Check the two-sided envelope N^(-theta s) <= |alpha F^(s)(x)/s!| <= N^(-theta s / 2).

    alpha = N^(-A); x runs over [N+a, 2N-a] and s over the closed interval
    s_range (usually from admissible_s_set).  Returns the certificates for
    the lower side (combined_a) and the upper side (combined_b).
    """
    s_lo, s_hi = s_range
    if not 1 <= s_lo <= s_hi <= 64:
        raise ValueError(f"bad derivative window {s_range}")
    if not 0.0 < vartheta < 1.0:
        raise ValueError(f"vartheta must be in (0, 1), got {vartheta}")
    if poly is None:
        poly = change_of_basis(comb)
    a = comb.max_abs_shift
    lo, hi = float(N + a), float(2 * N - a)
    bits = _cert_bits(params, N)
    grid = _log_grid(lo, hi, grid_density, open_left=False)

    alpha = ExtReal.exact(N, bits) ** float(-A)
    nlog = ExtReal.exact(N, bits).log()
    lo_env = [(nlog * float(-vartheta * s)).exp() for s in range(s_lo, s_hi + 1)]
    hi_env = [(nlog * float(-vartheta * s / 2.0)).exp() for s in range(s_lo, s_hi + 1)]

    a_rows: list = []
    b_rows: list = []
    for i, x in enumerate(grid):
        jet = jet_F(params, comb, ExtReal.exact(x, bits), s_hi, bits)
        for j, s in enumerate(range(s_lo, s_hi + 1)):
            v = abs(jet.coeffs[s]) * alpha
            a_rows.append((i, float((v / lo_env[j]).value)))
            b_rows.append((i, float((hi_env[j] / v).value)))

    note = f"A={A:.6g} vartheta={vartheta:.6g}"
    cert_a = _certificate("combined_a", N, grid, s_lo, s_hi, a_rows, note=note)
    cert_b = _certificate("combined_b", N, grid, s_lo, s_hi, b_rows, note=note)
    return cert_a, cert_b


# ---------------------------------------------------------------------------
# derivative-order windows and the parameter bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SInterval:
    """Integer window [lo, hi] of derivative orders; empty when size == 0.

    lo_raw/hi_raw keep the pre-rounding endpoint values so they can be
    compared against an independent re-derivation; cap is the unconditional
    ceiling floor((c+1) log^c N) already folded into hi.
    """

    lo: int
    hi: int
    size: int
    cap: int
    lo_raw: float
    hi_raw: float

    @property
    def empty(self) -> bool:
        return self.size == 0

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))


ENDPOINT_BITS = 128


def admissible_s_set(
    params: GrowthParams,
    N: int,
    A: float,
    vartheta: float,
    *,
    gamma: float = 0.5,
    tau: int = 0,
    d: float = 0.25,
    coeff_bound: float = 1.0,
    upper_variant: str = "proof",
) -> SInterval:
    """Integer window of orders s on which the two-sided envelope can hold.

    Lower endpoint: ceil of
        ((log^(c+1)(3N) + log C) / log N - A) / (1 - vartheta/2 - log 2 / log N),
    upper endpoint: floor of
        (log^c N - A - tau + log d / log N) / (1 - vartheta),
    then intersected with s <= (c+1) log^c N and s >= 1.  An empty window is
    a legitimate outcome, not an error.

    upper_variant selects the first slot of the upper endpoint: "proof"
    uses log^c N (default), "statement" uses log^(gamma-1) N.  Endpoints are
    evaluated at 128-bit precision before rounding.
    """
    if N < 16:
        raise ValueError(f"need N >= 16 for a positive lower denominator, got {N}")
    if not 0.0 < vartheta < 1.0:
        raise ValueError(f"vartheta must be in (0, 1), got {vartheta}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if not d > 0.0 or not coeff_bound > 0.0 or tau < 0:
        raise ValueError(f"bad combination facts d={d} C={coeff_bound} tau={tau}")
    if upper_variant not in ("proof", "statement"):
        raise ValueError(f"unknown upper variant {upper_variant!r}")

    with gmpy2.context(precision=ENDPOINT_BITS):
        L = gmpy2.log(mpfr(N))
        lc = L ** mpfr(params.c)
        num = (gmpy2.log(mpfr(3 * N)) ** mpfr(params.exponent) + gmpy2.log(mpfr(coeff_bound))) / L
        num = num - mpfr(A)
        den = 1 - mpfr(vartheta) / 2 - gmpy2.log(mpfr(2)) / L
        lo_raw = num / den
        slot = lc if upper_variant == "proof" else L ** (mpfr(gamma) - 1)
        hi_raw = (slot - mpfr(A) - tau + gmpy2.log(mpfr(d)) / L) / (1 - mpfr(vartheta))
        cap = int(gmpy2.floor(mpfr(params.exponent) * lc))
        lo_i = int(gmpy2.ceil(lo_raw))
        hi_i = int(gmpy2.floor(hi_raw))

    lo = max(lo_i, 1)
    hi = min(hi_i, cap)
    return SInterval(
        lo=lo,
        hi=hi,
        size=max(0, hi - lo + 1),
        cap=cap,
        lo_raw=float(lo_raw),
        hi_raw=float(hi_raw),
    )


@dataclass(frozen=True)
class KaracubaParams:
    """Parameter bundle for the derivative-sandwich sum bound.

    admissible records whether the worst derivative window over the
    scaling-exponent range reaches the required fraction delta of k.
    """

    c: float
    N: int
    theta: float
    Theta: float
    Theta0: float
    delta: float
    k: int
    A: float
    s_range: tuple[int, int]
    S_size: int
    admissible: bool
    range_preset: str = "proof"

    def __post_init__(self):
        if not 0.0 < self.Theta < self.theta < self.Theta0 < 1.0:
            raise ValueError(
                f"need 0 < Theta < theta < Theta0 < 1, got "
                f"{self.Theta}, {self.theta}, {self.Theta0}"
            )
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")


def karacuba_params(
    params: GrowthParams,
    gamma: float,
    vartheta: float,
    C_sum: float,
    N: int,
    *,
    tau: int = 0,
    d: float = 0.25,
    range_preset: str = "proof",
    upper_variant: str = "proof",
    sweep_points: int = 33,
) -> KaracubaParams:
    """Assemble the derivative-sandwich parameters at level N.

    Theta0 = 3/4 and Theta = vartheta/2 always;
    delta = (1/20)(1-gamma)(1/(1-vartheta) - 1/(1-vartheta/2));
    k = floor((9 + C_sum) log^c N) + 1.  S_size is the minimum window size
    from admissible_s_set as the scaling exponent A sweeps its admissible
    range, and admissible = (S_size >= delta k).

    range_preset picks the left end of the A-range: "proof" uses
    K = 0.98 (c+1)(1-vartheta), "statement" uses K = 0.98 c.
    """
    if not 0.0 < vartheta < 1.0 / 3.0:
        raise ValueError(f"vartheta must be in (0, 1/3), got {vartheta}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if not C_sum > 0.0:
        raise ValueError(f"coefficient bound must be positive, got {C_sum}")
    if range_preset not in ("proof", "statement"):
        raise ValueError(f"unknown range preset {range_preset!r}")
    if sweep_points < 2:
        raise ValueError("the A-range sweep needs at least 2 points")

    Theta = vartheta / 2.0
    delta = (1.0 - gamma) * (1.0 / (1.0 - vartheta) - 1.0 / (1.0 - Theta)) / 20.0
    logc = math.log(N) ** params.c
    k = math.floor((9.0 + C_sum) * logc) + 1

    if range_preset == "proof":
        K = 0.98 * params.exponent * (1.0 - vartheta)
    else:
        K = 0.98 * params.c
    A_lo = -K * logc
    A_hi = gamma * math.log(2 * N) ** params.exponent / math.log(N)

    worst: Optional[SInterval] = None
    worst_A = A_lo
    for i in range(sweep_points):
        A = A_lo + (A_hi - A_lo) * i / (sweep_points - 1)
        win = admissible_s_set(
            params,
            N,
            A,
            vartheta,
            gamma=gamma,
            tau=tau,
            d=d,
            coeff_bound=C_sum,
            upper_variant=upper_variant,
        )
        if worst is None or win.size < worst.size:
            worst, worst_A = win, A

    assert worst is not None
    return KaracubaParams(
        c=params.c,
        N=N,
        theta=vartheta,
        Theta=Theta,
        Theta0=THETA0,
        delta=delta,
        k=k,
        A=worst_A,
        s_range=(worst.lo, worst.hi),
        S_size=worst.size,
        admissible=worst.size >= delta * k,
        range_preset=range_preset,
    )
