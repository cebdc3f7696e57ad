"""Correlation averages of phase sequences and the Bernoulli fingerprint.

The shift-orbit system of a bounded sequence is pinned down by its
correlation averages (1/N) sum_n prod_j x(n+h_j)^(eps_j).  For the growth
phases studied here the claim is that every nontrivial average vanishes in
the limit, which identifies the orbit system as an independent-coordinates
(Bernoulli) one.  `bernoulli_fingerprint` sweeps all queries inside a
shift/exponent box, reports the largest modulus, and probes limit stability
by recomputing the tensor at N/2; `correlation` answers one query by
delegating to the exponential-sum pipeline.

Model sequences (rotation, constant, seeded i.i.d. phases) are included as
controls: the rotation must be rejected, the i.i.d. phases must come out
near the central-limit floor.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import _kernels
from .expsums import SequenceSpec, partial_sum, weyl_vector_test
from .growth import GrowthParams
from .phasetable import PhaseModel, floor_phase_table, phase_table
from .reals import AlgebraicReal, coerce_real

__all__ = [
    "BudgetError",
    "SequenceId",
    "CorrelationQuery",
    "CorrelationTensor",
    "correlation",
    "bernoulli_fingerprint",
]

MODULUS_SLACK = 2.0 ** -40
DEFAULT_BUDGET = 10_000


class BudgetError(RuntimeError):
    """The query box exceeds the configured evaluation budget."""


@dataclass(frozen=True)
class SequenceId:
    """Which sequence the correlations are taken over.

    kind: "smooth"   - x(n) = e(G(n))
          "floor"    - x(n) = e(alpha * floor(G(n)))
          "rotation" - x(n) = e(n * alpha)            (model control)
          "constant" - x(n) = 1                        (model control)
          "iid"      - x(n) = e(theta_n), theta_n seeded uniform phases
    """

    kind: str
    c: Optional[float] = None
    alpha: object = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("smooth", "floor", "rotation", "constant", "iid"):
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if self.kind in ("smooth", "floor") and self.c is None:
            raise ValueError(f"kind {self.kind!r} needs a growth exponent")
        if self.kind in ("floor", "rotation") and self.alpha is None:
            raise ValueError(f"kind {self.kind!r} needs a multiplier")
        if self.kind == "iid" and self.seed is None:
            raise ValueError("iid phases need a seed")

    @staticmethod
    def smooth(c: float) -> "SequenceId":
        return SequenceId("smooth", c=c)

    @staticmethod
    def floor(c: float, alpha) -> "SequenceId":
        return SequenceId("floor", c=c, alpha=alpha)

    @staticmethod
    def rotation(alpha) -> "SequenceId":
        return SequenceId("rotation", alpha=alpha)

    @staticmethod
    def constant() -> "SequenceId":
        return SequenceId("constant")

    @staticmethod
    def iid(seed: int) -> "SequenceId":
        return SequenceId("iid", seed=seed)

    @property
    def rational_denominator(self) -> Optional[int]:
        """q when the floor multiplier is rational p/q, else None."""
        if self.kind != "floor":
            return None
        a = self.alpha
        if isinstance(a, Fraction):
            return a.denominator
        if isinstance(a, AlgebraicReal) and a.is_rational:
            return a.as_fraction().denominator
        return None

    def label(self) -> str:
        bits = [self.kind]
        if self.c is not None:
            bits.append(f"c={self.c}")
        if self.alpha is not None:
            bits.append(f"alpha={self.alpha}")
        if self.seed is not None:
            bits.append(f"seed={self.seed}")
        return " ".join(bits)


@dataclass(frozen=True)
class CorrelationQuery:
    """Shifts h_1..h_r (distinct) and exponents eps_1..eps_r (all nonzero)."""

    shifts: tuple
    exponents: tuple

    def __post_init__(self):
        if len(self.shifts) != len(self.exponents) or not self.shifts:
            raise ValueError("need equally many shifts and exponents, at least one each")
        if len(set(self.shifts)) != len(self.shifts):
            raise ValueError(f"shifts must be distinct, got {self.shifts}")
        if any(e == 0 for e in self.exponents):
            raise ValueError(
                "zero exponents are not part of a query; drop the coordinate instead"
            )

    @staticmethod
    def make(shifts, exponents) -> "CorrelationQuery":
        pairs = sorted(zip(shifts, exponents))
        return CorrelationQuery(
            tuple(h for h, _ in pairs), tuple(int(e) for _, e in pairs)
        )

    @property
    def r(self) -> int:
        return len(self.shifts)

    @property
    def min_shift(self) -> int:
        return min(self.shifts)

    def conjugate(self) -> "CorrelationQuery":
        return CorrelationQuery(self.shifts, tuple(-e for e in self.exponents))


def correlation(
    seq: SequenceId,
    query: CorrelationQuery,
    N: int,
    *,
    precision="auto",
    threads: int = 1,
) -> complex:
    """One correlation average (1/N) sum_n prod_j x(n+h_j)^(eps_j).

    Growth kinds reduce to a combined phase handled by the exponential-sum
    pipeline; the summation starts at the first n where every argument is
    defined and the divisor stays N.
    """
    if seq.kind == "constant":
        return complex(1.0, 0.0)
    if seq.kind == "rotation":
        b = seq.alpha if isinstance(seq.alpha, Fraction) else float(seq.alpha)
        c1 = sum(query.exponents) * b
        c0 = sum(e * h for e, h in zip(query.exponents, query.shifts)) * b
        res = partial_sum(SequenceSpec.polynomial((c0, c1)), N, threads=threads)
        return res.sum / N
    if seq.kind == "iid":
        rng = np.random.default_rng(seq.seed)
        m_lo = min(1 + query.min_shift, 1)
        theta = rng.random(N + max(query.shifts) - m_lo + 1)
        acc = np.zeros(N, dtype=np.float64)
        for h, e in zip(query.shifts, query.exponents):
            acc += e * theta[1 + h - m_lo : 1 + h - m_lo + N]
        fr = np.mod(acc, 1.0)
        re, im = _kernels.esum_fracs(fr, 0, N)
        return complex(re, im) / N
    res = weyl_vector_test(
        GrowthParams(seq.c),
        query.shifts,
        query.exponents,
        N,
        floor_mode=(seq.kind == "floor"),
        alpha=seq.alpha if seq.kind == "floor" else None,
        precision=precision,
        threads=threads,
    )
    return res.sum / N


@dataclass(frozen=True, eq=False)
class CorrelationTensor:
    """All correlation averages over a query box, plus the verdict inputs.

    entries holds every query in the box (conjugate pairs filled by
    reflection); stability is the largest |entry(N) - entry(N/2)| over the
    box when the probe ran, else None.
    """

    seq: SequenceId
    N: int
    entries: dict
    max_modulus: float
    threshold: float
    stability: Optional[float] = None
    computed: int = 0

    @property
    def consistent_with_bernoulli(self) -> bool:
        return self.max_modulus < self.threshold

    def worst_query(self) -> CorrelationQuery:
        return max(self.entries, key=lambda q: abs(self.entries[q]))

    def rows(self) -> list:
        """JSON-ready: one dict per entry, deterministic order."""
        out = []
        for q in sorted(self.entries, key=lambda q: (q.r, q.shifts, q.exponents)):
            v = self.entries[q]
            out.append(
                {
                    "shifts": list(q.shifts),
                    "exponents": list(q.exponents),
                    "re": v.real,
                    "im": v.imag,
                    "modulus": abs(v),
                }
            )
        return out


def _query_box(H: int, E: int, e_min: int = 1):
    """Canonical queries with distinct shifts in [-H,H], e_min <= |eps| <= E.

    One representative per conjugate pair (the one whose first exponent is
    positive), deterministic order.
    """
    exps = [e for e in range(-E, E + 1) if abs(e) >= e_min]
    for r in range(1, 2 * H + 2):
        for shifts in itertools.combinations(range(-H, H + 1), r):
            for es in itertools.product(exps, repeat=r):
                if es[0] > 0:
                    yield CorrelationQuery(shifts, es)


def _unit_table(seq: SequenceId, m_lo: int, m_hi: int, threads: int):
    """e(2 pi i phase(m)) for m in [m_lo, m_hi) as (re, im) arrays."""
    if seq.kind == "smooth":
        model = PhaseModel.make(GrowthParams(seq.c), ((1, 0),))
        fr = phase_table(model, m_lo, m_hi, threads=threads).fracs
    elif seq.kind == "floor":
        fr = floor_phase_table(
            GrowthParams(seq.c), ((coerce_real(seq.alpha), 0),), m_lo, m_hi,
            threads=threads,
        ).fracs
    elif seq.kind == "rotation":
        m = np.arange(m_lo, m_hi, dtype=np.float64)
        fr = np.mod(m * float(seq.alpha), 1.0)
    elif seq.kind == "constant":
        fr = np.zeros(m_hi - m_lo, dtype=np.float64)
    else:  # iid
        fr = np.random.default_rng(seq.seed).random(m_hi - m_lo)
    ang = 2.0 * math.pi * fr
    return np.cos(ang), np.sin(ang)


def bernoulli_fingerprint(
    seq: SequenceId,
    H: int,
    E: int,
    N: int,
    *,
    threshold: float = 0.05,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    probe_stability: bool = True,
) -> CorrelationTensor:
    """Every correlation over the box |h| <= H, 1 <= |eps| <= E, at level N.

    For a floor sequence with rational multiplier p/q the exponent radius is
    clipped to q-1 (larger multiples alias to integer phases).  Queries are
    evaluated once per conjugate pair off shared unit-circle tables; the
    budget caps the number of evaluated representatives.
    """
    if H < 1 or E < 1:
        raise ValueError(f"need H >= 1 and E >= 1, got H={H}, E={E}")
    if N < 4:
        raise ValueError(f"need N >= 4, got N={N}")

    E_eff = E
    q_den = seq.rational_denominator
    if q_den is not None:
        if q_den < 2:
            raise ValueError("floor multiplier must not be an integer")
        E_eff = min(E, q_den - 1)

    reps = list(_query_box(H, E_eff))
    if len(reps) > budget:
        raise BudgetError(
            f"query box has {len(reps)} representatives, budget is {budget}; "
            "raise the budget explicitly to run a box this large"
        )

    # growth phases are undefined left of m = 1, model kinds are global
    if seq.kind in ("smooth", "floor"):
        m_lo = 1
    else:
        m_lo = 1 - H
    m_hi = N + H + 1
    zre, zim = _unit_table(seq, m_lo, m_hi, threads)
    _kernels.warmup()

    half = N // 2

    def run(rep: CorrelationQuery):
        if seq.kind in ("smooth", "floor"):
            n_start = max(1, 1 - rep.min_shift)
        else:
            n_start = 1
        offs = np.asarray(rep.shifts, dtype=np.int64)
        exps = np.asarray(rep.exponents, dtype=np.int64)
        start = n_start - m_lo
        re, im = _kernels.combo_sum_shared(zre, zim, offs, exps, start, N - n_start + 1)
        out = complex(re, im) / N
        out_half = None
        if probe_stability and half >= n_start:
            re2, im2 = _kernels.combo_sum_shared(
                zre, zim, offs, exps, start, half - n_start + 1
            )
            out_half = complex(re2, im2) / half
        return out, out_half

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, reps))
    else:
        results = [run(rep) for rep in reps]

    entries: dict = {}
    stability = 0.0 if probe_stability else None
    for rep, (val, val_half) in zip(reps, results):
        if abs(val) > 1.0 + MODULUS_SLACK:
            raise ArithmeticError(
                f"correlation modulus {abs(val)} exceeds 1 for {rep}; "
                "the unit tables are corrupt"
            )
        entries[rep] = val
        entries[rep.conjugate()] = val.conjugate()
        if probe_stability and val_half is not None:
            stability = max(stability, abs(val - val_half))

    max_modulus = max(abs(v) for v in entries.values())
    return CorrelationTensor(
        seq=seq,
        N=N,
        entries=entries,
        max_modulus=max_modulus,
        threshold=threshold,
        stability=stability,
        computed=len(reps),
    )
