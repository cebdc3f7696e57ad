"""Equidistribution diagnostics for phase sequences.

Three instruments, in increasing dimension: the exact 1-D star discrepancy
of a materialized point set, residue histograms of floor sequences on the
cyclic group Z/q, and a multidimensional Weyl battery that sweeps the
normalized exponential averages over a lattice ball of frequency vectors.
`equi_report` runs all three against configurable thresholds and aggregates
a verdict; defaults are loose enough to catch only wholesale failure,
tighter thresholds come from pilot-locked fixtures in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .expsums import SequenceSpec, partial_sum, weyl_vector_test
from .growth import GrowthParams
from .phasetable import floor_phase_table, phase_table, PhaseModel
from .reals import coerce_real

__all__ = [
    "ResidueHistogram",
    "EquiConfig",
    "EquiReport",
    "star_discrepancy_1d",
    "residue_frequencies",
    "residue_histogram_of",
    "equi_report",
]


def star_discrepancy_1d(points) -> float:
    """Exact star discrepancy D*_N of points in [0, 1).

    Sorted-points formula: D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N).
    Order of the input does not matter.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("discrepancy of an empty point set")
    if pts.min() < 0.0 or pts.max() >= 1.0:
        raise ValueError("points must lie in [0, 1)")
    pts = np.sort(pts)
    n = pts.size
    up = np.arange(1, n + 1, dtype=np.float64) / n - pts
    down = pts - np.arange(0, n, dtype=np.float64) / n
    return float(max(up.max(), down.max()))


@dataclass(frozen=True, eq=False)
class ResidueHistogram:
    """Counts of a residue sequence on Z/q; counts always sum to N."""

    q: int
    counts: tuple
    N: int

    def __post_init__(self):
        if self.q < 1 or len(self.counts) != self.q:
            raise ValueError(f"histogram shape mismatch: q={self.q}, {len(self.counts)} bins")
        if sum(self.counts) != self.N:
            raise ValueError(f"counts sum to {sum(self.counts)}, expected N={self.N}")

    @property
    def freqs(self) -> tuple:
        return tuple(c / self.N for c in self.counts)

    def max_deviation(self) -> float:
        """Largest |freq - 1/q| over the bins."""
        u = 1.0 / self.q
        return max(abs(f - u) for f in self.freqs)

    def rows(self) -> list:
        """(residue, count, freq) rows, CSV-ready."""
        return [(r, c, c / self.N) for r, c in enumerate(self.counts)]


def residue_histogram_of(values: np.ndarray, q: int, N: int) -> ResidueHistogram:
    """Histogram an int array of residues mod q (values must be in 0..q-1)."""
    counts = np.bincount(values, minlength=q)
    if counts.size != q:
        raise ValueError(f"found residue {values.max()} outside 0..{q - 1}")
    return ResidueHistogram(q=q, counts=tuple(int(c) for c in counts), N=N)


def residue_frequencies(
    params: GrowthParams, h: int, q: int, N: int, *, threads: int = 1
) -> ResidueHistogram:
    """Histogram of floor(G(n + h)) mod q over n = 1..N."""
    if q < 2:
        raise ValueError(f"modulus must be at least 2, got {q}")
    if N < 1:
        raise ValueError(f"need at least one sample, got N={N}")
    from .phasetable import residue_table

    table = residue_table(params, h, q, 1, N + 1, threads=threads)
    return residue_histogram_of(table.residues, q, N)


# ---------------------------------------------------------------------------
# the full report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquiConfig:
    """What to test and how hard to judge it.

    kind: "floor"  - coordinates frac(alpha * floor(G(n + h_i)))
          "smooth" - coordinates frac(G(n + h_i))
          "linear" - coordinates frac(beta * (n + h_i)), beta = alpha
          "zero"   - identically zero phases (the designated failure case)
    moduli: residue histograms of floor(G(n+h)) mod q for each q (floor and
    smooth kinds only; they share the same integer sequence).
    """

    N: int
    kind: str = "floor"
    c: Optional[float] = None
    alpha: object = None
    shifts: tuple = (0,)
    K: int = 3
    weyl_threshold: float = 0.5
    disc_threshold: float = 0.5
    moduli: tuple = ()
    res_tolerance: float = 0.05
    threads: int = 1
    disc_points: int = 1 << 20  # cap on materialized points per coordinate

    def __post_init__(self):
        if self.kind not in ("floor", "smooth", "linear", "zero"):
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if self.kind in ("floor", "smooth") and self.c is None:
            raise ValueError(f"kind {self.kind!r} needs a growth exponent c")
        if self.kind in ("floor", "linear") and self.alpha is None:
            raise ValueError(f"kind {self.kind!r} needs a multiplier alpha")
        if self.N < 2:
            raise ValueError("need N >= 2")
        if not self.shifts:
            raise ValueError("need at least one shift")
        if self.K < 1:
            raise ValueError("Weyl ball radius must be at least 1")


@dataclass(frozen=True)
class WeylEntry:
    kvec: tuple
    normalized: float
    passed: bool
    error: str = ""


@dataclass(frozen=True, eq=False)
class EquiReport:
    config: EquiConfig
    weyl: tuple
    discrepancies: tuple  # (shift, n_points, Dstar, passed)
    histograms: tuple  # (q, ResidueHistogram, max_deviation, passed)
    passed: bool

    @property
    def worst_weyl(self) -> Optional[WeylEntry]:
        real = [e for e in self.weyl if not e.error]
        return max(real, key=lambda e: e.normalized) if real else None

    def summary(self) -> str:
        lines = [
            f"kind={self.config.kind} N={self.config.N} shifts={self.config.shifts} "
            f"K={self.config.K} -> {'passed' if self.passed else 'FAILED'}"
        ]
        w = self.worst_weyl
        if w is not None:
            lines.append(f"worst weyl |S|/N = {w.normalized:.6g} at k={w.kvec}")
        for shift, n_pts, dstar, ok in self.discrepancies:
            lines.append(
                f"D*({n_pts} pts, shift {shift}) = {dstar:.6g} "
                f"{'ok' if ok else 'FAIL'}"
            )
        for q, _, dev, ok in self.histograms:
            lines.append(f"mod {q}: max |freq - 1/q| = {dev:.6g} {'ok' if ok else 'FAIL'}")
        return "\n".join(lines)

    def discrepancy_rows(self) -> list:
        """(N, Dstar) rows, CSV-ready."""
        return [(n_pts, dstar) for _, n_pts, dstar, _ in self.discrepancies]


def _lattice_ball(r: int, K: int) -> list:
    """Nonzero integer vectors with |k|_inf <= K, one per conjugate pair.

    Conjugation (k -> -k) mirrors the Weyl sum, so only vectors whose first
    nonzero entry is positive are enumerated.
    """
    out = []

    def rec(prefix):
        if len(prefix) == r:
            vec = tuple(prefix)
            if any(vec):
                first = next(v for v in vec if v)
                if first > 0:
                    out.append(vec)
            return
        for v in range(-K, K + 1):
            rec(prefix + [v])

    rec([])
    return out


def _weyl_normalized(cfg: EquiConfig, params: Optional[GrowthParams], kvec) -> float:
    """|S_N|/N for the frequency vector kvec under cfg's sequence kind."""
    if cfg.kind == "zero":
        spec = SequenceSpec.polynomial((0,))
        res = partial_sum(spec, cfg.N, threads=cfg.threads)
        return res.normalized
    if cfg.kind == "linear":
        beta = cfg.alpha
        b = beta if isinstance(beta, Fraction) else float(beta)
        c1 = sum(k for k in kvec) * b
        c0 = sum(k * h for k, h in zip(kvec, cfg.shifts)) * b
        spec = SequenceSpec.polynomial((c0, c1))
        res = partial_sum(spec, cfg.N, threads=cfg.threads)
        return res.normalized
    assert params is not None
    res = weyl_vector_test(
        params,
        cfg.shifts,
        kvec,
        cfg.N,
        floor_mode=(cfg.kind == "floor"),
        alpha=cfg.alpha if cfg.kind == "floor" else None,
        threads=cfg.threads,
    )
    return res.normalized


def _materialize_coordinate(cfg: EquiConfig, params: Optional[GrowthParams], h: int):
    """1-D phase points frac(x_{n+h}) for the discrepancy battery."""
    n_pts = min(cfg.N, cfg.disc_points)
    if cfg.kind == "zero":
        return np.zeros(n_pts), n_pts
    if cfg.kind == "linear":
        b = float(cfg.alpha)
        n = np.arange(1, n_pts + 1, dtype=np.float64)
        return np.mod((n + h) * b, 1.0), n_pts
    assert params is not None
    if cfg.kind == "floor":
        table = floor_phase_table(
            params, ((coerce_real(cfg.alpha), h),), 1, n_pts + 1, threads=cfg.threads
        )
    else:
        model = PhaseModel.make(params, ((1, h),))
        table = phase_table(model, 1, n_pts + 1, threads=cfg.threads)
    return table.fracs, n_pts


def equi_report(config: EquiConfig) -> EquiReport:
    """Run the Weyl battery, 1-D discrepancies, and residue histograms."""
    cfg = config
    params = GrowthParams(cfg.c) if cfg.c is not None else None
    r = len(cfg.shifts)

    entries = []
    for kvec in _lattice_ball(r, cfg.K):
        try:
            normalized = _weyl_normalized(cfg, params, kvec)
        except (ValueError, ArithmeticError) as exc:
            entries.append(WeylEntry(kvec, math.nan, False, error=str(exc)))
            continue
        entries.append(WeylEntry(kvec, normalized, normalized <= cfg.weyl_threshold))

    discs = []
    for h in cfg.shifts:
        pts, n_pts = _materialize_coordinate(cfg, params, h)
        dstar = star_discrepancy_1d(pts)
        discs.append((h, n_pts, dstar, dstar <= cfg.disc_threshold))

    hists = []
    if cfg.moduli:
        if cfg.kind not in ("floor", "smooth"):
            raise ValueError(f"residue histograms need a growth sequence, not {cfg.kind!r}")
        assert params is not None
        for q in cfg.moduli:
            hist = residue_frequencies(params, cfg.shifts[0], q, cfg.N, threads=cfg.threads)
            dev = hist.max_deviation()
            hists.append((q, hist, dev, dev <= cfg.res_tolerance))

    passed = (
        all(e.passed for e in entries)
        and all(ok for *_, ok in discs)
        and all(ok for *_, ok in hists)
    )
    return EquiReport(
        config=cfg,
        weyl=tuple(entries),
        discrepancies=tuple(discs),
        histograms=tuple(hists),
        passed=passed,
    )
