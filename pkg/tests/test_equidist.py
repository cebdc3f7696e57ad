"""Star discrepancy, residue histograms, and the combined report."""

import math
from fractions import Fraction

import numpy as np
import pytest

from intergrow.equidist import (
    EquiConfig,
    ResidueHistogram,
    equi_report,
    residue_frequencies,
    residue_histogram_of,
    star_discrepancy_1d,
)
from intergrow.growth import GrowthParams
from intergrow.reals import AlgebraicReal

from conftest import oracle_floor_values

PARAMS = GrowthParams(0.3)


def test_star_discrepancy_single_point():
    assert star_discrepancy_1d([0.5]) == pytest.approx(0.5)
    assert star_discrepancy_1d([0.0]) == pytest.approx(1.0)


def test_star_discrepancy_centered_grid_is_optimal():
    N = 100
    pts = [(2 * i - 1) / (2 * N) for i in range(1, N + 1)]
    assert star_discrepancy_1d(pts) == pytest.approx(1 / (2 * N))


def test_star_discrepancy_formula_on_unsorted_input():
    # niederreiter formula: max_i max(i/N - x_(i), x_(i) - (i-1)/N)
    pts = [0.9, 0.1, 0.3]
    xs = sorted(pts)
    want = max(
        max((i + 1) / 3 - xs[i], xs[i] - i / 3) for i in range(3)
    )
    assert star_discrepancy_1d(pts) == pytest.approx(want)


def test_star_discrepancy_clustered_points():
    pts = np.full(50, 0.25)
    assert star_discrepancy_1d(pts) == pytest.approx(0.75)


def test_golden_rotation_discrepancy_is_small():
    phi = (math.sqrt(5) - 1) / 2
    N = 4096
    pts = np.mod(phi * np.arange(1, N + 1), 1.0)
    d = star_discrepancy_1d(pts)
    assert d < 5 * math.log(N) / N


def test_residue_histogram_counts_and_freqs():
    vals = np.array([0, 1, 2, 0, 1, 0], dtype=np.int64)
    hist = residue_histogram_of(vals, 3, 6)
    assert hist.counts == (3, 2, 1)
    assert hist.freqs == pytest.approx((0.5, 1 / 3, 1 / 6))
    assert hist.max_deviation() == pytest.approx(0.5 - 1 / 3)
    assert sum(hist.counts) == 6
    assert [r for r in hist.rows()] == [
        (0, 3, 0.5),
        (1, 2, pytest.approx(1 / 3)),
        (2, 1, pytest.approx(1 / 6)),
    ]


def test_residue_frequencies_match_oracle():
    N = 3000
    floors = oracle_floor_values(PARAMS, 0, 1, N + 1)
    for q in (2, 5):
        hist = residue_frequencies(PARAMS, 0, q, N)
        want = [0] * q
        for f in floors:
            want[f % q] += 1
        assert list(hist.counts) == want
        assert sum(hist.counts) == N


def test_equi_config_validation():
    with pytest.raises(ValueError):
        EquiConfig(N=100, kind="bogus")
    with pytest.raises(ValueError):
        EquiConfig(N=100, kind="floor", alpha=Fraction(1, 2))  # c missing
    with pytest.raises(ValueError):
        EquiConfig(N=100, kind="floor", c=0.3)  # alpha missing
    with pytest.raises(ValueError):
        EquiConfig(N=100, kind="linear")
    with pytest.raises(ValueError):
        EquiConfig(N=1, kind="zero")
    with pytest.raises(ValueError):
        EquiConfig(N=100, kind="zero", shifts=())
    with pytest.raises(ValueError):
        EquiConfig(N=100, kind="zero", K=0)


def test_zero_kind_fails_loudly():
    report = equi_report(EquiConfig(N=500, kind="zero", K=1))
    assert not report.passed
    assert report.worst_weyl.normalized == pytest.approx(1.0)
    assert all(not e.passed for e in report.weyl)
    # all mass at 0 gives the worst possible discrepancy
    assert report.discrepancies[0][2] == pytest.approx(1.0)


def test_rational_linear_kind_fails_at_denominator_frequency():
    report = equi_report(
        EquiConfig(N=600, kind="linear", alpha=Fraction(1, 3), K=3)
    )
    assert not report.passed
    bad = {e.kvec: e.normalized for e in report.weyl}
    assert bad[(3,)] == pytest.approx(1.0)


def test_irrational_linear_kind_passes():
    beta = (math.sqrt(5) - 1) / 2
    report = equi_report(
        EquiConfig(
            N=4096,
            kind="linear",
            alpha=beta,
            K=3,
            weyl_threshold=0.05,
            disc_threshold=0.05,
        )
    )
    assert report.passed


def test_floor_kind_report_passes_at_small_scale():
    report = equi_report(
        EquiConfig(
            N=4000,
            kind="floor",
            c=0.3,
            alpha=AlgebraicReal.sqrt(2, offset=-1),
            shifts=(0, 1),
            K=1,
            weyl_threshold=0.2,
            disc_threshold=0.2,
            moduli=(2, 3),
            res_tolerance=0.1,
        )
    )
    assert report.passed
    assert len(report.weyl) == 4  # half the 3^2-1 vectors, conjugates folded
    for q, hist, dev, ok in report.histograms:
        assert sum(hist.counts) == 4000
        assert ok
    rows = report.discrepancy_rows()
    assert len(rows) == 2
    assert all(d < 0.2 for _, d in rows)


def test_smooth_kind_report_passes():
    report = equi_report(
        EquiConfig(
            N=4000,
            kind="smooth",
            c=0.3,
            shifts=(0,),
            K=2,
            weyl_threshold=0.2,
            disc_threshold=0.2,
        )
    )
    assert report.passed


def test_histograms_rejected_for_linear_kind():
    with pytest.raises(ValueError):
        equi_report(
            EquiConfig(N=100, kind="linear", alpha=0.5, moduli=(2,))
        )


def test_disc_points_cap_is_respected():
    report = equi_report(
        EquiConfig(N=3000, kind="zero", K=1, disc_points=1000)
    )
    assert report.discrepancies[0][1] == 1000


def test_summary_mentions_failure():
    report = equi_report(EquiConfig(N=500, kind="zero", K=1))
    text = report.summary()
    assert "FAILED" in text
    assert "worst weyl" in text
