"""Model dynamical systems: projections, ergodic averages, orbit sums."""

import cmath
import math
from fractions import Fraction

import mpmath
import pytest

from intergrow.dynamics import (
    ModelSystem,
    ObservableSpec,
    box_average,
    invariant_projection,
    skew_demo,
    spectral_mass,
    vn_average,
    zero_entropy_correlation,
)
from intergrow.expsums import SequenceSpec, partial_sum
from intergrow.furstenberg import SequenceId
from intergrow.growth import GrowthParams, ShiftedCombination
from intergrow.reals import AlgebraicReal, LazyReal, lazy_mul

from conftest import mp_G

ROOT2M1 = AlgebraicReal.sqrt(2, offset=-1)
ROOT3M1 = AlgebraicReal.sqrt(3, offset=-1)


def test_system_factories_and_validation():
    t = ModelSystem.torus([[ROOT2M1, 0], [0, ROOT3M1]])
    assert t.dim == 2 and t.r == 2 and t.commuting
    cyc = ModelSystem.cyclic(6, [1, 2])
    assert cyc.r == 2 and cyc.dim == 1
    sk = ModelSystem.skew(Fraction(1, 3))
    assert sk.dim == 2 and sk.r == 1
    with pytest.raises(ValueError):
        ModelSystem.torus([])
    with pytest.raises(ValueError):
        ModelSystem.torus([[ROOT2M1], [ROOT2M1, 0]])
    with pytest.raises(ValueError):
        ModelSystem.cyclic(0, [1])


def test_lazy_coordinates_rejected():
    lazy = lazy_mul(ROOT2M1, ROOT2M1)
    assert isinstance(lazy, LazyReal)
    with pytest.raises(TypeError):
        ModelSystem.torus([[lazy]])
    with pytest.raises(TypeError):
        ModelSystem.skew(lazy)


def test_observable_make_merges_and_sorts():
    f = ObservableSpec.make(
        1, [((2,), 1.0), ((1,), 0.5), ((2,), -1.0), ((3,), 0.25)]
    )
    assert f.coefficient((2,)) == 0j  # merged away
    assert [k for k, _ in f.terms] == [(1,), (3,)]
    assert f.l2_norm_sq == pytest.approx(0.25 + 0.0625)
    assert not f.is_zero
    assert ObservableSpec.make(1, []).is_zero


def test_observable_validation():
    with pytest.raises(ValueError):
        ObservableSpec(1, (((1, 2), 1.0),))
    with pytest.raises(ValueError):
        ObservableSpec(1, (((1,), 1.0), ((1,), 2.0)))
    with pytest.raises(ValueError):
        ObservableSpec(1, (((1,), 0j),))


def test_observable_inner_product():
    f = ObservableSpec.make(1, [((1,), 1.0), ((2,), 2.0)])
    g = ObservableSpec.make(1, [((2,), 1j)])
    assert f.inner(g) == 2.0 * (-1j)
    with pytest.raises(ValueError):
        f.inner(ObservableSpec.constant(2))


def test_projection_keeps_constants():
    sys = ModelSystem.torus([[ROOT2M1]])
    one = ObservableSpec.constant(1)
    assert invariant_projection(sys, one).terms == one.terms


def test_projection_kills_moving_character_exactly():
    sys = ModelSystem.torus([[ROOT2M1]])
    f = ObservableSpec.character((1,))
    assert invariant_projection(sys, f).is_zero
    assert spectral_mass(sys, f) == 0.0


def test_projection_detects_rational_resonance():
    sys = ModelSystem.torus([[AlgebraicReal(Fraction(1, 2))]])
    assert not invariant_projection(sys, ObservableSpec.character((2,))).is_zero
    assert invariant_projection(sys, ObservableSpec.character((1,))).is_zero


def test_projection_exact_radical_cancellation():
    # k = (1, 1) against beta = (sqrt2, 1 - sqrt2): k.beta = 1, invariant
    beta = (AlgebraicReal.sqrt(2), AlgebraicReal.sqrt(2, mult=-1, offset=1))
    sys = ModelSystem.torus([beta])
    assert not invariant_projection(sys, ObservableSpec.character((1, 1))).is_zero
    assert invariant_projection(sys, ObservableSpec.character((1, 2))).is_zero


def test_projection_cyclic_group():
    sys = ModelSystem.cyclic(4, [2])
    # e(k n / 4) is invariant under n -> n+2 iff 2k/4 is an integer
    assert not invariant_projection(sys, ObservableSpec.character((2,))).is_zero
    assert invariant_projection(sys, ObservableSpec.character((1,))).is_zero


def test_projection_refuses_skew():
    sys = ModelSystem.skew(ROOT2M1)
    with pytest.raises(ValueError):
        invariant_projection(sys, ObservableSpec.character((0, 1)))


def test_box_average_exact_for_invariant_part():
    sys = ModelSystem.torus([[AlgebraicReal(Fraction(1, 2))]])
    f = ObservableSpec.make(1, [((2,), 1.0)])
    assert box_average(sys, f, 50) == pytest.approx(1.0 + 0j, abs=1e-15)


def test_box_average_converges_to_spectral_mass():
    sys = ModelSystem.torus([[ROOT2M1, 0], [0, ROOT3M1]])
    f = ObservableSpec.make(
        2, [((0, 0), 0.5), ((1, 1), 1.0), ((2, -1), -0.5j)]
    )
    mass = spectral_mass(sys, f)
    assert mass == pytest.approx(0.25)
    small = abs(box_average(sys, f, 64) - mass)
    large = abs(box_average(sys, f, 4096) - mass)
    assert large < small
    assert large < 1e-3


def test_vn_average_invariant_character_is_exactly_zero():
    sys = ModelSystem.torus([[AlgebraicReal(Fraction(1, 2))]])
    f = ObservableSpec.character((2,))
    res = vn_average(sys, f, [0], 0.3, 4096)
    assert res.norm == 0.0
    assert all(v == 0.0 for _, v in res.curve)
    assert res.invariant_mass == pytest.approx(1.0)
    assert res.weights == ()
    assert res.a_norm_sq() == pytest.approx(1.0)


def test_vn_average_weight_is_the_floor_phase_sum():
    """The character weight must be the engine's floor sum, bit for bit."""
    sys = ModelSystem.torus([[ROOT2M1, 0], [0, ROOT3M1]])
    f = ObservableSpec.character((1, 1))
    N = 4096
    res = vn_average(sys, f, [0, 1], 0.3, N)
    comb = ShiftedCombination(((ROOT2M1, 0), (ROOT3M1, 1)))
    direct = partial_sum(SequenceSpec.floor(GrowthParams(0.3), comb), N)
    assert res.weights[0][1] == direct.sum / N
    assert res.norm == abs(direct.sum / N)


def test_vn_average_curve_shape_and_contraction():
    sys = ModelSystem.torus([[ROOT2M1]])
    f = ObservableSpec.make(1, [((0,), 0.5), ((1,), 1.0)])
    N = 8192
    res = vn_average(sys, f, [0], 0.3, N, curve_from=2048)
    assert [n for n, _ in res.curve] == [2048, 4096, 8192]
    assert res.curve[-1] == (N, res.norm)
    assert res.invariant_mass == pytest.approx(0.25)
    assert res.a_norm_sq() <= f.l2_norm_sq + 1e-12
    assert res.rows() == list(res.curve)


def test_vn_average_validation():
    sys = ModelSystem.torus([[ROOT2M1]])
    f = ObservableSpec.character((1,))
    with pytest.raises(ValueError):
        vn_average(sys, f, [0, 1], 0.3, 100)  # shift count != r
    with pytest.raises(ValueError):
        vn_average(sys, ObservableSpec.character((1, 1)), [0], 0.3, 100)
    sys2 = ModelSystem.torus([[ROOT2M1, 0], [0, ROOT3M1]])
    with pytest.raises(ValueError):
        vn_average(sys2, ObservableSpec.character((1, 1)), [1, 1], 0.3, 100)
    with pytest.raises(ValueError):
        vn_average(sys2, ObservableSpec.character((1, 1)), [0, -1], 0.3, 100)


def test_zero_entropy_constant_observable_reduces_to_plain_sum():
    sys = ModelSystem.torus([[ROOT2M1]])
    f = ObservableSpec.constant(1)
    seq = SequenceId.smooth(0.3)
    N = 2000
    res = zero_entropy_correlation(sys, f, [Fraction(1, 7)], seq, N)
    comb = ShiftedCombination.make([1], [0])
    plain = partial_sum(SequenceSpec.smooth(GrowthParams(0.3), comb), N)
    assert res.value == plain.sum / N


def test_zero_entropy_modulus_independent_of_start_point():
    sys = ModelSystem.torus([[ROOT2M1]])
    f = ObservableSpec.character((1,))
    seq = SequenceId.smooth(0.3)
    a = zero_entropy_correlation(sys, f, [0], seq, 1500)
    b = zero_entropy_correlation(sys, f, [Fraction(2, 5)], seq, 1500)
    assert a.modulus == pytest.approx(b.modulus, abs=1e-12)


def test_zero_entropy_rotation_orbit_matches_iteration():
    sys = ModelSystem.torus([[ROOT2M1]])
    f = ObservableSpec.make(1, [((1,), 1.0), ((2,), -0.5j)])
    seq = SequenceId.smooth(0.3)
    N = 600
    x0 = Fraction(1, 3)
    got = zero_entropy_correlation(sys, f, [x0], seq, N)
    params = GrowthParams(0.3)
    with mpmath.workprec(512):
        beta = mpmath.sqrt(2) - 1
        total = mpmath.mpc(0)
        for n in range(1, N + 1):
            x = mpmath.mpf(1) / 3 + n * beta
            fx = mpmath.expjpi(2 * mpmath.frac(x)) - 0.5j * mpmath.expjpi(
                2 * mpmath.frac(2 * x)
            )
            total += mpmath.expjpi(2 * mpmath.frac(mp_G(params, n))) * fx
        want = complex(total) / N
    assert abs(got.value - want) < 1e-11


def test_zero_entropy_skew_orbit_matches_iteration():
    alpha = ROOT2M1
    sys = ModelSystem.skew(alpha)
    f = ObservableSpec.make(2, [((1, 0), 0.5), ((1, 2), 1.0), ((0, 1), -0.25j)])
    seq = SequenceId.floor(0.3, AlgebraicReal(Fraction(1, 2)))
    N = 600
    got = zero_entropy_correlation(sys, f, [Fraction(1, 3), Fraction(2, 5)], seq, N)
    params = GrowthParams(0.3)
    with mpmath.workprec(512):
        a = mpmath.sqrt(2) - 1
        x, y = mpmath.mpf(1) / 3, mpmath.mpf(2) / 5
        total = mpmath.mpc(0)
        for n in range(1, N + 1):
            x, y = x + a, y + x  # y picks up the pre-step x
            fx = (
                0.5 * mpmath.expjpi(2 * mpmath.frac(x))
                + mpmath.expjpi(2 * mpmath.frac(x + 2 * y))
                - 0.25j * mpmath.expjpi(2 * mpmath.frac(y))
            )
            an = mpmath.expjpi(2 * mpmath.frac(mpmath.floor(mp_G(params, n)) / 2))
            total += an * fx
        want = complex(total) / N
    assert abs(got.value - want) < 1e-11


def test_zero_entropy_validation():
    sys = ModelSystem.torus([[ROOT2M1]])
    f = ObservableSpec.character((1,))
    with pytest.raises(ValueError):
        zero_entropy_correlation(sys, f, [0], SequenceId.rotation(Fraction(1, 3)), 100)
    two = ModelSystem.torus([[ROOT2M1, 0], [0, ROOT3M1]])
    with pytest.raises(ValueError):
        zero_entropy_correlation(
            two, ObservableSpec.character((1, 1)), [0, 0], SequenceId.smooth(0.3), 100
        )
    with pytest.raises(ValueError):
        zero_entropy_correlation(
            ModelSystem.cyclic(3, [1]), f, [0], SequenceId.smooth(0.3), 100
        )


def test_skew_demo_zero_frequency_is_trivial():
    res = skew_demo(ROOT2M1, 0, [0], 500)
    assert res.time_average == 1 + 0j
    assert res.space_average == 1 + 0j
    assert res.deviation == 0.0


def test_skew_demo_rational_alpha_full_period():
    # period divides 6 for alpha = 1/3; a multiple-of-period N is exact
    res = skew_demo(Fraction(1, 3), 1, [0], 600)
    assert res.deviation < 1e-12

    shifted = skew_demo(Fraction(1, 3), 1, [0, 1], 600)
    assert shifted.deviation < 1e-12


def test_skew_demo_irrational_alpha_decays_to_zero():
    res = skew_demo(AlgebraicReal.sqrt(2), 1, [0], 2**12)
    assert res.space_average == 0j
    assert abs(res.time_average) < 0.05
    bigger = skew_demo(AlgebraicReal.sqrt(2), 1, [0], 2**16)
    assert abs(bigger.time_average) < abs(res.time_average)


def test_skew_demo_matches_direct_quadratic_phase():
    alpha = Fraction(1, 7)
    N = 350
    res = skew_demo(alpha, 2, [0], N)
    want = 0j
    for n in range(1, N + 1):
        ph = Fraction(2 * n * (n - 1), 2) * alpha
        want += cmath.exp(2j * cmath.pi * float(ph % 1))
    assert abs(res.time_average - want / N) < 1e-10


def test_skew_demo_validation():
    with pytest.raises(ValueError):
        skew_demo(Fraction(1, 3), 1, [], 100)
    with pytest.raises(ValueError):
        skew_demo(Fraction(1, 3), 1, [0], 0)
