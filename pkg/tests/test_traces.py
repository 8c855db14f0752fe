import math
import random
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mp, mpf

from singmod.arb import trace_precision
from singmod.characters import fundamental_divisors, is_fundamental
from singmod.quadforms import DiscFactorization, class_number_weighted, cm_point, reduced_forms
from singmod.traces import (IdentityFailure, SeriesConfig, _nearest_rational, compare, default_Y, main_term,
                            rect_exp_sum, twisted_class_number, trace_direct, trace_rect, trace_sinh_series)

TRACE_303 = -561766949784377042888940


def trace_oracle(D, m, prec=200):
    """Direct trace with mpmath's kleinj and the Faber polynomial expansion spelled out for m <= 2."""
    with mp.workprec(prec):
        tot = mpf(0)
        for Q in reduced_forms(D):
            z = cm_point(Q, prec)
            j = mpmath.kleinj(mpmath.mpc(z.x.value, z.y.value)) * 1728
            v = j - 744 if m == 1 else j * j - 1488 * j + 159768
            w = 3 if (Q.a == Q.b == Q.c) else (2 if Q.b == 0 and Q.a == Q.c else 1)
            tot += v.real / w
        return tot


def test_direct_examples():
    assert abs(float(trace_direct(DiscFactorization.of(-3), 1)) + 248) < 1e-15
    assert abs(float(trace_direct(DiscFactorization.of(-4), 1)) - 492) < 1e-15
    assert trace_direct(DiscFactorization.of(-303), 1).nearest_int() == TRACE_303


@pytest.mark.parametrize("D,m", [(-23, 1), (-39, 2), (-163, 1), (-104, 2)])
def test_direct_against_kleinj(D, m):
    got = trace_direct(DiscFactorization.of(D), m).value
    ref = trace_oracle(D, m)
    assert abs(got - ref) < mpf(10) ** -6 * max(1, abs(ref)) ** 0 + abs(ref) * mpf(2) ** -60


def test_main_term_and_delta():
    assert main_term(DiscFactorization.of(-303), 1) == -240
    assert main_term(DiscFactorization.of(-20, 5), 1) == 0
    assert main_term(DiscFactorization.of(-4), 1) == -12
    assert main_term(DiscFactorization.of(-3), 2) == Fraction(-24 * 3, 3)


def test_series_examples():
    r = trace_sinh_series(DiscFactorization.of(-4), 1)
    assert abs(float(r.value) - 492) < 1e-4
    # the c-sum alone is about 504
    assert abs(float(r.value) + 12 - 504) < 1e-4
    assert abs(float(trace_sinh_series(DiscFactorization.of(-3), 1).value) + 248) < 1e-4


def test_series_sharp_mode_is_cruder():
    f = DiscFactorization.of(-23)
    exact = float(trace_direct(f, 1))
    sharp = trace_sinh_series(f, 1, tol=1e-2, config=SeriesConfig(smooth=False))
    assert abs(float(sharp.value) - exact) < 0.5


def test_rect_empty_rectangle_is_main_term():
    for D, m in ((-23, 1), (-303, 2)):
        f = DiscFactorization.of(D)
        Y = math.sqrt(-D)
        assert float(trace_rect(f, m, Y).value) == float(main_term(f, m))


def test_rect_default_Y_shape():
    assert default_Y(-303, 1) <= 303 ** -1.01
    assert default_Y(-23, 2) <= 2 ** -3.01 * 23 ** -1.01


def test_rect_exact_and_shared_paths_agree():
    f = DiscFactorization.of(-56)
    Y = 0.0015
    a = trace_rect(f, 1, Y, exact=True).value
    b = trace_rect(f, 1, Y, exact=False).value
    assert abs(a - b) < 1e-6


def test_rect_warns_outside_regime():
    with pytest.warns(UserWarning):
        trace_rect(DiscFactorization.of(-23), 2, 0.9)


def test_rect_identity_examples():
    f = DiscFactorization.of(-4)
    with mp.workprec(120):
        assert abs(rect_exp_sum(f, 1, 0.9, 1).value - mpmath.exp(2 * mpmath.pi)) < mpf(2) ** -70
        assert abs(rect_exp_sum(f, 1, 0.9, -1).value - mpmath.exp(-2 * mpmath.pi)) < mpf(2) ** -90
    assert float(rect_exp_sum(f, 1, 2.0, 1)) == 0


def _factorizations(D):
    return [d for d in fundamental_divisors(D)]


def test_rect_identity_random():
    rng = random.Random(11)
    Ds = [D for D in range(-3, -400, -1) if D % 4 in (0, 1)]
    for _ in range(100):
        D = rng.choice(Ds)
        d = rng.choice(_factorizations(D))
        m = rng.randint(1, 4)
        Y = rng.uniform(0.02, 0.6)
        xi = rng.choice((1, -1))
        rect_exp_sum(DiscFactorization.of(D, d), m, Y, xi)


def test_rect_identity_detects_broken_convention(monkeypatch):
    import singmod.traces as tr
    real = tr.weyl_sum
    monkeypatch.setattr(tr, "weyl_sum", lambda m, f, c, method, prec: real(m + 1, f, c, method, prec))
    with pytest.raises(IdentityFailure):
        rect_exp_sum(DiscFactorization.of(-23), 1, 0.1, 1)


def test_compare_examples():
    r = compare(DiscFactorization.of(-23), 1)
    assert not r.flags and r.max_deviation < 0.1
    assert abs(float(r.series - r.direct)) < 5e-4
    r = compare(DiscFactorization.of(-303), 1)
    assert r.nearest_integer == TRACE_303
    r = compare(DiscFactorization.of(-20, 5), 1)
    assert not r.flags
    assert abs(float(r.series - r.direct)) < 5e-4


def test_weighted_h_points_are_sixths():
    for D in (-3, -4):
        for m in (1, 2, 3):
            v = trace_direct(DiscFactorization.of(D), m)
            frac, dist = _nearest_rational(v)
            assert dist < 1e-10 and (6 * frac).denominator == 1


def test_error_term_growth():
    """|direct - main - sum over R(1/m) of chi e(-m z_Q)| grows slower than |D|^(1/2)."""
    Ds = [D for D in range(-100, -2001, -1) if is_fundamental(D)]
    xs, ys = [], []
    for D in Ds:
        f = DiscFactorization.of(D)
        e = trace_direct(f, 1) - main_term(f, 1) - rect_exp_sum(f, 1, 1.0, 1, prec=trace_precision(D, 1, 64))
        xs.append(math.log(-D))
        ys.append(math.log(abs(float(e))))
    # individual errors scatter by a factor ~e^2, so the fit uses every fundamental D in range
    slope = np.polyfit(xs, ys, 1)[0]
    assert slope < 0.5


def test_negative_xi_sum_small():
    for D in [D for D in range(-100, -2001, -1) if is_fundamental(D)][::25]:
        v = float(rect_exp_sum(DiscFactorization.of(D), 1, 1.0, -1))
        assert abs(v) < (-D) ** 0.6


def test_twisted_main_term_for_square_cofactor():
    # d' square: chi_d is trivial on the primitive class group, so the constant survives
    assert twisted_class_number(DiscFactorization.of(-15, -15)) == 2
    assert twisted_class_number(DiscFactorization.of(-36, -4)) == Fraction(3, 2)
    assert twisted_class_number(DiscFactorization.of(-20, 5)) == 0
    for D, d in ((-15, -15), (-16, -4), (-36, -4), (-27, -3)):
        f = DiscFactorization.of(D, d)
        e = trace_direct(f, 1).value - trace_sinh_series(f, 1).value
        assert abs(e) < 1e-3
