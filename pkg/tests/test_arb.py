import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp, mpf

from singmod.arb import (BigReal, MIN_PREC, bessel_I, bessel_JY_third, bessel_K_imag,
                         bessel_M_third, e_of, trace_precision)


def test_prec_floor():
    with pytest.raises(ValueError):
        BigReal.of(1, 32)


def test_binop_takes_min_prec():
    a = BigReal.of(1, 200)
    b = BigReal.of(3, 80)
    assert (a / b).prec == 80
    assert (a + 1).prec == 200


def test_nearest_int_half_away():
    assert BigReal.of(2.5, 64).nearest_int() == 3
    assert BigReal.of(-2.5, 64).nearest_int() == -3
    assert BigReal.of(-2.49, 64).nearest_int() == -2


def test_e_of_examples():
    assert abs(complex(e_of(0, 64).value) - 1) < 1e-18
    assert abs(complex(e_of(0.5, 64).value) + 1) < 1e-18
    v = e_of(1j, 96).value
    with mp.workprec(120):
        assert abs(v - mpmath.exp(-2 * mpmath.pi)) < mpf(2) ** -90
    assert abs(float(v.real) - 0.00186744273170799) < 1e-16


@given(st.floats(-3, 3), st.floats(0, 2))
def test_e_of_modulus(x, y):
    v = e_of(complex(x, y), 64).value
    assert abs(float(abs(v)) - math.exp(-2 * math.pi * y)) < 1e-15


def test_bessel_I_examples():
    assert float(bessel_I(1, 0, 64)) == 0
    v = float(bessel_I(1, 1e-6, 64))
    assert abs(v / 5e-7 - 1) < 1e-11
    with mp.workprec(200):
        ref = mpmath.besseli(1, 2)
    assert abs(bessel_I(1, 2, 128).value - ref) < mpf(2) ** -120
    assert abs(float(bessel_I(1, 2, 64)) - 1.590636854637329) < 1e-15


@given(st.floats(0.01, 30), st.floats(0.01, 30))
def test_bessel_I_monotone(x1, x2):
    if x1 == x2:
        return
    lo, hi = sorted((x1, x2))
    assert bessel_I(1, lo, 64) < bessel_I(1, hi, 64)


def test_K0_value():
    with mp.workprec(120):
        ref = mpmath.besselk(0, 1)
    assert abs(bessel_K_imag(0, 1, 96).value - ref) < mpf(2) ** -88
    assert abs(float(bessel_K_imag(0, 1, 64)) - 0.42102443824070834) < 1e-16


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 5.0])
def test_K_small_order_limit(x):
    k0 = float(mpmath.besselk(0, x))
    assert abs(float(bessel_K_imag(1e-8, x, 64)) - k0) < 1e-6 * k0


@pytest.mark.parametrize("v,x", [(0.5, 0.3), (3, 2), (10, 5), (25, 20), (40, 1.0), (60, 45)])
def test_K_matches_mpmath(v, x):
    with mp.workprec(200):
        ref = mpmath.besselk(1j * v, x).real
    got = bessel_K_imag(v, x, 80).value
    assert abs(got - ref) <= abs(ref) * mpf(2) ** -70


@pytest.mark.parametrize("v,x", [(2.5, 0.7), (17, 9), (33, 31)])
def test_K_precision_doubling(v, x):
    a = bessel_K_imag(v, x, 64).value
    b = bessel_K_imag(v, x, 128).value
    assert abs(a - b) <= abs(b) * mpf(2) ** (-64 + 8)


def test_K_10_5_against_airy_main_term():
    from singmod.spectral import AsymptoticInputs, kbessel_asymptotics
    v, z = 10.0, 0.5
    with mp.workprec(100):
        k = float(bessel_K_imag(v, v * z, 80).value * mpmath.exp(mpmath.pi * v / 2))
    approx = kbessel_asymptotics(AsymptoticInputs(v, z), "balogh-main")
    assert abs(k - approx) < 1.0 * v ** -2.5


def test_M_third_examples():
    M, dth = bessel_M_third(100, 64)
    assert abs(float(M) * math.sqrt(math.pi * 100 / 2) - 1) < 0.01
    with mp.workprec(120):
        j = mpmath.besselj(mpf(1) / 3, 1)
        y = mpmath.bessely(mpf(1) / 3, 1)
        ref = mpmath.sqrt(j * j + y * y)
    M1, _ = bessel_M_third(1, 96)
    assert abs(M1.value - ref) < mpf(2) ** -88
    for x in (0.1, 1, 10):
        assert bessel_M_third(x, 64)[0] > 0


def test_M_third_phase_derivative():
    # theta' = 2 / (pi x M^2): compare with a finite difference of atan2(Y, J)
    x, h = 7.3, 1e-6
    ph = lambda t: math.atan2(*map(float, reversed(bessel_JY_third(t, 96))))
    fd = (ph(x + h) - ph(x - h)) / (2 * h)
    assert abs(fd - float(bessel_M_third(x, 64)[1])) < 1e-8


@given(st.floats(0.1, 20), st.integers(0, 3))
def test_special_functions_stable_under_extra_precision(x, which):
    fns = [lambda p: bessel_I(1, x, p), lambda p: bessel_K_imag(x / 2, x, p),
           lambda p: bessel_M_third(x, p)[0], lambda p: bessel_I(0.5, x, p)]
    a = fns[which](MIN_PREC).value
    b = fns[which](MIN_PREC + 64).value
    assert abs(a - b) <= abs(b) * mpf(2) ** (-MIN_PREC + 8)


def test_trace_precision_policy():
    # pi m sqrt|D| log2 e leading bits + 32 guard + log2(terms)
    lead = math.pi * math.sqrt(303) / math.log(2)
    assert trace_precision(-303, 1, 10) == math.ceil(lead) + 32 + 4
    assert trace_precision(-3, 1, 1) == MIN_PREC
