import cmath
import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mpf

from singmod import _rootkern, _sumkern
from singmod.characters import fundamental_divisors, genus_char, kronecker
from singmod.expsums import (HALF, MINUS_HALF, InvalidCongruence, InvalidLevel, PlusSumArgs, SSeries, TSeries,
                             WeightSpec, kloosterman, kloosterman_plus, partial_sums, square_roots_mod, weil_bound,
                             weyl_sum, weyl_totals)
from singmod.quadforms import DiscFactorization


def kl_oracle(n, c):
    return sum(cmath.exp(2j * math.pi * (pow(d, -1, c) + n * d) / c) for d in range(c) if math.gcd(d, c) == 1)


def plus_oracle(k2, m, n, c):
    """Complex-float transcription of the defining sum."""
    s = 0
    for d in range(c):
        if d % 2 == 0 or math.gcd(d, c) != 1:
            continue
        eps = 1 if d % 4 == 1 else 1j
        s += kronecker(c, d) * eps ** k2 * cmath.exp(2j * math.pi * (m * pow(d, -1, c) + n * d) / c)
    s *= cmath.exp(-2j * math.pi * k2 / 8)
    return 2 * s if (c // 4) % 2 else s


def admissible(k2, lo=-60, hi=60):
    sgn = 1 if k2 == 1 else -1
    return [t for t in range(lo, hi + 1) if t and (sgn * t) % 4 in (0, 1)]


def test_kloosterman_examples():
    assert abs(float(kloosterman(1, 1)) - 1) < 1e-25
    assert abs(float(kloosterman(1, 3)) + 1) < 1e-25
    assert abs(float(kloosterman(1, 4)) + 2) < 1e-25


@given(st.integers(-200, 200), st.integers(1, 120))
def test_kloosterman_oracle_and_period(n, c):
    v = float(kloosterman(n, c))
    assert abs(v - kl_oracle(n, c).real) < 1e-9
    assert abs(float(kloosterman(n + c, c)) - v) < 1e-20


def test_plus_examples():
    v = kloosterman_plus(HALF, PlusSumArgs(1, -3, 4))
    assert abs(complex(v) + 2 * math.sqrt(2)) < 1e-25
    w = kloosterman_plus(HALF, PlusSumArgs(-3, 1, 4))
    assert abs(complex(w) - complex(v)) < 1e-25
    with pytest.raises(InvalidCongruence):
        kloosterman_plus(HALF, PlusSumArgs(2, -3, 4))
    with pytest.raises(InvalidLevel):
        kloosterman_plus(HALF, PlusSumArgs(1, -3, 6))
    with pytest.raises(ValueError):
        WeightSpec(Fraction(3, 2), 1)


@given(st.sampled_from([1, -1]), st.data(), st.integers(1, 40))
def test_plus_oracle(k2, data, cq):
    m = data.draw(st.sampled_from(admissible(k2)))
    n = data.draw(st.sampled_from(admissible(k2)))
    c = 4 * cq
    w = HALF if k2 == 1 else MINUS_HALF
    v = complex(kloosterman_plus(w, PlusSumArgs(m, n, c)))
    assert abs(v - plus_oracle(k2, m, n, c)) < 1e-9 * c
    # real, bounded, symmetric
    assert abs(v.imag) < 1e-20 * c
    assert abs(v) <= weil_bound(m, n, c) * (1 + 1e-12)
    assert abs(complex(kloosterman_plus(w, PlusSumArgs(n, m, c))) - v) < 1e-20 * c
    other = MINUS_HALF if k2 == 1 else HALF
    assert abs(complex(kloosterman_plus(other, PlusSumArgs(-m, -n, c))) - v) < 1e-20 * c


def test_plus_fast_kernel():
    rng = random.Random(5)
    spf = _rootkern.spf_sieve(5000)
    for _ in range(150):
        k2 = rng.choice([1, -1])
        m = rng.choice(admissible(k2, -500, 500))
        n = rng.choice(admissible(k2, -500, 500))
        c = 4 * rng.randint(1, 1000)
        w = HALF if k2 == 1 else MINUS_HALF
        exact = complex(kloosterman_plus(w, PlusSumArgs(m, n, c))).real
        assert abs(_sumkern.plus_sum(k2, m, n, c, spf) - exact) < 1e-10 * math.sqrt(c)


def test_square_roots_brute_force():
    for D in (-3, -4, -20, -23, -303):
        for c in range(4, 404, 4):
            assert square_roots_mod(D, c) == [b for b in range(c) if (b * b - D) % c == 0]


def weyl_oracle(m, D, d, c):
    s = 0
    for b in range(c):
        if (b * b - D) % c == 0:
            s += genus_char(d, (c // 4, b, (b * b - D) // c)) * cmath.exp(4j * math.pi * m * b / c)
    return s


def test_weyl_examples():
    f = DiscFactorization.of(-4, 1)
    assert abs(float(weyl_sum(1, f, 4)) - 2) < 1e-25
    # no square roots of -3 mod 8 (since -3 = 5 mod 8)
    assert float(weyl_sum(1, DiscFactorization.of(-3), 8)) == 0
    f = DiscFactorization.of(-20, 5)
    for c in range(4, 200, 4):
        assert abs(float(weyl_sum(3, f, c)) - weyl_oracle(3, -20, 5, c).real) < 1e-9


@pytest.mark.parametrize("D", [-3, -4, -20, -23, -303])
def test_kohnen_identity(D):
    for d in fundamental_divisors(D):
        f = DiscFactorization.of(D, d)
        for c in range(4, 404, 4):
            a = weyl_sum(1, f, c, "direct").value
            b = weyl_sum(1, f, c, "kohnen").value
            assert abs(a - b) < mpf(2) ** (-96 + 16), (D, d, c)


def test_kohnen_identity_higher_m():
    for D in (-15, -24, -84, -260):
        for d in fundamental_divisors(D):
            f = DiscFactorization.of(D, d)
            for m in (2, 3, 4, 6, 9):
                for c in range(4, 160, 4):
                    a = weyl_sum(m, f, c, "direct").value
                    b = weyl_sum(m, f, c, "kohnen").value
                    assert abs(a - b) < mpf(2) ** (-96 + 16), (D, d, m, c)


def test_weyl_totals_fast_path():
    for D, d, m in ((-303, 1, 1), (-84, -3, 2), (-260, 5, 3), (-20, -4, 1)):
        tot = weyl_totals(D, d, m, 600)
        f = DiscFactorization.of(D, d)
        for cp in range(1, 601):
            assert abs(2 * tot[cp] - float(weyl_sum(m, f, 4 * cp))) < 1e-9


def test_partial_sums_T_first_term():
    f = DiscFactorization.of(-23, 1)
    ps = partial_sums(TSeries(2, f), 40)
    assert abs(ps.values[0] - float(weyl_sum(2, f, 4)) / 2) < 1e-14
    ref = sum(float(weyl_sum(2, f, c)) / math.sqrt(c) for c in range(4, 41, 4))
    assert abs(ps.values[-1] - ref) < 1e-12
    assert ps.rows()[0][0] == 4


def test_partial_sums_S_against_exact_and_weil():
    ps = partial_sums(SSeries(HALF, 5, -3), 400)
    ref = np.cumsum([complex(kloosterman_plus(HALF, PlusSumArgs(5, -3, c))).real / c for c in range(4, 401, 4)])
    assert np.max(np.abs(ps.values - ref)) < 1e-12
    assert np.all(np.abs(ps.values) <= ps.weil)
    big = partial_sums(SSeries(MINUS_HALF, -4, 8), 20000, stride=40)
    assert np.all(np.abs(big.values) <= big.weil)
