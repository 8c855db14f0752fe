"""q-expansions of j and the Faber polynomials j_m, and the Rademacher series for c(n)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from mpmath import mp, mpf

from .arb import (LOG2E, BigComplex, BigReal, PrecisionError, _bessel_I_raw, _check_prec,
                  const_pi, e_of, to_mpc)
from .characters import divisors

# eval_jm refuses expansions longer than this
MAX_ORDER = 20000
# |c_m(n)| <= COEFF_SAFETY * exp(4 pi sqrt(m n)); checked against the exact coefficients in tests
COEFF_SAFETY = 2


@dataclass(frozen=True)
class QExpansion:
    lead: int
    coeffs: tuple
    order: int

    def __post_init__(self):
        if len(self.coeffs) != self.order - self.lead + 1:
            raise ValueError("coefficient list does not match the exponent range")

    def __getitem__(self, n):
        return self.coeffs[n - self.lead]

    def truncate(self, N):
        return QExpansion(self.lead, self.coeffs[:N - self.lead + 1], N)


@dataclass(frozen=True)
class FaberPoly:
    m: int
    coeffs: tuple  # highest degree first

    def __call__(self, x):
        acc = 0
        for c in self.coeffs:
            acc = acc * x + c
        return acc

    def __str__(self):
        terms = []
        deg = self.m
        for i, c in enumerate(self.coeffs):
            k = deg - i
            if c == 0:
                continue
            mon = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            coef = str(c) if (k == 0 or abs(c) != 1) else ("-" if c < 0 else "")
            terms.append(f"{coef}{mon}")
        return " + ".join(terms).replace("+ -", "- ")


def _mul(a, b, n):
    """Product of two integer power series truncated to n terms."""
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[:n - i]):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=8)
def _j_series(n_terms):
    """Coefficients of q * j(q) up to q^{n_terms-1}, from the product formula."""
    n = n_terms
    # P = prod (1 - q^k)^{-24}: q P'/P = 24 sum sigma_1(k) q^k
    s1 = [0] + [sum(divisors(k)) for k in range(1, n)]
    P = [1] + [0] * (n - 1)
    for k in range(1, n):
        P[k] = 24 * sum(s1[i] * P[k - i] for i in range(1, k + 1)) // k
    E4 = [1] + [240 * sum(d ** 3 for d in divisors(k)) for k in range(1, n)]
    E4c = _mul(_mul(E4, E4, n), E4, n)
    return tuple(_mul(P, E4c, n))


def j_coeffs(N):
    """c(-1), ..., c(N) of j(q) = q^{-1} prod(1-q^n)^{-24} (1 + 240 sum sigma_3(n) q^n)^3."""
    if N < 0:
        raise ValueError("N must be >= 0")
    size = N + 2
    cached = _j_series(max(64, 1 << (size - 1).bit_length()))
    return QExpansion(-1, tuple(cached[:size]), N)


@lru_cache(maxsize=64)
def _faber(m, N):
    # j^k for k <= m as lists indexed from exponent -k
    width = N + m + 1
    j = j_coeffs(N + m).coeffs  # exponents -1 .. N+m
    powers = [None, list(j[:width + 1])]
    for k in range(2, m + 1):
        powers.append(_mul(powers[k - 1], j, width + k))
    # greedy: f = j^m - sum a_k j_k, poly tracked alongside
    # represent series by dict exponent -> coeff, poly by list of coefficients of j^k
    series = {e - m: c for e, c in enumerate(powers[m])} if m else {0: 1}
    poly = [0] * (m + 1)
    poly[m] = 1
    for e in range(-m + 1, 1):
        c = series.get(e, 0)
        if c == 0:
            continue
        k = -e  # subtract c * j^k, whose leading term is q^{-k}
        poly[k] -= c
        if k == 0:
            series[0] -= c
        else:
            for i, v in enumerate(powers[k]):
                ex = i - k
                series[ex] = series.get(ex, 0) - c * v
    coeffs = tuple(series.get(e, 0) for e in range(-m, N + 1))
    return tuple(reversed(poly)), coeffs


def faber(m, N):
    """(P_m, q-expansion of j_m = P_m(j) through q^N)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return FaberPoly(0, (1,)), QExpansion(0, (1,) + (0,) * N, N)
    poly, coeffs = _faber(m, N)
    return FaberPoly(m, poly), QExpansion(-m, coeffs, N)


def truncation_order(m, y, prec):
    """Smallest N with sum_{n>N} COEFF_SAFETY e^{4 pi sqrt(mn)} e^{-2 pi y n} < 2^{-prec} max(1, e^{2 pi y m})."""
    target = -prec / LOG2E + max(0.0, 2 * math.pi * y * m) - math.log(COEFF_SAFETY) - math.log(2)
    n = 1
    while True:
        # once successive terms shrink by at least 1/2 the tail is at most twice the first term
        ratio = 2 * math.pi * math.sqrt(m) * (math.sqrt(n + 2) - math.sqrt(n + 1)) - 2 * math.pi * y
        term = 4 * math.pi * math.sqrt(m * (n + 1)) - 2 * math.pi * y * (n + 1)
        if ratio < -math.log(2) and term < target:
            return n
        n += 1
        if n > MAX_ORDER:
            raise PrecisionError(f"Im z = {y:.4g} too small for a q-expansion of order <= {MAX_ORDER}")


def eval_jm(m, z, prec, order=None):
    """j_m(z) from its q-expansion; Im z should be at least about sqrt(3)/2."""
    prec = _check_prec(prec)
    zz = to_mpc(z)
    y = float(zz.imag)
    if y <= 0:
        raise ValueError("z must lie in the upper half-plane")
    N = order if order is not None else truncation_order(m, y, prec)
    _, ser = faber(m, N)
    wp = prec + 16 + int(2 * math.pi * y * m * LOG2E)
    with mp.workprec(wp):
        q = e_of(zz, wp).value
        # Horner in q from the top coefficient down, then shift by q^{-m}
        acc = mpmath.mpc(0)
        for c in reversed(ser.coeffs):
            acc = acc * q + c
        val = acc / q ** m if m else acc
    with mp.workprec(prec):
        return BigComplex(+val, prec)


def eval_j(z, prec):
    """j(z) = j_1(z) + 744."""
    v = eval_jm(1, z, prec)
    with mp.workprec(prec):
        return BigComplex(v.value + 744, prec)


def kloosterman_real(n, c, prec=None):
    """S(n, -1; c) = sum over units d mod c of cos(2 pi (n d - dbar) / c); float64 unless prec is given."""
    if c == 1:
        return 1.0 if prec is None else mpf(1)
    ds = [d for d in range(1, c) if math.gcd(d, c) == 1]
    ks = [(n * d - pow(d, -1, c)) % c for d in ds]
    if prec is None:
        return float(np.cos(2 * np.pi * np.array(ks, dtype=float) / c).sum())
    with mp.workprec(prec):
        return mpmath.fsum(mpmath.cospi(mpf(2 * k) / c) for k in ks)


@dataclass(frozen=True)
class RademacherResult:
    value: BigReal
    error_bound: BigReal       # rigorous tail bound (Weil + d(c) bound)
    heuristic_error: float     # size of the last doubling step
    rounded: int
    cutoff: int
    certified: bool


def rademacher_tail_bound(n, x):
    """Rigorous bound for the tail c > x of the Rademacher series for c(n).

    |S(n, -1; c)| <= d(c) c^{1/2} (Weil) and I_1(y) <= (y/2) e^y give a term
    bound 4 pi^2 e^{y_x} d(c) c^{-3/2}.
    sum_{c>N} d(c) c^{-3/2} <= 3 (log N + 3) / sqrt(N) follows from
    sum_{c<=t} d(c) <= t (log t + 1) by partial summation.
    """
    y = 4 * math.pi * math.sqrt(n) / (x + 1)
    N = max(x, 2)
    return 4 * math.pi ** 2 * math.exp(y) * 3 * (math.log(N) + 3) / math.sqrt(N)


def c_n_rademacher(n, prec=None, x0=None, max_cutoff=4096, stop_error=0.2):
    """c(n) = 2 pi n^{-1/2} sum_c S(n,-1;c)/c I_1(4 pi sqrt(n)/c).

    The cutoff starts at 10 sqrt(n) + 40 and doubles until the change over the
    last doubling is below stop_error and the value sits within 0.3 of an
    integer.  stop_error = inf sums once at the starting cutoff.  A rigorous tail bound is also reported; it is far too weak to
    certify the rounding at these cutoffs, which the `certified` flag records.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lead_bits = int(4 * math.pi * math.sqrt(n) * LOG2E)
    if prec is None:
        prec = max(64, lead_bits + 64)
    prec = _check_prec(prec)
    wp = prec + 16
    x = int(x0 if x0 is not None else 10 * math.sqrt(n) + 40)
    terms = {}
    with mp.workprec(wp):
        pi = const_pi(wp)
        pref = 2 * pi / mpmath.sqrt(n)
        arg0 = 4 * pi * mpmath.sqrt(n)

        def term(c):
            if c not in terms:
                y = arg0 / c
                # float K carries ~2^-53 relative error, harmless once I_1(y) < 2^20
                big = float(y) * LOG2E > 20
                K = kloosterman_real(n, c, wp if big else None)
                terms[c] = pref * K / c * _bessel_I_raw(1, y, wp)
            return terms[c]

        prev = None
        step = math.inf
        while True:
            total = mpmath.fsum(term(c) for c in range(1, x + 1))
            if stop_error == math.inf:
                # single pass at the given cutoff, no settling check
                break
            if prev is not None:
                step = abs(float(total - prev))
                r = int(mpmath.nint(total))
                if step < stop_error and abs(float(total - r)) < 0.3:
                    break
            if x >= max_cutoff:
                raise RuntimeError(f"Rademacher series for n={n} did not settle by c={x}")
            prev = total
            x = min(2 * x, max_cutoff)
        bound = rademacher_tail_bound(n, x)
        r = int(mpmath.nint(total))
        val = BigReal(+total, prec)
    return RademacherResult(val, BigReal.of(bound, 64), step, r, x, bound < 0.4)
