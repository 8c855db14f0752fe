"""Kloosterman sums, plus-space Kloosterman sums of weight +-1/2, and quadratic Weyl sums."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp, mpf

from . import _rootkern, _sumkern
from .arb import BigComplex, BigReal, _check_prec
from .characters import eps_d, genus_char, genus_char_table, kronecker, sigma0
from .quadforms import DiscFactorization, ResourceLimit, root_table

# largest x accepted by partial_sums
PARTIAL_CEILING = 2_000_000


class InvalidCongruence(ValueError):
    pass


class InvalidLevel(ValueError):
    pass


class NotReal(ArithmeticError):
    pass


@dataclass(frozen=True)
class WeightSpec:
    k: Fraction
    lam: int

    def __post_init__(self):
        if self.k not in (Fraction(1, 2), Fraction(-1, 2)) or self.lam != self.k - Fraction(1, 2):
            raise ValueError(f"weight must be k = +-1/2 = lambda + 1/2, got k={self.k}, lambda={self.lam}")

    @classmethod
    def of(cls, k):
        k = Fraction(k)
        return cls(k, int(k - Fraction(1, 2)))


HALF = WeightSpec.of(Fraction(1, 2))
MINUS_HALF = WeightSpec.of(Fraction(-1, 2))


@dataclass(frozen=True)
class PlusSumArgs:
    m: int
    n: int
    c: int

    def check(self, w: WeightSpec):
        if self.c <= 0 or self.c % 4:
            raise InvalidLevel(f"c = {self.c} is not a positive multiple of 4")
        if self.m == 0 or self.n == 0:
            raise InvalidCongruence("m and n must be nonzero")
        s = -1 if w.lam % 2 else 1
        for t in (self.m, self.n):
            if (s * t) % 4 not in (0, 1):
                raise InvalidCongruence(f"(-1)^lambda * {t} is not 0 or 1 mod 4 (k = {w.k})")


def _as_real(z, prec, nterms, what):
    tol = mpf(2) ** (-prec // 2) * max(1, nterms)
    if abs(z.imag) > tol:
        raise NotReal(f"{what}: imaginary part {mpmath.nstr(z.imag, 5)} exceeds {mpmath.nstr(tol, 3)}")
    return BigReal(+z.real, prec)


def kloosterman(n, c, prec=96):
    """K(n, c) = sum over units d mod c of e((dbar + n d)/c)."""
    n, c = int(n), int(c)
    if c < 1:
        raise ValueError("c must be >= 1")
    prec = _check_prec(prec)
    with mp.workprec(prec + 16):
        if c == 1:
            z = mpmath.mpc(1)
            count = 1
        else:
            ds = [d for d in range(1, c) if math.gcd(d, c) == 1]
            z = mpmath.fsum(mpmath.expjpi(mpf(2 * ((pow(d, -1, c) + n * d) % c)) / c) for d in ds)
            count = len(ds)
        return _as_real(z, prec, count, f"K({n},{c})")


def kloosterman_plus(w: WeightSpec, args: PlusSumArgs, prec=96):
    """S_k^+(m, n; c) = e(-k/4) sum_{d mod c} (c/d) eps_d^{2k} e((m dbar + n d)/c), doubled when 4 || c."""
    args.check(w)
    prec = _check_prec(prec)
    m, n, c = args.m, args.n, args.c
    two_k = int(2 * w.k)
    with mp.workprec(prec + 16):
        terms = []
        for d in range(1, c, 2):
            chi = kronecker(c, d)
            if chi == 0:
                continue
            eps = eps_d(d) if two_k == 1 else (1 if d % 4 == 1 else -1j)
            t = mpmath.expjpi(mpf(2 * ((m * pow(d, -1, c) + n * d) % c)) / c)
            terms.append(chi * eps * t)
        s = mpmath.fsum(terms) * mpmath.expjpi(mpf(-two_k) / 4)
        if (c // 4) % 2 == 1:
            s *= 2
        return BigComplex(+s, prec)


def weil_bound(m, n, c):
    """2 sigma_0(c) gcd(m, n, c)^{1/2} sqrt(c)."""
    return 2 * sigma0(c) * math.sqrt(math.gcd(math.gcd(m, n), c)) * math.sqrt(c)


def square_roots_mod(D, c):
    """Sorted b mod c with b^2 = D (mod c), for 4 | c, lifted from the root table of c/4."""
    q = c // 4
    off, roots = root_table(D, q)
    rs = roots[off[q]:off[q + 1]]
    # R(q) lives mod 2q; each lifts to b and b + 2q mod 4q
    return sorted(int(b) + s for b in rs for s in (0, 2 * q))


def _weyl_direct(m, f, c, prec):
    D, d = f.D, f.d
    bs = square_roots_mod(D, c)
    with mp.workprec(prec + 16):
        terms = []
        for b in bs:
            chi = genus_char(d, (c // 4, b, (b * b - D) // c))
            if chi:
                terms.append(chi * mpmath.expjpi(mpf(4 * ((m * b) % c)) / c))
        return mpmath.fsum(terms), len(bs)


def _weyl_kohnen(m, f, c, prec):
    D, d, dp = f.D, f.d, f.dprime
    with mp.workprec(prec + 16):
        total = mpmath.mpc(0)
        count = 0
        for n in range(1, math.gcd(m, c // 4) + 1):
            if m % n or (c // 4) % n:
                continue
            cn = c // n
            # the character is (d/n); (d/c) or (d/(c/n)) break the identity once gcd(d, c) > 1
            chi = kronecker(d, n)
            if chi == 0:
                continue
            s = kloosterman_plus(HALF, PlusSumArgs(dp, (m // n) ** 2 * d, cn), prec + 16).value
            total += chi * mpmath.sqrt(mpf(2 * n) / c) * s
            count += cn
        return total, count


def weyl_sum(m, f: DiscFactorization, c, method="direct", prec=96):
    """T_m(d, d'; c) = sum over b mod c, b^2 = D (mod c) of chi_d([c/4, b, (b^2-D)/c]) e(2mb/c)."""
    if c <= 0 or c % 4:
        raise InvalidLevel(f"c = {c} is not a positive multiple of 4")
    if m < 1:
        raise ValueError("m must be >= 1")
    prec = _check_prec(prec)
    if method == "direct":
        z, count = _weyl_direct(m, f, c, prec)
    elif method == "kohnen":
        z, count = _weyl_kohnen(m, f, c, prec)
    else:
        raise ValueError(f"unknown method {method!r}")
    with mp.workprec(prec + 16):
        return _as_real(mpmath.mpc(z), prec, count, f"T_{m}({f.d},{f.dprime};{c})")


@dataclass(frozen=True)
class TSeries:
    m: int
    f: DiscFactorization


@dataclass(frozen=True)
class SSeries:
    w: WeightSpec
    m: int
    n: int


@dataclass
class PartialSums:
    cutoffs: np.ndarray
    values: np.ndarray
    weil: np.ndarray | None = None  # running sum of Weil bounds (S-series only)

    def rows(self):
        return list(zip(self.cutoffs.tolist(), self.values.tolist()))


def weyl_totals(D, d, m, cmax, ceiling=None):
    """float64 tot[c] with T_m(d, D/d; 4c) = 2 tot[c], for c = 0..cmax (tot[0] unused)."""
    off, roots = root_table(D, cmax, ceiling)
    tab = genus_char_table(d).astype(np.int64) if d != 1 else np.ones(1, dtype=np.int64)
    tot, fails = _sumkern.weyl_totals(D, d, m, off, roots, int(cmax), tab, _sumkern.SEARCH_PAIRS)
    if fails.any():
        # rare forms with no small coprime value fall back to the exact search
        for c in np.nonzero(fails)[0]:
            c = int(c)
            s = 0.0
            for b in roots[off[c]:off[c + 1]]:
                b = int(b)
                s += genus_char(d, (c, b, (b * b - D) // (4 * c))) * math.cos(math.pi * ((m * b) % (2 * c)) / c)
            tot[c] = s
    return tot


def partial_sums(series, x, prec=53, stride=4):
    """Running sums at c = stride, 2 stride, ... <= x (stride a multiple of 4).

    T-series: sum_{4|c<=x} T_m(d,d';c)/sqrt(c).  S-series: sum_{4|c<=x} S_k^+(m,n;c)/c.
    Both are float64; prec is accepted for interface symmetry and must be <= 53.
    """
    x = int(x)
    if x < 4:
        raise ValueError("x must be >= 4")
    if x > PARTIAL_CEILING:
        raise ResourceLimit(f"x = {x} exceeds the partial-sum ceiling {PARTIAL_CEILING}")
    if prec > 53:
        raise ValueError("partial sums are accumulated in float64")
    if stride % 4:
        raise ValueError("stride must be a multiple of 4")
    if isinstance(series, TSeries):
        f = series.f
        tot = weyl_totals(f.D, f.d, series.m, x // 4)
        cp = np.arange(1, x // 4 + 1)
        run = np.cumsum(tot[1:] / np.sqrt(cp))
        weil = None
    elif isinstance(series, SSeries):
        PlusSumArgs(series.m, series.n, 4).check(series.w)
        spf = _rootkern.spf_sieve(max(x, 2))
        run, weil = _sumkern.plus_partial(int(2 * series.w.k), series.m, series.n, x, spf)
    else:
        raise TypeError("series must be TSeries or SSeries")
    cut = np.arange(4, 4 * len(run) + 1, 4)
    step = stride // 4
    sel = slice(step - 1, None, step)
    return PartialSums(cut[sel], run[sel], None if weil is None else weil[sel])


def growth_slope(ps: PartialSums, lo, hi, n=24):
    """Least-squares slope of log max_{c<=x}|sum| against log x at n log-spaced x in [lo, hi]."""
    if hi < 10 * lo:
        raise ValueError("fit range must span at least a decade")
    env = np.maximum.accumulate(np.abs(ps.values))
    xs = np.geomspace(lo, hi, n)
    idx = np.clip(np.searchsorted(ps.cutoffs, xs, side="right") - 1, 0, len(env) - 1)
    y = env[idx]
    if np.any(y <= 0):
        raise ValueError("partial sums vanish identically on the fit range")
    return float(np.polyfit(np.log(ps.cutoffs[idx]), np.log(y), 1)[0])
