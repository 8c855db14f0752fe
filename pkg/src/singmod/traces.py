"""Twisted traces of j_m at CM points of discriminant D, computed three ways.

direct  sum over reduced forms of chi_d(Q) j_m(z_Q) / w_Q
series  -24 sigma_1(m) h_d(D) + sum_{4|c} T_m(d,d';c) sinh(4 pi m sqrt|D| / c)
rect    -24 sigma_1(m) h_d(D) + sum_{z_Q in R(Y)} chi_d(Q) (e(-m z_Q) - e(-m conj z_Q))

Writing c = 4c', the c-sum and the rectangle sum share their terms: both are sums
over c' of 2 tot(c') sinh(pi m sqrt|D| / c') with tot(c') = T_m(d,d';4c')/2 (the
rectangle is the sharp cutoff c' < sqrt|D| / 2Y).  Terms with sinh argument >= 2
(the "head") are evaluated exactly at the trace precision, the rest in float64.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp, mpf

from .arb import BigReal, _check_prec, const_pi, e_of, trace_precision
from .characters import genus_char, sigma1
from .expsums import weyl_sum, weyl_totals
from .modforms import eval_jm
from .quadforms import (RECT_CEILING, DiscFactorization, ResourceLimit, class_number_weighted, cm_point,
                        forms_in_rectangle, omega, rect_cmax, reduced_forms, root_table)

# rectangle sums with at most this many c' are evaluated form by form at full precision
RECT_EXACT_MAX = 3000
# the sharp rectangle cutoff leaves an error of about 0.8 pi m sqrt|D| / sqrt(c'_max);
# c'_max >= RECT_KAPPA m^2 |D| keeps it below 0.1 on |D| <= 500, m <= 3
RECT_KAPPA = 3000


class NonConvergence(RuntimeError):
    pass


class IdentityFailure(AssertionError):
    pass


@dataclass(frozen=True)
class SeriesConfig:
    smooth: bool = True
    beta: float = 10.0      # Kaiser window shape
    ratio: float = 20.0     # window falls from 1 to 0 over c' in [x, ratio x]
    max_cutoff: int = RECT_CEILING  # largest c' ever summed
    settle: float = 100.0   # the stop rule may fire only once c' >= settle * pi m sqrt|D|


@dataclass(frozen=True)
class SeriesResult:
    value: BigReal
    cutoff: int        # x in the c-variable (c = 4c') where the stop rule fired
    cmax: int          # largest c' that entered the sum
    step: float        # last change between successive estimates


@dataclass(frozen=True)
class RectResult:
    value: BigReal
    nearest: int
    Y: float
    cmax: int          # largest c' with Im z_Q > Y
    exact: bool        # evaluated form by form


@dataclass
class TraceReport:
    D: int
    d: int
    m: int
    direct: BigReal | None = None
    series: BigReal | None = None
    series_cutoff: int | None = None
    rect: BigReal | None = None
    rect_Y: float | None = None
    rect_cmax: int | None = None
    nearest_integer: int | None = None
    margin: float | None = None
    max_deviation: float | None = None
    precision: int = 0
    timing_ms: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


def twisted_class_number(f: DiscFactorization):
    """h_d(D) = sum of chi_d(Q)/omega_Q over reduced forms.

    Equals h(D) for d = 1 and vanishes unless d' is a square; the constant
    -24 sigma_1(m) of j_m contributes -24 sigma_1(m) h_d(D) to every twisted trace.
    """
    if f.d == 1:
        return class_number_weighted(f.D)
    return sum((Fraction(genus_char(f.d, Q), omega(Q)) for Q in reduced_forms(f.D)), Fraction(0))


def main_term(f: DiscFactorization, m):
    """-24 sigma_1(m) h_d(D) as a Fraction."""
    if f.d != 1 and not _is_square(f.dprime):
        return Fraction(0)
    return -24 * sigma1(m) * twisted_class_number(f)


def _is_square(n):
    return n > 0 and math.isqrt(n) ** 2 == n


def _prec_for(f, m, prec, terms):
    if prec is None:
        return trace_precision(f.D, m, terms)
    return _check_prec(prec)


def trace_direct(f: DiscFactorization, m, prec=None):
    if m < 1:
        raise ValueError("m must be >= 1")
    forms = reduced_forms(f.D)
    prec = _prec_for(f, m, prec, len(forms))
    wp = prec + 8
    with mp.workprec(wp):
        total = mpmath.mpc(0)
        scale = mpf(0)
        for Q in forms:
            chi = genus_char(f.d, Q)
            if chi == 0:
                continue
            z = cm_point(Q, wp)
            v = eval_jm(m, mpmath.mpc(z.x.value, z.y.value), wp).value
            total += chi * v / omega(Q)
            scale += abs(v)
        if abs(total.imag) > mpf(2) ** (-prec // 2) * max(1, scale):
            raise ArithmeticError(f"direct trace has imaginary part {mpmath.nstr(total.imag, 5)}")
        return BigReal(+total.real, prec)


def _head_cutoff(D, m):
    """Largest c' whose sinh argument pi m sqrt|D| / c' is at least 2."""
    return int(math.pi * m * math.sqrt(-D) / 2)


class _Terms:
    """Per-c' terms 2 tot(c') sinh(pi m sqrt|D| / c'): exact head, float64 tail."""

    def __init__(self, f, m, prec):
        self.f, self.m = f, m
        self.D = f.D
        self.ch = _head_cutoff(f.D, m)
        self.X = 0
        self.tail = np.zeros(1)
        self.prec = prec
        self.head = None

    def ensure(self, X, ceiling=RECT_CEILING):
        if X <= self.X:
            return
        if X > ceiling:
            raise ResourceLimit(f"needs c' up to {X}, ceiling is {ceiling}")
        # grow geometrically so repeated doubling does not rebuild every time
        X = min(max(X, 2 * self.X), ceiling)
        tot = weyl_totals(self.D, self.f.d, self.m, X)
        a = math.pi * self.m * math.sqrt(-self.D)
        c = np.arange(X + 1, dtype=float)
        c[0] = 1.0
        t = 2 * tot * np.sinh(a / c)
        t[:self.ch + 1] = 0.0
        self.tail = t
        self.X = X

    def _exact_head(self):
        """Exact sum over c' <= ch, in increasing c'."""
        D, d, m = self.D, self.f.d, self.m
        out = []
        if self.ch < 1:
            return out
        off, roots = root_table(D, self.ch)
        with mp.workprec(self.prec + 16):
            sq = mpmath.sqrt(-D)
            pi = const_pi(self.prec + 16)
            for c in range(1, self.ch + 1):
                s = mpf(0)
                for b in roots[off[c]:off[c + 1]]:
                    b = int(b)
                    chi = genus_char(d, (c, b, (b * b - D) // (4 * c)))
                    if chi:
                        s += chi * mpmath.cospi(mpf((m * b) % (2 * c)) / c)
                out.append(2 * s * mpmath.sinh(pi * m * sq / c))
        return out

    def head_sum(self, upto=None):
        if self.head is None:
            self.head = self._exact_head()
        n = len(self.head) if upto is None else min(upto, len(self.head))
        with mp.workprec(self.prec + 16):
            return mpmath.fsum(self.head[:n])


_terms_cache = {}


def _terms(f, m, prec):
    key = (f.D, f.d, m)
    t = _terms_cache.get(key)
    if t is None or t.prec < prec:
        _terms_cache.clear()
        t = _Terms(f, m, prec)
        _terms_cache[key] = t
    return t


def kaiser_window(beta, n=4096):
    """W(u) = 1 for u <= 0, 0 for u >= 1, in between one minus the normalized integral of a Kaiser kernel."""
    s = np.linspace(0.0, 1.0, n + 1)
    k = np.i0(beta * np.sqrt(np.maximum(0.0, 1 - (2 * s - 1) ** 2)))
    cum = np.concatenate([[0.0], np.cumsum((k[1:] + k[:-1]) / 2)])
    cum /= cum[-1]

    def W(u):
        return np.where(u <= 0, 1.0, np.where(u >= 1, 0.0, 1 - np.interp(u, s, cum)))
    return W


def _smoothed_tail(terms, x, cfg, W):
    hi = int(cfg.ratio * x) + 1
    lo = terms.ch + 1
    c = np.arange(lo, hi + 1, dtype=float)
    w = W(np.log(c / x) / math.log(cfg.ratio))
    return float(np.dot(terms.tail[lo:hi + 1], w))


def trace_sinh_series(f: DiscFactorization, m, prec=None, tol=5e-5, config=SeriesConfig()):
    """Sinh series for the trace with an adaptive cutoff x (in the c-variable, starting at 8 m sqrt|D|).

    smooth mode: the c'-sum is cut off by a Kaiser window on log c' spanning a
    factor config.ratio, and two Richardson steps (exponents 3/2, 5/2) remove the
    leading smooth truncation error.  x doubles until two successive changes of
    the estimate are both below tol; before c' reaches config.settle * pi m sqrt|D|
    the extrapolation still has a transient, so the rule is not allowed to fire.
    sharp mode: plain partial sums over c <= x, same stop rule.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    D = f.D
    prec = _prec_for(f, m, prec, 1 + 2 * _head_cutoff(D, m))
    terms = _terms(f, m, prec)
    base = main_term(f, m)
    xp = max(2 * m * math.sqrt(-D), terms.ch + 1)   # x/4 in the c'-variable
    with mp.workprec(prec + 16):
        exact = mpf(base.numerator) / base.denominator + terms.head_sum()
    hist = []
    if config.smooth:
        W = kaiser_window(config.beta)
        p1, p2 = 2 ** 1.5, 2 ** 2.5

        def est(xc):
            terms.ensure(int(4 * config.ratio * xc) + 2, config.max_cutoff)
            S = [_smoothed_tail(terms, k * xc, config, W) for k in (1, 2, 4)]
            r1 = [(p1 * S[i + 1] - S[i]) / (p1 - 1) for i in (0, 1)]
            return (p2 * r1[1] - r1[0]) / (p2 - 1), int(4 * config.ratio * xc) + 1
    else:
        def est(xc):
            X = int(xc)
            terms.ensure(X, config.max_cutoff)
            return float(terms.tail[:X + 1].sum()), X
    while True:
        try:
            val, cmax = est(xp)
        except ResourceLimit as e:
            raise NonConvergence(f"series for D={D}, d={f.d}, m={m} did not settle: {e}") from None
        hist.append(val)
        if xp >= config.settle * math.pi * m * math.sqrt(-D) and len(hist) >= 3 and abs(hist[-1] - hist[-2]) < tol and abs(hist[-2] - hist[-3]) < tol:
            step = abs(hist[-1] - hist[-2])
            break
        xp *= 2
    with mp.workprec(prec + 16):
        total = BigReal(+(exact + val), prec)
    return SeriesResult(total, int(4 * xp), cmax, step)


def default_Y(D, m, A=3.01, B=1.01, C=1.0):
    """min of the C m^-A |D|^-B family and the Y with c'_max = RECT_KAPPA m^2 |D|."""
    y_cor = C * m ** (-A) * abs(D) ** (-B)
    y_acc = math.sqrt(abs(D)) / (2 * RECT_KAPPA * m * m * abs(D))
    return min(y_cor, y_acc)


def _rect_exact(f, m, Y, prec):
    D, d = f.D, f.d
    with mp.workprec(prec + 16):
        total = mpmath.mpc(0)
        for Q in forms_in_rectangle(D, Y):
            chi = genus_char(d, Q)
            if not chi:
                continue
            z = cm_point(Q, prec + 16)
            zz = mpmath.mpc(z.x.value, z.y.value)
            total += chi * (e_of(-m * zz, prec + 16).value - e_of(-m * mpmath.conj(zz), prec + 16).value)
        return total


def trace_rect(f: DiscFactorization, m, Y=None, prec=None, exact=None):
    """Main term plus the rectangle sum over z_Q with Im z_Q > Y, and its nearest integer."""
    if m < 1:
        raise ValueError("m must be >= 1")
    D = f.D
    Y = default_Y(D, m) if Y is None else float(Y)
    if Y <= 0:
        raise ValueError("Y must be positive")
    if Y * m > 1:
        warnings.warn(f"Y*m = {Y * m:.3g} > 1: outside the regime where the rectangle sum approximates the trace")
    cm = rect_cmax(D, Y)
    prec = _prec_for(f, m, prec, 1 + 2 * min(cm, _head_cutoff(D, m)))
    if exact is None:
        exact = cm <= RECT_EXACT_MAX
    base = main_term(f, m)
    with mp.workprec(prec + 16):
        b = mpf(base.numerator) / base.denominator
        if exact:
            s = _rect_exact(f, m, Y, prec)
            if abs(s.imag) > mpf(2) ** (-prec // 2) * max(1, abs(s.real)):
                raise ArithmeticError(f"rectangle sum has imaginary part {mpmath.nstr(s.imag, 5)}")
            total = b + s.real
        else:
            terms = _terms(f, m, prec)
            terms.ensure(max(cm, 1))
            total = b + terms.head_sum(cm) + float(terms.tail[:cm + 1].sum())
        val = BigReal(+total, prec)
    return RectResult(val, val.nearest_int(), Y, cm, exact)


def rect_exp_sum(f: DiscFactorization, m, Y, xi, prec=96):
    """Both sides of the Weyl-sum / rectangle correspondence; returns the CM-point side.

    left:  (1/2) sum_{4|c < 2 sqrt|D| / Y} T_m(d,d';c) exp(xi 4 pi m sqrt|D| / c)
    right: sum_{z_Q in R(Y)} chi_d(Q) e(-m z_{Q,xi}),  z_{Q,1} = z_Q, z_{Q,-1} = conj z_Q
    """
    if xi not in (1, -1):
        raise ValueError("xi must be +1 or -1")
    D, d = f.D, f.d
    prec = _check_prec(prec)
    wp = prec + 16
    cm = rect_cmax(D, Y)
    with mp.workprec(wp):
        sq = mpmath.sqrt(-D)
        pi = const_pi(wp)
        left = mpf(0)
        mag = mpf(0)
        for c in range(1, cm + 1):
            T = weyl_sum(m, f, 4 * c, "direct", wp).value
            t = T * mpmath.exp(xi * pi * m * sq / c) / 2
            left += t
            mag += abs(t)
        right = mpmath.mpc(0)
        for Q in forms_in_rectangle(D, Y):
            chi = genus_char(d, Q)
            if not chi:
                continue
            z = cm_point(Q, wp)
            zz = mpmath.mpc(z.x.value, z.y.value)
            if xi == -1:
                zz = mpmath.conj(zz)
            right += chi * e_of(-m * zz, wp).value
        tol = mpf(2) ** (-prec + 24) * max(1, mag)
        if abs(right - left) > tol:
            raise IdentityFailure(f"rectangle identity fails for D={D} d={d} m={m} Y={Y} xi={xi}: "
                                  f"Weyl side {mpmath.nstr(left, 20)}, CM side {mpmath.nstr(right, 20)}")
        return BigReal(+right.real, prec)


def _nearest_rational(x: BigReal, den=6):
    """The fraction p/den' (den' | den) closest to x, with its distance."""
    v = x.value
    best = None
    for q in (1, 2, 3, 6):
        if den % q:
            continue
        p = int(mpmath.nint(v * q))
        dist = float(abs(v - mpf(p) / q))
        if best is None or dist < best[1] - 1e-30:
            best = (Fraction(p, q), dist)
    return best


def compare(f: DiscFactorization, m, methods=("direct", "series", "rect"), Y=None, tol=5e-5, prec=None,
            series_config=SeriesConfig()):
    """Run the requested methods at one precision and collect a TraceReport."""
    D = f.D
    if prec is None:
        prec = trace_precision(D, m, 1 + 2 * max(len(reduced_forms(D)), _head_cutoff(D, m)))
    rep = TraceReport(D, f.d, m, precision=prec)
    if "series" in methods and "rect" in methods:
        # the rectangle cutoff is usually the larger one: build the shared table once at full size
        cm = rect_cmax(D, default_Y(D, m) if Y is None else float(Y))
        if RECT_EXACT_MAX < cm <= RECT_CEILING:
            _terms(f, m, prec).ensure(cm)
    vals = {}
    if "direct" in methods:
        t0 = time.perf_counter()
        rep.direct = trace_direct(f, m, prec)
        rep.timing_ms["direct"] = round(1000 * (time.perf_counter() - t0), 3)
        vals["direct"] = rep.direct
        rep.nearest_integer = rep.direct.nearest_int()
        rep.margin = float(abs(rep.direct - rep.nearest_integer))
    if "series" in methods:
        t0 = time.perf_counter()
        s = trace_sinh_series(f, m, prec, tol, series_config)
        rep.timing_ms["series"] = round(1000 * (time.perf_counter() - t0), 3)
        rep.series, rep.series_cutoff = s.value, s.cutoff
        vals["series"] = s.value
    if "rect" in methods:
        t0 = time.perf_counter()
        r = trace_rect(f, m, Y, prec)
        rep.timing_ms["rect"] = round(1000 * (time.perf_counter() - t0), 3)
        rep.rect, rep.rect_Y, rep.rect_cmax = r.value, r.Y, r.cmax
        vals["rect"] = r.value
        if rep.nearest_integer is None:
            rep.nearest_integer = r.nearest
            rep.margin = float(abs(r.value - r.nearest))
    if rep.nearest_integer is None and rep.series is not None:
        rep.nearest_integer = rep.series.nearest_int()
        rep.margin = float(abs(rep.series - rep.nearest_integer))
    names = list(vals)
    devs = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            devs[(a, b)] = float(abs(vals[a] - vals[b]))
    rep.max_deviation = max(devs.values()) if devs else 0.0
    for (a, b), dv in devs.items():
        lim = 10 * tol if "rect" not in (a, b) else 0.1
        if dv > lim:
            rep.flags.append(f"{a}/{b} disagree by {dv:.3g}")
    return rep
