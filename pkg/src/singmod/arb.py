"""Arbitrary-precision reals/complexes and the special functions used downstream.

Everything is built on mpmath.  A ``BigReal`` is an mpf paired with the bit
precision it was computed at; arithmetic keeps the smaller precision of the two
operands.  Error control is by re-running at higher precision, not by interval
enclosures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mp, mpf, mpc

MIN_PREC = 64
# mpmath exponents are unbounded in principle; we refuse anything beyond this
MAX_EXP_BITS = 1 << 32
LOG2E = 1.4426950408889634


class PrecisionError(ArithmeticError):
    """Requested accuracy could not be certified."""


def _check_prec(prec):
    if int(prec) != prec or prec < MIN_PREC:
        raise ValueError(f"precision must be an integer >= {MIN_PREC}, got {prec}")
    return int(prec)


def to_mpf(x, prec=None):
    """Convert int/Fraction/float/str/mpf/BigReal into an mpf at the current precision."""
    if isinstance(x, BigReal):
        return x.value
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def to_mpc(z):
    if isinstance(z, BigComplex):
        return z.value
    if isinstance(z, BigReal):
        return mpc(z.value)
    if isinstance(z, tuple):
        return mpc(to_mpf(z[0]), to_mpf(z[1]))
    if isinstance(z, (Fraction, int)):
        return mpc(to_mpf(z))
    return mpc(z)


@dataclass(frozen=True)
class BigReal:
    value: mpf
    prec: int

    def __post_init__(self):
        _check_prec(self.prec)
        # callers often build the value under guard bits; store it at the declared precision
        with mp.workprec(self.prec):
            object.__setattr__(self, "value", +to_mpf(self.value))

    @classmethod
    def of(cls, x, prec):
        prec = _check_prec(prec)
        with mp.workprec(prec):
            return cls(+to_mpf(x), prec)

    def _binop(self, other, op):
        if isinstance(other, BigReal):
            p = min(self.prec, other.prec)
            o = other.value
        else:
            p = self.prec
            o = other
        with mp.workprec(p):
            return BigReal(op(self.value, to_mpf(o)), p)

    def __add__(self, o):
        return self._binop(o, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, o):
        return self._binop(o, lambda a, b: a - b)

    def __rsub__(self, o):
        return self._binop(o, lambda a, b: b - a)

    def __mul__(self, o):
        return self._binop(o, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._binop(o, lambda a, b: a / b)

    def __rtruediv__(self, o):
        return self._binop(o, lambda a, b: b / a)

    def __neg__(self):
        return BigReal(-self.value, self.prec)

    def __abs__(self):
        return BigReal(abs(self.value), self.prec)

    def __float__(self):
        return float(self.value)

    def __lt__(self, o):
        return self.value < to_mpf(o)

    def __le__(self, o):
        return self.value <= to_mpf(o)

    def __gt__(self, o):
        return self.value > to_mpf(o)

    def __ge__(self, o):
        return self.value >= to_mpf(o)

    def nearest_int(self):
        """Round half away from zero."""
        v = self.value
        with mp.workprec(self.prec + 8):
            r = int(mpmath.floor(abs(v) + mpf(1) / 2))
        return -r if v < 0 else r

    def to_string(self, digits=None):
        if digits is None:
            digits = max(1, int(self.prec * 0.30103))
        return mpmath.nstr(self.value, digits, strip_zeros=False, min_fixed=-mpmath.inf,
                           max_fixed=mpmath.inf)

    def __repr__(self):
        return f"BigReal({mpmath.nstr(self.value, 20)}, prec={self.prec})"


@dataclass(frozen=True)
class BigComplex:
    value: mpc
    prec: int

    def __post_init__(self):
        _check_prec(self.prec)
        with mp.workprec(self.prec):
            object.__setattr__(self, "value", +to_mpc(self.value))

    @property
    def re(self):
        return BigReal(self.value.real, self.prec)

    @property
    def im(self):
        return BigReal(self.value.imag, self.prec)

    def __abs__(self):
        with mp.workprec(self.prec):
            return BigReal(abs(self.value), self.prec)

    def __complex__(self):
        return complex(self.value)

    def __repr__(self):
        return f"BigComplex({mpmath.nstr(self.value, 20)}, prec={self.prec})"


@lru_cache(maxsize=64)
def const_pi(prec):
    with mp.workprec(prec):
        return +mp.pi


@lru_cache(maxsize=64)
def const_ln2(prec):
    with mp.workprec(prec):
        return +mp.ln2


def trace_precision(D, m, terms=1):
    """Bits needed so that sums of ~terms values of size e^{pi m sqrt|D|} keep 0.1 absolute accuracy."""
    lead = math.pi * m * math.sqrt(abs(D)) * LOG2E
    return max(MIN_PREC, int(math.ceil(lead)) + 32 + int(math.ceil(math.log2(max(terms, 1)))))


def e_of(z, prec):
    """e(z) = exp(2 pi i z)."""
    prec = _check_prec(prec)
    with mp.workprec(prec + 16):
        zz = to_mpc(z)
        if 2 * math.pi * abs(float(zz.imag)) * LOG2E > MAX_EXP_BITS:
            raise OverflowError("e(z): exponent out of range")
        two_pi = 2 * const_pi(prec + 16)
        # split off the integer part of Re z so the phase is computed on a small argument
        x = zz.real
        x = x - mpmath.nint(x)
        val = mpmath.exp(-two_pi * zz.imag) * mpmath.expjpi(2 * x)
    with mp.workprec(prec):
        return BigComplex(+val, prec)


def _bessel_I_raw(nu, x, prec):
    """Ascending series for I_nu(x); all terms positive so only rounding accrues."""
    nu = to_mpf(nu)
    x = to_mpf(x)
    if x == 0:
        return mpf(1) if nu == 0 else mpf(0)
    h2 = (x / 2) ** 2
    term = (x / 2) ** nu / mpmath.gamma(nu + 1)
    total = term
    k = 0
    eps = mpf(2) ** (-prec - 8)
    while True:
        k += 1
        ratio = h2 / (k * (nu + k))
        term *= ratio
        total += term
        # once the ratio of successive terms is below 1/2 the tail is at most the current term
        if ratio < 0.5 and term <= eps * total:
            break
    return total


def bessel_I(nu, x, prec):
    prec = _check_prec(prec)
    if to_mpf(nu) < 0 or to_mpf(x) < 0:
        raise ValueError("bessel_I needs nu >= 0 and x >= 0")
    with mp.workprec(prec + 20 + int(math.log2(float(to_mpf(x)) + 2))):
        v = _bessel_I_raw(nu, x, prec)
    with mp.workprec(prec):
        return BigReal(+v, prec)


def _kiv_log_scale(v, x):
    """-log of the size of K_{iv}(x), from the uniform leading behaviour."""
    s = math.pi * v / 2
    if x > v:
        s += math.sqrt(x * x - v * v) - v * math.acos(v / x)
    return s


@lru_cache(maxsize=128)
def _gl_nodes(n, prec):
    """Gauss-Legendre nodes/weights on [-1, 1] at prec bits."""
    with mp.workprec(prec):
        xs, ws = [], []
        for k in range(1, n + 1):
            x = mpf(math.cos(math.pi * (k - 0.25) / (n + 0.5)))
            for _ in range(100):
                p0, p1 = mpf(1), x
                for j in range(2, n + 1):
                    p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mpf(2) ** (-prec + 4):
                    break
            p0, p1 = mpf(1), x
            for j in range(2, n + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = n * (x * p1 - p0) / (x * x - 1)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
        return tuple(xs), tuple(ws)


def gl_panels(f, pts, n, prec):
    """Composite Gauss-Legendre over consecutive breakpoints, with an error estimate.

    Each panel is done with n and with n + n//2 nodes; the returned error is the
    summed absolute difference, which overestimates the error of the finer rule.
    """
    n2 = n + n // 2
    x1, w1 = _gl_nodes(n, prec)
    x2, w2 = _gl_nodes(n2, prec)
    total = 0
    err = 0
    for a, b in zip(pts[:-1], pts[1:]):
        h = (b - a) / 2
        c = (a + b) / 2
        s1 = mpmath.fsum(w * f(c + h * x) for x, w in zip(x1, w1)) * h
        s2 = mpmath.fsum(w * f(c + h * x) for x, w in zip(x2, w2)) * h
        total += s2
        err += abs(s2 - s1)
    return total, err


def _nodes_for(prec):
    return max(16, int(prec * 0.2) + 12)


def _phase_breaks(phase, lo, hi, step):
    """Points in [lo, hi] where a monotone increasing phase crosses multiples of step."""
    out = [lo]
    p_lo, p_hi = phase(lo), phase(hi)
    k = math.floor(p_lo / step) + 1
    while k * step < p_hi:
        target = k * step
        a, b = lo if len(out) == 1 else out[-1], hi
        for _ in range(60):
            mid = 0.5 * (a + b)
            if phase(mid) < target:
                a = mid
            else:
                b = mid
        out.append(0.5 * (a + b))
        k += 1
    out.append(hi)
    return out


def bessel_K_imag_raw(v, x, prec, nodes=None):
    """K_{iv}(x) as an mpf accurate to about prec bits relative to its envelope.

    Starts from K_{iv}(x) = Re int_0^inf exp(-x cosh t + i v t) dt.  For x < v
    the path is moved to Im t = pi/2 up to the saddle mu + i pi/2 (cosh mu = v/x),
    then down a 45 degree segment to the real axis; along it the integrand never
    exceeds e^{-pi v/2}, so no cancellation has to be paid for.  The vertical
    leg from 0 to i pi/2 is purely imaginary and drops out.  For x >= v the real
    axis is used with guard bits covering the mild cancellation.
    """
    v = abs(float(v))
    x = float(x)
    if x <= 0:
        raise ValueError("bessel_K_imag needs x > 0")
    scale_log = _kiv_log_scale(v, x)
    n = nodes or _nodes_for(prec)
    if x < v:
        guard = 24 + int(math.log2(v + 2))
    else:
        guard = max(0, int((scale_log - x) * LOG2E)) + 24
    wp = prec + guard
    with mp.workprec(wp):
        vv, xx = mpf(v), mpf(x)
        pi = const_pi(wp)
        pieces = []
        if x < v:
            mu = math.acosh(v / x)
            mu_m = mpmath.acosh(vv / xx)
            # leg along Im t = pi/2: integrand e^{-v pi/2} e^{i(v s - x sinh s)}
            ph = lambda s: v * s - x * math.sinh(s)
            pts = _phase_breaks(ph, 0.0, mu, math.pi)
            pts = [mpf(p) for p in pts[:-1]] + [mu_m]
            f2 = lambda s: mpmath.cos(vv * s - xx * mpmath.sinh(s))
            val, err = gl_panels(f2, pts, n, wp)
            e = mpmath.exp(-vv * pi / 2)
            pieces.append((val * e, err * e))
            # 45 degree descent from the saddle to the real axis
            one_m_i = mpc(1, -1)
            def f3(u):
                t = mpc(mu_m + u, pi / 2 - u)
                return (mpmath.exp(-xx * mpmath.cosh(t) + mpc(0, 1) * vv * t) * one_m_i).real
            half = float(pi) / 2
            # the phase along this leg turns over roughly v*u radians
            nseg = max(4, int(v * half / math.pi) + 1)
            pts = [mpf(k) * (pi / 2) / nseg for k in range(nseg + 1)]
            pieces.append(gl_panels(f3, pts, n, wp))
            start = mu + half
            start_m = mu_m + pi / 2
        else:
            start = 0.0
            start_m = mpf(0)
        tol_log = scale_log + (prec + 8) / LOG2E
        T = max(start, math.acosh(max(1.0, tol_log / x))) + 0.25
        if T > start:
            knots = set()
            if v > 0:
                k = math.floor(start * v / math.pi) + 1
                while k * math.pi / v < T:
                    knots.add(k * math.pi / v)
                    k += 1
            s = start
            while s < T:
                s += 0.25
                knots.add(s)
            pts = [start_m] + [mpf(b) for b in sorted(knots) if start < b < T] + [mpf(T)]
            f4 = lambda s: mpmath.exp(-xx * mpmath.cosh(s)) * mpmath.cos(vv * s)
            pieces.append(gl_panels(f4, pts, n, wp))
        total = mpmath.fsum(p[0] for p in pieces)
        err = mpmath.fsum(p[1] for p in pieces)
        if err > mpf(2) ** (-prec) * mpmath.exp(-mpf(scale_log)):
            raise PrecisionError(f"K_iv quadrature not certified (v={v}, x={x})")
        return total


def bessel_K_imag(v, x, prec):
    prec = _check_prec(prec)
    val = bessel_K_imag_raw(v, x, prec)
    with mp.workprec(prec):
        return BigReal(+val, prec)


def _bessel_J_series(nu, x):
    """J_nu(x) by the ascending series; callers supply guard bits for the cancellation."""
    h2 = -(x / 2) ** 2
    term = (x / 2) ** nu / mpmath.gamma(nu + 1)
    total = term
    k = 0
    eps = mpf(2) ** (-mp.prec)
    big = abs(term)
    while True:
        k += 1
        ratio = h2 / (k * (nu + k))
        term *= ratio
        total += term
        big = max(big, abs(term))
        if abs(ratio) < 0.5 and abs(term) <= eps * big:
            break
    return total


def bessel_J_real(nu, x, prec):
    """J_nu(x) for real nu (not a negative integer) and x > 0, as mpf at prec bits."""
    xf = float(x)
    guard = int(xf * LOG2E) + 24
    with mp.workprec(prec + guard):
        return _bessel_J_series(to_mpf(nu), to_mpf(x))


def bessel_JY_third(x, prec):
    """(J_{1/3}(x), Y_{1/3}(x)) from the series for J_{+-1/3}."""
    xf = float(x)
    guard = int(xf * LOG2E) + 24
    with mp.workprec(prec + guard):
        xx = to_mpf(x)
        third = mpf(1) / 3
        jp = _bessel_J_series(third, xx)
        jm = _bessel_J_series(-third, xx)
        # Y_nu = (J_nu cos(nu pi) - J_{-nu}) / sin(nu pi), nu = 1/3
        y = (jp / 2 - jm) / (mpmath.sqrt(3) / 2)
        return jp, y


def bessel_M_third(x, prec):
    """M_{1/3}(x) = sqrt(J^2 + Y^2) and the phase derivative 2/(pi x M^2)."""
    prec = _check_prec(prec)
    if to_mpf(x) <= 0:
        raise ValueError("bessel_M_third needs x > 0")
    jp, y = bessel_JY_third(x, prec)
    with mp.workprec(prec + 16):
        M2 = jp * jp + y * y
        M = mpmath.sqrt(M2)
        dtheta = 2 / (const_pi(prec + 16) * to_mpf(x) * M2)
    with mp.workprec(prec):
        return BigReal(+M, prec), BigReal(+dtheta, prec)


def airy_neg(y, prec):
    """(Ai(-y), Ai'(-y)) for y > 0 via the J_{+-1/3}, J_{+-2/3} connection formulas."""
    yf = float(y)
    zeta_f = 2.0 / 3.0 * yf ** 1.5
    guard = int(zeta_f * LOG2E) + 24
    with mp.workprec(prec + guard):
        yy = to_mpf(y)
        zt = 2 * yy ** mpf(1.5) / 3
        third = mpf(1) / 3
        ai = mpmath.sqrt(yy) / 3 * (_bessel_J_series(third, zt) + _bessel_J_series(-third, zt))
        aip = yy / 3 * (_bessel_J_series(2 * third, zt) - _bessel_J_series(-2 * third, zt))
    return ai, aip
