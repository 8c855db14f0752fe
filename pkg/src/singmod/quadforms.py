"""Positive definite binary quadratic forms: reduction, enumeration, CM points.

The fundamental domain F is taken half-open:
    -1/2 <= Re z <= 0 and |z| >= 1,   or   0 < Re z < 1/2 and |z| > 1,
which for z_Q = (-b + sqrt(D)) / 2a means  -a < b <= a <= c  with  b >= 0 when a = c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath import mp, mpf

from . import _rootkern
from .arb import BigReal, _check_prec
from .characters import is_fundamental

# largest c the rectangle enumerator will sieve up to (memory is ~20 bytes per c)
RECT_CEILING = 20_000_000


class InvalidDiscriminant(ValueError):
    pass


class ResourceLimit(RuntimeError):
    pass


def check_disc(D):
    D = int(D)
    if D >= 0 or D % 4 not in (0, 1):
        raise InvalidDiscriminant(f"{D} is not a negative discriminant")
    return D


@dataclass(frozen=True, order=True)
class QForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a <= 0 or self.disc >= 0:
            raise ValueError(f"[{self.a},{self.b},{self.c}] is not positive definite")

    @property
    def disc(self):
        return self.b * self.b - 4 * self.a * self.c

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def is_primitive(self):
        return math.gcd(math.gcd(self.a, self.b), self.c) == 1

    def value(self, x, y):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def act(self, g):
        """Q o g for g = ((p, q), (r, s)) in SL2(Z)."""
        (p, q), (r, s) = g
        a, b, c = self.a, self.b, self.c
        return QForm(a * p * p + b * p * r + c * r * r,
                     2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
                     a * q * q + b * q * s + c * s * s)

    def __str__(self):
        return f"[{self.a},{self.b},{self.c}]"


@dataclass(frozen=True)
class DiscFactorization:
    D: int
    d: int
    dprime: int

    def __post_init__(self):
        check_disc(self.D)
        if not is_fundamental(self.d):
            raise ValueError(f"{self.d} is not a fundamental discriminant")
        if self.d * self.dprime != self.D or self.dprime % 4 not in (0, 1):
            raise ValueError(f"{self.D} = {self.d} * {self.dprime} is not an admissible factorization")

    @classmethod
    def of(cls, D, d=1):
        D, d = int(D), int(d)
        check_disc(D)
        if D % d != 0:
            raise ValueError(f"{d} does not divide {D}")
        return cls(D, d, D // d)


@dataclass(frozen=True)
class CMPoint:
    x: BigReal
    y: BigReal
    source: QForm


def reduce_form(Q):
    a, b, c = Q
    D = b * b - 4 * a * c
    while True:
        # bring b into (-a, a]
        k = (a - b) // (2 * a)
        b += 2 * a * k
        c = (b * b - D) // (4 * a)
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return QForm(a, b, c)


def is_reduced(Q):
    a, b, c = Q
    return -a < b <= a <= c and (b >= 0 or a < c)


@lru_cache(maxsize=4096)
def _reduced_forms(D):
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            out.append(QForm(a, b, c))
        a += 1
    return tuple(out)


def reduced_forms(D):
    """All forms (primitive or not) of discriminant D with z_Q in F."""
    return list(_reduced_forms(check_disc(D)))


def omega(Q):
    a, b, c = reduce_form(Q)
    if b == 0 and a == c:
        return 2
    if a == b == c:
        return 3
    return 1


def class_number_weighted(D):
    return sum((Fraction(1, omega(Q)) for Q in reduced_forms(D)), Fraction(0))


def cm_point(Q, prec):
    prec = _check_prec(prec)
    a, b, c = Q
    D = b * b - 4 * a * c
    with mp.workprec(prec):
        x = mpf(-b) / (2 * a)
        y = mp.sqrt(-D) / (2 * a)
    return CMPoint(BigReal(x, prec), BigReal(y, prec), Q if isinstance(Q, QForm) else QForm(*Q))


def rect_cmax(D, Y):
    """Largest integer c with c < sqrt|D| / (2Y), i.e. Im z_Q > Y."""
    D = check_disc(D)
    if Y <= 0:
        raise ValueError("Y must be positive")
    with mp.workprec(256):
        bound = mp.sqrt(-D) / (2 * mpf(Y))
        cm = int(mp.ceil(bound)) - 1
    return max(cm, 0)


_table_cache = {}


def root_table(D, X, ceiling=None):
    """CSR table of {b mod 2c : b^2 = D mod 4c} for 1 <= c <= X (offsets, roots)."""
    D = check_disc(D)
    ceiling = RECT_CEILING if ceiling is None else ceiling
    X = int(X)
    if X > ceiling:
        raise ResourceLimit(f"enumeration bound {X} exceeds ceiling {ceiling}")
    X = max(X, 1)
    key = D
    hit = _table_cache.get(key)
    if hit is not None and hit[0] >= X:
        return hit[1], hit[2]
    spf = _rootkern.spf_sieve(X)
    cnt = _rootkern.root_counts(D, X, spf)
    off, roots = _rootkern.root_table(D, X, spf, cnt)
    # a single-entry cache keeps repeated calls for one D cheap without holding memory
    _table_cache.clear()
    _table_cache[key] = (X, off, roots)
    return off, roots


def rectangle_arrays(D, cmax, ceiling=None):
    """(c, b) arrays for all forms [c, b, (b^2-D)/4c] with 1 <= c <= cmax, -c < b <= c."""
    if cmax < 1:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    off, roots = root_table(D, cmax, ceiling)
    return _rootkern.rectangle_pairs(off, roots, int(cmax))


def forms_in_rectangle(D, Y, ceiling=None):
    """Forms whose CM point lies in R(Y): -1/2 <= Re z < 1/2, Im z > Y."""
    D = check_disc(D)
    cs, bs = rectangle_arrays(D, rect_cmax(D, Y), ceiling)
    return [QForm(int(c), int(b), (int(b) * int(b) - D) // (4 * int(c))) for c, b in zip(cs, bs)]


def root_count(D, c):
    """|{b mod 2c : b^2 = D mod 4c}| from the enumerator."""
    off, _ = root_table(D, c)
    return int(off[c + 1] - off[c])
