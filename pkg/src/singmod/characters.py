"""Kronecker symbols, the theta-multiplier factor eps_d, genus characters, divisor sums."""

import math
from dataclasses import dataclass

import numpy as np


def kronecker(a, n):
    """Kronecker symbol (a/n) for arbitrary integers.

    Conventions: (a/0) = 1 iff a = +-1; (a/-1) = sign of a (with (0/-1) = 1);
    (a/2) = 0, 1, -1 for a even, a = +-1 mod 8, a = +-3 mod 8.
    """
    a = int(a)
    n = int(n)
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    # power of two in n
    v = (n & -n).bit_length() - 1
    n >>= v
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # now n odd and positive: Jacobi symbol
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def eps_d(dd):
    """1 if dd = 1 mod 4, i if dd = 3 mod 4."""
    dd = int(dd)
    if dd % 2 == 0:
        raise ValueError(f"eps_d needs an odd argument, got {dd}")
    return 1 if dd % 4 == 1 else 1j


def is_squarefree(n):
    n = abs(int(n))
    if n == 0:
        return False
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
        p += 1 if p == 2 else 2
    return True


def is_fundamental(d):
    d = int(d)
    if d == 1:
        return True
    if d == 0:
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        n = d // 4
        return n % 4 in (2, 3) and is_squarefree(n)
    return False


@dataclass(frozen=True)
class GenusCharSpec:
    d: int

    def __post_init__(self):
        if not is_fundamental(self.d):
            raise ValueError(f"{self.d} is not a fundamental discriminant")


def _search_values(a, b, c, d, bound):
    """Yield values Q(x, y) over |x|, |y| <= bound that are coprime to d."""
    # small representations first so the scan usually stops immediately
    pairs = sorted(((x, y) for x in range(0, bound + 1) for y in range(-bound, bound + 1)
                    if (x, y) != (0, 0) and (x > 0 or y > 0)),
                   key=lambda t: (abs(t[0]) + abs(t[1]), t))
    for x, y in pairs:
        n = a * x * x + b * x * y + c * y * y
        if math.gcd(n, d) == 1:
            yield n


def genus_char(d, Q, check=False):
    """chi_d(Q) for a positive definite form Q = (a, b, c) with d | disc(Q).

    0 if gcd(a, b, c, d) > 1, else (d/n) for a represented n coprime to d.
    With check=True a second, distinct represented value is located and the
    two symbols are compared.
    """
    a, b, c = (int(t) for t in (Q if isinstance(Q, tuple) else (Q.a, Q.b, Q.c)))
    d = int(d)
    if d == 1:
        return 1
    D = b * b - 4 * a * c
    if D % d != 0 or (D // d) % 4 not in (0, 1):
        raise ValueError(f"{d} does not split the discriminant {D}")
    if math.gcd(math.gcd(math.gcd(a, b), c), d) > 1:
        return 0
    bound = int(4 * (1 + math.log(abs(d))))
    for _ in range(4):
        it = _search_values(a, b, c, d, bound)
        n1 = next(it, None)
        if n1 is not None:
            val = kronecker(d, n1)
            if check:
                for n2 in it:
                    if n2 != n1:
                        if kronecker(d, n2) != val:
                            raise AssertionError(f"genus character not well defined on {Q}: {n1}, {n2}")
                        break
            return val
        bound *= 4
    raise RuntimeError(f"no value of {Q} coprime to {d} found")


def genus_char_table(d):
    """(d/n) for n = 0..|d|-1; for fundamental d and n > 0 this is periodic mod |d|."""
    d = int(d)
    k = abs(d)
    return np.array([kronecker(d, n) for n in range(k)], dtype=np.int8)


def divisors(n):
    n = int(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def sigma0(n):
    return len(divisors(n))


def sigma1(n):
    return sum(divisors(n))


def delta_d(d):
    return 1 if int(d) == 1 else 0


def arith(m, d=1):
    """(delta_d, sigma0(m), sigma1(m))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return delta_d(d), sigma0(m), sigma1(m)


def fundamental_divisors(D):
    """Fundamental d with d | D and D/d = 0, 1 mod 4, in increasing |d| order (d = 1 first)."""
    D = int(D)
    out = []
    for k in divisors(abs(D)):
        for d in (k, -k):
            if is_fundamental(d) and D % d == 0 and (D // d) % 4 in (0, 1):
                out.append(d)
    return sorted(set(out), key=lambda t: (abs(t), t))
