"""numba kernels for the float64 fast paths: plus-space Kloosterman sums for many c,
per-c Weyl-sum totals over the root table, and genus characters of forms.

Everything here has a slower exact counterpart (expsums, characters) that the
tests compare against.
"""

import math

import numpy as np
from numba import njit

# (x, y) search order for represented values, shortest first
_PAIRS = []
for _s in range(1, 13):
    for _x in range(0, _s + 1):
        _y = _s - _x
        for _sy in ((1, -1) if _y and _x else (1,)):
            _PAIRS.append((_x, _sy * _y))
SEARCH_PAIRS = np.array(_PAIRS, dtype=np.int64)
CHI_FAIL = 2


@njit(cache=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def chi_form(a, b, c, d, tab, pairs):
    """Genus character chi_d([a, b, c]); CHI_FAIL if no small coprime value was found."""
    if d == 1:
        return 1
    ad = abs(d)
    if _gcd(_gcd(_gcd(a, b), c), ad) > 1:
        return 0
    for i in range(pairs.shape[0]):
        x = pairs[i, 0]
        y = pairs[i, 1]
        n = a * x * x + b * x * y + c * y * y
        if _gcd(n, ad) == 1:
            return tab[n % ad]
    return CHI_FAIL


@njit(cache=True)
def weyl_totals(D, d, m, off, roots, cmax, tab, pairs):
    """tot[c] = sum over b in R(c) of chi_d([c, b, (b^2-D)/4c]) cos(pi m b / c), c = 1..cmax.

    T_m(d, d'; 4c) = 2 tot[c].  fails[c] counts forms whose character search failed.
    """
    tot = np.zeros(cmax + 1)
    fails = np.zeros(cmax + 1, dtype=np.int64)
    for c in range(1, cmax + 1):
        s = 0.0
        for i in range(off[c], off[c + 1]):
            b = roots[i]
            a2 = (b * b - D) // (4 * c)
            ch = chi_form(c, b, a2, d, tab, pairs)
            if ch == CHI_FAIL:
                fails[c] += 1
                continue
            if ch != 0:
                k = (m * b) % (2 * c)
                s += ch * math.cos(math.pi * k / c)
        tot[c] = s
    return tot, fails


@njit(cache=True)
def _legendre_table(p):
    tab = -np.ones(p, dtype=np.int8)
    tab[0] = 0
    for r in range(1, (p + 1) // 2):
        tab[r * r % p] = 1
    return tab


@njit(cache=True)
def plus_sum(k2, m, n, c, spf):
    """S_k^+(m, n; c) in float64 for 4 | c; k2 = 2k in {1, -1}.

    (c/.) is even and d -> c - d swaps eps_d between 1 and i while negating the
    phase t, so the pair {d, c - d} with d = 1 mod 4 contributes
    (c/d)(cos t + k2 sin t)(1 + k2 i).  Times e(-k/4) that is
    2 (c/d) sin(t + pi/4) for k = 1/2 and 2 (c/d) cos(t + pi/4) for k = -1/2.
    """
    nd = (c + 3) // 4
    # chi[i] = (c/d) for d = 4i + 1; zero marks d not coprime to c
    chi = np.ones(nd, dtype=np.int8)
    t = c
    v2 = 0
    while t % 2 == 0:
        t //= 2
        v2 += 1
    if v2 % 2 == 1:
        for i in range(1, nd, 2):  # d = 5 mod 8
            chi[i] = -chi[i]
    while t > 1:
        p = spf[t]
        e = 0
        while t % p == 0:
            t //= p
            e += 1
        leg = _legendre_table(p)
        if e % 2 == 0:
            for r in range(1, p):
                leg[r] = 1
        # d = 1 mod 4 so (p/d) = (d/p) by reciprocity
        r = 1 % p
        step = 4 % p
        for i in range(nd):
            chi[i] *= leg[r]
            r += step
            if r >= p:
                r -= p
    units = np.empty(nd, dtype=np.int64)
    nu = 0
    for i in range(nd):
        if chi[i] != 0:
            units[nu] = i
            nu += 1
    if nu == 0:
        return 0.0
    pref = np.empty(nu, dtype=np.int64)
    acc = 1
    for i in range(nu):
        acc = acc * (4 * units[i] + 1) % c
        pref[i] = acc
    a0, m0 = acc, c
    x0, x1 = 1, 0
    while m0:
        q = a0 // m0
        a0, m0 = m0, a0 - q * m0
        x0, x1 = x1, x0 - q * x1
    inv = x0 % c
    mm = m % c
    nn = n % c
    s = 0.0
    w = 2 * math.pi / c
    for i in range(nu - 1, -1, -1):
        d = 4 * units[i] + 1
        dinv = inv * (pref[i - 1] if i > 0 else 1) % c
        inv = inv * d % c
        kk = (mm * dinv + nn * d) % c
        if k2 == 1:
            s += chi[units[i]] * math.sin(w * kk + math.pi / 4)
        else:
            s += chi[units[i]] * math.cos(w * kk + math.pi / 4)
    s *= 2.0
    if v2 == 2:
        s *= 2
    return s


@njit(cache=True)
def plus_partial(k2, m, n, xmax, spf):
    """Running sums of S_k^+(m, n; c)/c over c = 4, 8, ..., <= xmax; also the Weil-bound running sum."""
    nc = xmax // 4
    vals = np.zeros(nc)
    weil = np.zeros(nc)
    s = 0.0
    w = 0.0
    g_mn = _gcd(m, n)
    for j in range(nc):
        c = 4 * (j + 1)
        s += plus_sum(k2, m, n, c, spf) / c
        # 2 sigma_0(c) gcd(m,n,c)^{1/2} sqrt(c) / c
        t = c
        s0 = 1
        while t > 1:
            p = spf[t]
            e = 0
            while t % p == 0:
                t //= p
                e += 1
            s0 *= e + 1
        w += 2 * s0 * math.sqrt(_gcd(g_mn, c)) / math.sqrt(c)
        vals[j] = s
        weil[j] = w
    return vals, weil
