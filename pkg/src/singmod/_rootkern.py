"""numba kernels: square roots of D modulo 4c for every c up to a bound.

For each c >= 1 we want R(c) = {b mod 2c : b^2 = D (mod 4c)}.  The set is
multiplicative over the prime-power split c = p^e * rest (p the smallest prime
of c), so it is built bottom-up in increasing c and stored in CSR form.

Conventions for the pieces:
  odd p^e : roots r mod p^e of r^2 = D (mod p^e)
  2^e     : roots r mod 2^(e+1) of r^2 = D (mod 2^(e+2))
R(q) for a prime power q is stored mod 2q, which for odd q also fixes b = D mod 2.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def spf_sieve(n):
    spf = np.zeros(n + 1, dtype=np.int32)
    for i in range(2, n + 1):
        if spf[i] == 0:
            for j in range(i, n + 1, i):
                if spf[j] == 0:
                    spf[j] = i
    return spf


@njit(cache=True)
def _powmod(a, e, m):
    r = 1
    a %= m
    while e > 0:
        if e & 1:
            r = r * a % m
        a = a * a % m
        e >>= 1
    return r


@njit(cache=True)
def _invmod(a, m):
    a %= m
    t, nt, r, nr = 0, 1, m, a
    while nr != 0:
        q = r // nr
        t, nt = nt, t - q * nt
        r, nr = nr, r - q * nr
    if t < 0:
        t += m
    return t


@njit(cache=True)
def _sqrt_mod_prime(a, p):
    """A square root of a (a quadratic residue, p odd prime, p not dividing a)."""
    a %= p
    if p % 4 == 3:
        return _powmod(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while _powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    mm, c, t, r = s, _powmod(z, q, p), _powmod(a, q, p), _powmod(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = c
        for _ in range(mm - i - 1):
            b = b * b % p
        mm, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


@njit(cache=True)
def _split(c, spf):
    p = spf[c]
    q = 1
    e = 0
    rest = c
    while rest % p == 0:
        rest //= p
        q *= p
        e += 1
    return p, e, q, rest


@njit(cache=True)
def _pp_count(D, p, e, q):
    if p == 2:
        mod = 4 * q
        cnt = 0
        for b in range(2 * q):
            if (b * b - D) % mod == 0:
                cnt += 1
        return cnt
    Dm = D % p
    if Dm != 0:
        return 2 if _powmod(Dm, (p - 1) // 2, p) == 1 else 0
    cnt = 0
    for r in range(q):
        if (r * r - D) % q == 0:
            cnt += 1
    return cnt


@njit(cache=True)
def root_counts(D, X, spf):
    cnt = np.zeros(X + 1, dtype=np.int64)
    cnt[1] = 1
    for c in range(2, X + 1):
        p, e, q, rest = _split(c, spf)
        if rest == 1:
            cnt[c] = _pp_count(D, p, e, q)
        else:
            cnt[c] = cnt[q] * cnt[rest]
    return cnt


@njit(cache=True)
def root_table(D, X, spf, cnt):
    """CSR arrays (offsets, roots) with roots of c stored mod 2c, sorted."""
    off = np.zeros(X + 2, dtype=np.int64)
    for c in range(1, X + 1):
        off[c + 1] = off[c] + cnt[c]
    roots = np.zeros(off[X + 1], dtype=np.int64)
    roots[off[1]] = D % 2
    for c in range(2, X + 1):
        k = cnt[c]
        if k == 0:
            continue
        p, e, q, rest = _split(c, spf)
        o = off[c]
        if rest == 1:
            if p == 2:
                j = 0
                for b in range(2 * q):
                    if (b * b - D) % (4 * q) == 0:
                        roots[o + j] = b
                        j += 1
            else:
                j = 0
                if D % p != 0:
                    if e == 1:
                        r = _sqrt_mod_prime(D % p, p)
                        r1 = r
                        r2 = (p - r) % p
                        for rr in (r1, r2):
                            b = rr if rr % 2 == (D & 1) else rr + q
                            roots[o + j] = b
                            j += 1
                    else:
                        # Hensel lift from the roots of q/p
                        qp = q // p
                        o2 = off[qp]
                        for i in range(cnt[qp]):
                            r = roots[o2 + i] % qp
                            fr = (r * r - D) % q
                            r = (r - fr * _invmod(2 * r, q)) % q
                            b = r if r % 2 == (D & 1) else r + q
                            roots[o + j] = b
                            j += 1
                else:
                    for r in range(q):
                        if (r * r - D) % q == 0:
                            b = r if r % 2 == (D & 1) else r + q
                            roots[o + j] = b
                            j += 1
        else:
            oq = off[q]
            orr = off[rest]
            j = 0
            if p == 2:
                M2 = 2 * q
                inv = _invmod(rest % M2, M2)
                for i1 in range(cnt[rest]):
                    ro = roots[orr + i1] % rest
                    for i2 in range(cnt[q]):
                        r2 = roots[oq + i2]
                        t = ((r2 - ro) % M2) * inv % M2
                        roots[o + j] = ro + rest * t
                        j += 1
            else:
                M1 = 2 * rest
                inv = _invmod(M1 % q, q)
                for i1 in range(cnt[rest]):
                    b1 = roots[orr + i1]
                    for i2 in range(cnt[q]):
                        r = roots[oq + i2] % q
                        t = ((r - b1) % q) * inv % q
                        roots[o + j] = b1 + M1 * t
                        j += 1
        roots[o:o + k] = np.sort(roots[o:o + k])
    return off, roots


@njit(cache=True)
def rectangle_pairs(off, roots, cmax):
    """Flatten to (c, b) with -c < b <= c, sorted by (c, b)."""
    n = off[cmax + 1] - off[1]
    cs = np.empty(n, dtype=np.int64)
    bs = np.empty(n, dtype=np.int64)
    j = 0
    for c in range(1, cmax + 1):
        k = off[c + 1] - off[c]
        if k == 0:
            continue
        tmp = roots[off[c]:off[c + 1]].copy()
        for i in range(k):
            if tmp[i] > c:
                tmp[i] -= 2 * c
        tmp = np.sort(tmp)
        for i in range(k):
            cs[j] = c
            bs[j] = tmp[i]
            j += 1
    return cs, bs
