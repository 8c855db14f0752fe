"""The test function phi_{a,x,T}, its K-Bessel transform, bounds for the transform, and
uniform asymptotics of K_{iv}(vz) for 0 < z < 1 checked against direct quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np
from mpmath import mp, mpf

from .arb import (LOG2E, BigReal, _check_prec, _gl_nodes, airy_neg, bessel_JY_third, bessel_K_imag_raw,
                  bessel_M_third, const_pi, gl_panels)

# admissible exponent towards Ramanujan; only used for reference slopes
THETA = 7 / 64
# default constant c in the transition domain z <= 1 - c v^{-2/3}
TRANSITION_C = 3.0


@dataclass(frozen=True)
class TestFnSpec:
    a: float
    x: float
    T: float
    strict: bool = True   # enforce 1 <= T <= x/3; off only for the T -> 2T stability run
    scale: float = 1.0    # overall factor on phi (0 gives the zero function)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.a <= 0 or self.x < 3:
            raise ValueError("need a > 0 and x >= 3")
        if self.T < 1 or self.T >= self.x:
            raise ValueError("need 1 <= T < x")
        if self.strict and self.T > self.x / 3:
            raise ValueError(f"T = {self.T} exceeds x/3 = {self.x / 3:.4g}")

    @property
    def knots(self):
        """(u0, u1, u2, u3): support [u0, u3], plateau [u1, u2]."""
        a, x, T = self.a, self.x, self.T
        return a / (2 * x + 2 * T), a / (2 * x), a / x, a / (x - T)


def _smoothstep(s):
    return s * s * s * (10 - 15 * s + 6 * s * s)


def _smoothstep_d(s):
    return 30 * s * s * (1 - s) ** 2


def phi(spec: TestFnSpec, t):
    """C^2 bump: quintic smoothstep up on [u0, u1], 1 on [u1, u2], down on [u2, u3], 0 elsewhere."""
    u0, u1, u2, u3 = spec.knots
    if t <= u0 or t >= u3:
        return 0 * t
    if t < u1:
        return spec.scale * _smoothstep((t - u0) / (u1 - u0))
    if t <= u2:
        return spec.scale + 0 * t
    return spec.scale * (1 - _smoothstep((t - u2) / (u3 - u2)))


def phi_prime(spec: TestFnSpec, t):
    u0, u1, u2, u3 = spec.knots
    if t <= u0 or t >= u3 or u1 <= t <= u2:
        return 0 * t
    if t < u1:
        return spec.scale * _smoothstep_d((t - u0) / (u1 - u0)) / (u1 - u0)
    return -spec.scale * _smoothstep_d((t - u2) / (u3 - u2)) / (u3 - u2)


def _Phi_grid(spec, ts, wp, n):
    """Phi(t) = int e^{-u cosh t} phi(u) du/u for each t, Gauss-Legendre on the three smooth pieces."""
    u0, u1, u2, u3 = (mpf(k) for k in spec.knots)
    xs, ws = _gl_nodes(n, wp)
    pieces = []
    for lo, hi in ((u0, u1), (u1, u2), (u2, u3)):
        h = (hi - lo) / 2
        c = (hi + lo) / 2
        us = [c + h * xx for xx in xs]
        pieces.append([(u, w * h * phi(spec, u) / u) for u, w in zip(us, ws)])
    out = []
    for t in ts:
        ch = mpmath.cosh(t)
        out.append(mpmath.fsum(wt * mpmath.exp(-u * ch) for piece in pieces for u, wt in piece))
    return out


def _transform_plan(spec, rmax, prec):
    """Step, truncation point and working precision for the trapezoid cosine transform."""
    u0 = spec.knots[0]
    extra = int(math.pi * rmax * LOG2E) + 16
    wp = prec + extra
    # Phi(t) <= e^{-u0 cosh t} log(u3/u0): stop once that is below 2^-wp
    tmax = math.acosh(max(1.0, (wp / LOG2E + 10) / u0)) + 0.5
    # integrand analytic for |Im t| < pi/2 with growth e^{2 r |Im t|}; keep the aliasing error below 2^-wp
    d = 1.4
    h = 2 * math.pi * d / (wp / LOG2E + 2 * rmax * d + math.pi * rmax + 10)
    return h, tmax, wp


def phi_check_many(spec: TestFnSpec, rs, prec=64, nodes=None, refine=1):
    """phi-check(r) = 2 cosh(pi r) int_0^inf K_{2ir}(u) phi(u) du/u for each r.

    With K_{2ir}(u) = int_0^inf e^{-u cosh t} cos(2rt) dt the u-integral is done
    first: phi-check(r) = 2 cosh(pi r) int_0^inf cos(2rt) Phi(t) dt.  Phi is even,
    analytic in |Im t| < pi/2 and doubly exponentially small for large t, so the
    trapezoid rule converges geometrically; refine > 1 divides the step.
    """
    prec = _check_prec(prec)
    rs = [float(r) for r in rs]
    if any(r < 0 for r in rs):
        raise ValueError("r must be >= 0")
    h, tmax, wp = _transform_plan(spec, max(rs + [1.0]), prec)
    h /= refine
    n = nodes or max(24, int(0.25 * wp) + 16)
    with mp.workprec(wp):
        N = int(tmax / h) + 1
        ts = [mpf(k) * mpf(h) for k in range(N + 1)]
        Ph = _Phi_grid(spec, ts, wp, n)
        pi = const_pi(wp)
        out = []
        for r in rs:
            rr = mpf(r)
            s = Ph[0] / 2 + mpmath.fsum(mpmath.cos(2 * rr * t) * p for t, p in zip(ts[1:], Ph[1:]))
            val = 2 * mpmath.cosh(pi * rr) * s * mpf(h)
            out.append(BigReal(+val, prec))
        return out


def phi_check(spec: TestFnSpec, r, prec=64):
    return phi_check_many(spec, [r], prec)[0]


def phi_check_by_K(spec: TestFnSpec, r, prec=64, nodes=12):
    """Same transform with K_{2ir}(u) evaluated pointwise: Gauss-Legendre in u over the three pieces."""
    prec = _check_prec(prec)
    u0, u1, u2, u3 = spec.knots
    # split long pieces so each panel sees only a few oscillations of K_{2ir}
    pts = []
    for lo, hi in ((u0, u1), (u1, u2), (u2, u3)):
        k = max(1, int((hi - lo) * (1 + 2 * r) / 4) + 1)
        pts += [lo + (hi - lo) * j / k for j in range(k)]
    pts.append(u3)
    wp = prec + int(math.pi * r * LOG2E) + 16
    with mp.workprec(wp):
        f = lambda u: bessel_K_imag_raw(2 * r, float(u), wp) * phi(spec, u) / u
        total, err = gl_panels(f, [mpf(p) for p in pts], nodes, wp)
        val = 2 * mpmath.cosh(const_pi(wp) * r) * total
        return BigReal(+val, prec)


BRANCHES = ("small", "exp", "mid", "large")


def branch_domains(spec: TestFnSpec):
    """Closed r-intervals of the four bounds (None if empty)."""
    a, x = spec.a, spec.x
    out = {
        "small": (0.0, 1.0),
        "exp": (1.0, a / (8 * x)) if a / (8 * x) >= 1 else None,
        "mid": (max(a / (8 * x), 1.0), a / x) if a / x >= max(a / (8 * x), 1.0) else None,
        "large": (max(a / x, 1.0), math.inf),
    }
    return out


def branch_bound(spec: TestFnSpec, branch, r):
    if branch == "small":
        return r ** -1.5
    if branch == "exp":
        return math.exp(-r / 2)
    if branch == "mid":
        return 1 / r
    if branch == "large":
        return r ** -1.5 * min(1.0, spec.x / (r * spec.T))
    raise ValueError(branch)


def default_r_grid(spec: TestFnSpec, rmax=40.0, per_branch=12):
    grid = set()
    for name, dom in branch_domains(spec).items():
        if dom is None:
            continue
        lo, hi = dom
        lo = max(lo, 0.05)
        hi = min(hi, rmax)
        if hi <= lo:
            continue
        grid.update(float(v) for v in np.geomspace(lo, hi, per_branch))
    return sorted(grid)


@dataclass
class PhiCheckBoundsReport:
    spec: TestFnSpec
    rs: list
    values: list
    max_ratio: dict     # branch -> max |phi-check| / bound over the grid points in its domain (None if empty)
    argmax: dict

    @property
    def worst(self):
        vals = [v for v in self.max_ratio.values() if v is not None]
        return max(vals) if vals else 0.0


def verify_phicheck_bounds(spec: TestFnSpec, rs=None, prec=64):
    rs = default_r_grid(spec) if rs is None else sorted(float(r) for r in rs)
    vals = [abs(float(v)) for v in phi_check_many(spec, rs, prec)]
    doms = branch_domains(spec)
    ratios, arg = {}, {}
    for b in BRANCHES:
        dom = doms[b]
        best = None
        for r, v in zip(rs, vals):
            if dom is None or not (dom[0] <= r <= dom[1]) or r == 0:
                continue
            q = v / branch_bound(spec, b, r)
            if best is None or q > best:
                best, arg[b] = q, r
        ratios[b] = best
    return PhiCheckBoundsReport(spec, rs, vals, ratios, arg)


# ----------------------------------------------------------------------------
# uniform asymptotics of e^{pi v/2} K_{iv}(vz), 0 < z < 1


@dataclass(frozen=True)
class AsymptoticInputs:
    v: float
    z: float

    def __post_init__(self):
        if self.v < 1:
            raise ValueError("v must be >= 1")
        if not 0 < self.z < 1:
            raise ValueError("z must lie in (0, 1)")

    @cached_property
    def w(self):
        z = self.z
        return math.acosh(1 / z) - math.sqrt(1 - z * z)

    @cached_property
    def zeta(self):
        return (1.5 * self.w) ** (2 / 3)

    @cached_property
    def A(self):
        z, w = self.z, self.w
        q = 1 - z * z
        return (455 / (10368 * w * w) - 7 * (3 * z * z + 2) / (1728 * q ** 1.5 * w)
                - (81 * z ** 4 + 300 * z * z + 4) / (1152 * q ** 3))

    @cached_property
    def B(self):
        z, w = self.z, self.w
        return (3 * z * z + 2) / (24 * (1 - z * z) ** 1.5) - 5 / (72 * w)


def w_of(z):
    """arccosh(1/z) - sqrt(1 - z^2), computed stably near z = 1."""
    z = mpf(z)
    return mpmath.acosh(1 / z) - mpmath.sqrt(1 - z * z)


def scaled_K(v, z, prec=64):
    """e^{pi v/2} K_{iv}(vz) by direct quadrature."""
    with mp.workprec(prec + 16):
        k = bessel_K_imag_raw(v, v * z, prec)
        return float(mpmath.exp(const_pi(prec + 16) * v / 2) * k)


def theta_third(x, prec=64):
    """A continuous branch of the phase with M_{1/3} sin(theta) = (J_{1/3} + J_{-1/3})/sqrt 3.

    With J_{1/3} = M cos(p), Y_{1/3} = M sin(p) one has J_{-1/3} = J cos(pi/3) - Y sin(pi/3),
    hence (J_{1/3} + J_{-1/3})/sqrt 3 = M sin(p + 2 pi/3), and p' = 2/(pi x M^2) by the
    Wronskian.  Returned mod 2 pi.
    """
    j, y = bessel_JY_third(x, prec)
    with mp.workprec(prec + 16):
        return float(mpmath.atan2(y, j) + 2 * const_pi(prec + 16) / 3) % (2 * math.pi)


def theta_third_increment(x0, x1, prec=64, nodes=24):
    """theta(x1) - theta(x0) by integrating 2/(pi x M^2) (no reference constant needed)."""
    with mp.workprec(prec + 16):
        f = lambda t: bessel_M_third(t, prec)[1].value
        pts = list(np.linspace(float(x0), float(x1), max(2, int(abs(x1 - x0)) + 2)))
        val, _ = gl_panels(f, [mpf(p) for p in pts], nodes, prec + 16)
        return float(val)


def _check_domain(inp, flavor, c):
    v, z = inp.v, inp.z
    if flavor == "oscillatory" and z > 0.75:
        raise ValueError(f"oscillatory regime needs z <= 3/4, got {z}")
    if flavor == "transition" and not (3 / 16 <= z <= 1 - c * v ** (-2 / 3)):
        raise ValueError(f"transition regime needs 3/16 <= z <= 1 - {c} v^(-2/3) = {1 - c * v ** (-2 / 3):.4g}")


def kbessel_asymptotics(inp: AsymptoticInputs, flavor, c=TRANSITION_C, prec=64):
    """Right-hand side approximating e^{pi v/2} K_{iv}(vz).

    balogh-main  Airy main term with the A(z), B(z) corrections (error v^{-7/2})
    oscillatory  cos/sin(vw - pi/4) form with its 1/v correction, z <= 3/4 (error v^{-5/2})
    transition   the envelope pi w^{1/2} (1-z^2)^{-1/4} M_{1/3}(vw); see transition_main for the signed value
    """
    _check_domain(inp, flavor, c)
    v, z, w = inp.v, inp.z, inp.w
    q = 1 - z * z
    if flavor == "oscillatory":
        ph = v * w - math.pi / 4
        return (math.sqrt(2 * math.pi) / (math.sqrt(v) * q ** 0.25)
                * (math.cos(ph) + math.sin(ph) * (3 * z * z + 2) / (24 * v * q ** 1.5)))
    if flavor == "transition":
        M, _ = bessel_M_third(v * w, prec)
        return math.pi * math.sqrt(w) / q ** 0.25 * float(M)
    if flavor == "balogh-main":
        y = v ** (2 / 3) * inp.zeta
        ai, aip = airy_neg(y, prec)
        ai, aip = float(ai), float(aip)
        return (math.pi * math.sqrt(2) / v ** (1 / 3) * (inp.zeta / q) ** 0.25
                * (ai * (1 + inp.A / v ** 2) + (2 / 3) ** (1 / 3) * aip * inp.B / (v * (v * w) ** (1 / 3))))
    raise ValueError(f"unknown flavor {flavor!r}")


def transition_main(inp: AsymptoticInputs, c=TRANSITION_C, prec=64):
    """Envelope times sin(theta_{1/3}(vw)), i.e. pi w^{1/2} (1-z^2)^{-1/4} (J_{1/3} + J_{-1/3})(vw) / sqrt 3."""
    env = kbessel_asymptotics(inp, "transition", c, prec)
    return env * math.sin(theta_third(inp.v * inp.w, prec))


def _upper_envelope(vs, errs, period):
    """Running max of errs over windows [v - period/2, v + period/2]."""
    vs = np.asarray(vs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    out = np.empty_like(errs)
    for i, v in enumerate(vs):
        sel = np.abs(vs - v) <= period / 2
        out[i] = errs[sel].max()
    return out


@dataclass
class SlopeFit:
    flavor: str
    z: float
    slope: float
    intercept: float
    vs: np.ndarray
    errors: np.ndarray
    envelope: np.ndarray


def error_table(flavor, vs, z, prec=64, c=TRANSITION_C, direct=None):
    """Rows (v, direct, approx, error) for e^{pi v/2} K_{iv}(vz) against the chosen approximation."""
    rows = []
    for i, v in enumerate(vs):
        inp = AsymptoticInputs(float(v), z)
        dk = direct[i] if direct is not None else scaled_K(v, z, prec)
        if flavor == "transition":
            ap = transition_main(inp, c, prec)
        else:
            ap = kbessel_asymptotics(inp, flavor, c, prec)
        rows.append((float(v), dk, ap, abs(dk - ap)))
    return rows


def fit_error_slope(flavor, v_range, z, n=None, prec=64, c=TRANSITION_C, direct=None, vs=None):
    """Least-squares slope of log(error envelope) against log v.

    The errors oscillate with period 2 pi / w(z) in v, so the fit is to their
    running maximum over one period, sampled on the grid.
    """
    lo, hi = map(float, v_range)
    if hi < 10 * lo:
        raise ValueError("v-range must span at least one decade")
    w = AsymptoticInputs(max(lo, 1.0), z).w
    period = 2 * math.pi / w
    if vs is None:
        n = n or int((hi - lo) / (period / 8)) + 1
        vs = np.linspace(lo, hi, n)
    rows = error_table(flavor, vs, z, prec, c, direct)
    errs = np.array([r[3] for r in rows])
    if np.any(errs <= 0):
        raise ValueError("degenerate fit: zero error")
    env = _upper_envelope(vs, errs, period)
    # sample the envelope evenly in log v so large v does not dominate
    lv = np.log(vs)
    picks = np.unique([int(np.argmin(np.abs(lv - t))) for t in np.linspace(lv[0], lv[-1], 24)])
    slope, icpt = np.polyfit(lv[picks], np.log(env[picks]), 1)
    return SlopeFit(flavor, z, float(slope), float(icpt), np.asarray(vs), errs, env)


def self_consistency(vs, z, prec=64):
    """log10 of |K(prec) - K(2 prec)| / |K(2 prec)| for e^{pi v/2} K_{iv}(vz) at each v."""
    out = []
    for v in vs:
        with mp.workprec(2 * prec + 16):
            a = bessel_K_imag_raw(v, v * z, prec)
            b = bessel_K_imag_raw(v, v * z, 2 * prec)
            out.append(float(mpmath.log10(abs(a - b) / abs(b) + mpf(2) ** (-2 * prec))))
    return np.array(out)


def asymptotics_table(flavor, vs, z, prec=64, c=TRANSITION_C):
    """CSV text with columns v, z, direct, approx, error."""
    lines = ["v,z,direct,approx,error"]
    for v, dk, ap, err in error_table(flavor, vs, z, prec, c):
        lines.append(f"{v:.6g},{z:.6g},{dk:.17g},{ap:.17g},{err:.6e}")
    return "\n".join(lines) + "\n"
