"""Command-line interface: traces, coefficients, single sums, partial-sum scans, property suites, timings."""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .arb import BigReal, PrecisionError
from .characters import is_fundamental
from .quadforms import RECT_CEILING, DiscFactorization, ResourceLimit, rect_cmax
from .traces import NonConvergence, SeriesConfig, TraceReport, compare, default_Y

SCHEMA_VERSION = 1
PREC_ENV = "SINGMOD_PREC"

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_PRECONDITION, EXIT_RESOURCE = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    prec: int | None = None        # None: choose automatically
    workers: int = 1
    max_cutoff: int = RECT_CEILING  # c' ceiling for the sinh series
    max_rect: int = RECT_CEILING    # c' ceiling for the rectangle sum
    fmt: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.fmt not in ("json", "csv", "text"):
            raise ValueError(f"format must be json, csv or text, not {self.fmt!r}")
        if self.workers < 1 or self.max_cutoff < 1 or self.max_rect < 1:
            raise ValueError("workers and ceilings must be positive")
        if self.prec is not None and self.prec < 64:
            raise ValueError("precision must be at least 64 bits")


def _digits(prec):
    # enough decimal digits to recover the binary value exactly at prec bits
    return int(math.ceil(prec * math.log10(2))) + 2


def _real(x: BigReal | None):
    return None if x is None else x.to_string(_digits(x.prec))


def report_to_dict(rep: TraceReport):
    return {
        "schemaVersion": SCHEMA_VERSION,
        "D": rep.D,
        "d": rep.d,
        "m": rep.m,
        "direct": _real(rep.direct),
        "series": _real(rep.series),
        "rect": _real(rep.rect),
        "nearestInteger": None if rep.nearest_integer is None else str(rep.nearest_integer),
        "margin": None if rep.margin is None else repr(rep.margin),
        "maxDeviation": None if rep.max_deviation is None else repr(rep.max_deviation),
        "precisionBits": rep.precision,
        "cutoffs": {
            "series": rep.series_cutoff,
            "rect": rep.rect_cmax,
            "rectY": None if rep.rect_Y is None else repr(rep.rect_Y),
        },
        "flags": list(rep.flags),
        "timingMs": dict(rep.timing_ms),
    }


def emit_report(rep: TraceReport, fmt="json") -> bytes:
    d = report_to_dict(rep)
    if fmt == "json":
        return (json.dumps(d, indent=2, sort_keys=True) + "\n").encode()
    if fmt == "csv":
        rows = ["key,value"]
        for k in ("D", "d", "m", "direct", "series", "rect", "nearestInteger", "margin", "maxDeviation",
                  "precisionBits"):
            rows.append(f"{k},{'' if d[k] is None else d[k]}")
        for k, v in d["cutoffs"].items():
            rows.append(f"cutoffs.{k},{'' if v is None else v}")
        for k, v in sorted(d["timingMs"].items()):
            rows.append(f"timingMs.{k},{v}")
        return ("\n".join(rows) + "\n").encode()
    if fmt == "text":
        lines = [f"D = {rep.D}, d = {rep.d}, m = {rep.m}, precision {rep.precision} bits"]
        for k in ("direct", "series", "rect"):
            if d[k] is not None:
                lines.append(f"  {k:<8}{d[k]}")
        if rep.nearest_integer is not None:
            lines.append(f"  nearest integer {rep.nearest_integer} (margin {rep.margin:.3g})")
        for fl in rep.flags:
            lines.append(f"  warning: {fl}")
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(data: bytes | str) -> TraceReport:
    """Inverse of emit_report for the JSON format."""
    d = json.loads(data)
    if d.get("schemaVersion") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {d.get('schemaVersion')}")
    prec = d["precisionBits"]
    real = lambda s: None if s is None else BigReal.of(s, prec)
    opt = lambda s, f: None if s is None else f(s)
    return TraceReport(
        D=d["D"], d=d["d"], m=d["m"],
        direct=real(d["direct"]), series=real(d["series"]), rect=real(d["rect"]),
        series_cutoff=d["cutoffs"]["series"], rect_Y=opt(d["cutoffs"]["rectY"], float),
        rect_cmax=d["cutoffs"]["rect"], nearest_integer=opt(d["nearestInteger"], int),
        margin=opt(d["margin"], float), max_deviation=opt(d["maxDeviation"], float),
        precision=prec, timing_ms=dict(d["timingMs"]), flags=list(d["flags"]),
    )


def _json(obj):
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, bytes)


def cmd_trace(args, cfg: RunConfig):
    f = DiscFactorization.of(args.D, args.d)
    methods = ("direct", "series", "rect") if args.method == "all" else (args.method,)
    if "rect" in methods:
        Y = default_Y(f.D, args.m) if args.Y is None else args.Y
        cm = rect_cmax(f.D, Y)
        if cm > cfg.max_rect:
            raise ResourceLimit(f"rectangle sum needs c' up to {cm}, ceiling is {cfg.max_rect}")
    sc = SeriesConfig(max_cutoff=cfg.max_cutoff)
    rep = compare(f, args.m, methods, Y=args.Y, prec=cfg.prec, series_config=sc)
    return EXIT_OK, emit_report(rep, cfg.fmt)


def cmd_coeff(args, cfg: RunConfig):
    from .modforms import c_n_rademacher, j_coeffs
    r = c_n_rademacher(args.n, cfg.prec)
    exact = j_coeffs(args.n)[args.n]
    out = {
        "n": args.n,
        "value": str(r.rounded),
        "series": _real(r.value),
        "errorBound": repr(float(r.error_bound)),
        "heuristicError": repr(r.heuristic_error),
        "certified": r.certified,
        "cutoff": r.cutoff,
        "matchesExpansion": r.rounded == exact,
    }
    if cfg.fmt == "text":
        return EXIT_OK, f"c({args.n}) = {r.rounded}\n".encode()
    return EXIT_OK, _json(out)


def cmd_jcoeffs(args, cfg: RunConfig):
    from .modforms import j_coeffs
    q = j_coeffs(args.N)
    rows = [(n, q[n]) for n in range(-1, args.N + 1)]
    if cfg.fmt == "csv":
        return EXIT_OK, ("n,coeff\n" + "".join(f"{n},{c}\n" for n, c in rows)).encode()
    if cfg.fmt == "text":
        return EXIT_OK, "".join(f"{n:>6} {c}\n" for n, c in rows).encode()
    return EXIT_OK, _json({"lead": -1, "order": args.N, "coeffs": [str(c) for _, c in rows]})


def cmd_sum(args, cfg: RunConfig):
    from .expsums import PlusSumArgs, WeightSpec, kloosterman, kloosterman_plus, weyl_sum
    prec = cfg.prec or 96
    if args.kind == "kloosterman":
        v = kloosterman(args.n, args.c, prec)
        out = {"kind": "kloosterman", "n": args.n, "c": args.c, "value": _real(v)}
    elif args.kind == "plus":
        w = WeightSpec.of(Fraction(args.k))
        z = kloosterman_plus(w, PlusSumArgs(args.m, args.n, args.c), prec)
        out = {"kind": "plus", "k": str(w.k), "m": args.m, "n": args.n, "c": args.c,
               "real": _real(z.re), "imag": _real(z.im)}
    else:
        f = DiscFactorization.of(args.D, args.d)
        v = weyl_sum(args.m, f, args.c, args.method, prec)
        out = {"kind": "weyl", "m": args.m, "D": f.D, "d": f.d, "c": args.c, "method": args.method,
               "value": _real(v)}
    out["precisionBits"] = prec
    return EXIT_OK, _json(out)


def cmd_scan(args, cfg: RunConfig):
    from .expsums import SSeries, TSeries, WeightSpec, partial_sums
    if args.series == "t":
        series = TSeries(args.m, DiscFactorization.of(args.D, args.d))
    else:
        series = SSeries(WeightSpec.of(Fraction(args.k)), args.m, args.n)
    ps = partial_sums(series, args.x, stride=args.stride)
    if cfg.fmt == "json":
        return EXIT_OK, _json({"cutoffs": ps.cutoffs.tolist(), "values": [repr(float(v)) for v in ps.values]})
    lines = ["cutoff,value"] + [f"{c},{v!r}" for c, v in ps.rows()]
    return EXIT_OK, ("\n".join(lines) + "\n").encode()


def cmd_bench(args, cfg: RunConfig):
    from .arb import bessel_K_imag
    from .expsums import HALF, SSeries, partial_sums, weyl_totals
    from .traces import trace_direct
    jobs = {
        "plus_partial_x1e4": lambda: partial_sums(SSeries(HALF, 1, 5), 10_000),
        "weyl_totals_D-303_c1e5": lambda: weyl_totals(-303, 1, 1, 100_000),
        "trace_direct_D-303": lambda: trace_direct(DiscFactorization.of(-303), 1),
        "bessel_K_v20_x10": lambda: bessel_K_imag(20, 10, 64),
    }
    out = {}
    for name, fn in jobs.items():
        fn()  # warm up (numba compilation, caches)
        best = math.inf
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out[name] = round(1000 * best, 3)
    return EXIT_OK, _json({"bestMs": out})


# -- property suites ---------------------------------------------------------


def _trace_case(D, m, prec):
    rep = compare(DiscFactorization.of(D), m, prec=prec)
    ok = not rep.flags and (D in (-3, -4) or rep.margin < 1e-4)
    return D, m, ok, rep.max_deviation, rep.margin


def _verify_traces(args, cfg):
    rng = random.Random(cfg.seed)
    Ds = [D for D in range(-3, -501, -1) if is_fundamental(D)]
    pick = sorted(rng.sample(Ds, min(args.count, len(Ds))), reverse=True)
    cases = [(D, m) for D in pick for m in (1, 2, 3)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            res = list(ex.map(_trace_case, *zip(*cases), [cfg.prec] * len(cases)))
    else:
        res = [_trace_case(D, m, cfg.prec) for D, m in cases]
    lines = [f"trace D={D} m={m}: {'ok' if ok else 'FAIL'} dev={dev:.2e} margin={mg:.2e}"
             for D, m, ok, dev, mg in res]
    return all(r[2] for r in res), lines


def _verify_identities(args, cfg):
    from .expsums import HALF, MINUS_HALF, PlusSumArgs, kloosterman_plus, weil_bound, weyl_sum
    from .traces import IdentityFailure, rect_exp_sum
    rng = random.Random(cfg.seed)
    lines, ok = [], True
    prec = cfg.prec or 96
    tol = 2.0 ** (-prec + 24)
    # Kohnen identity
    worst = 0.0
    for D in (-3, -4, -7, -15, -20, -23, -24, -39, -84):
        for d in [d for d in range(D, 2) if d and D % d == 0 and is_fundamental(d) and (D // d) % 4 in (0, 1)]:
            f = DiscFactorization.of(D, d)
            for m in (1, 2, 3, 4, 6):
                for c in range(4, 4 * 13, 4):
                    a = weyl_sum(m, f, c, "direct", prec)
                    b = weyl_sum(m, f, c, "kohnen", prec)
                    worst = max(worst, float(abs(a - b)))
    good = worst <= tol
    ok &= good
    lines.append(f"Kohnen identity: {'ok' if good else 'FAIL'} max |diff| = {worst:.3g}")
    # rectangle identity
    try:
        for D, m, Y in ((-23, 1, 0.05), (-303, 1, 0.02), (-20, 2, 0.03), (-84, 3, 0.01)):
            f = DiscFactorization.of(D)
            for xi in (1, -1):
                rect_exp_sum(f, m, Y, xi, prec)
        lines.append("rectangle identity: ok")
    except IdentityFailure as e:
        ok = False
        lines.append(f"rectangle identity: FAIL {e}")
    # symmetry and Weil bound on random admissible triples
    bad_sym = bad_weil = 0
    for _ in range(args.count):
        c = 4 * rng.randint(1, 30)
        m = rng.choice([t for t in range(-40, 41) if t and t % 4 in (0, 1)])
        n = rng.choice([t for t in range(-40, 41) if t and t % 4 in (0, 1)])
        s = kloosterman_plus(HALF, PlusSumArgs(m, n, c), prec).value
        s2 = kloosterman_plus(HALF, PlusSumArgs(n, m, c), prec).value
        s3 = kloosterman_plus(MINUS_HALF, PlusSumArgs(-m, -n, c), prec).value
        if abs(s - s2) > tol * max(1, abs(s)) or abs(s - s3) > tol * max(1, abs(s)):
            bad_sym += 1
        if abs(s) > weil_bound(m, n, c) * (1 + 1e-12):
            bad_weil += 1
    ok &= bad_sym == 0 and bad_weil == 0
    lines.append(f"plus-space symmetry: {'ok' if not bad_sym else 'FAIL'} ({bad_sym}/{args.count} violations)")
    lines.append(f"Weil bound: {'ok' if not bad_weil else 'FAIL'} ({bad_weil}/{args.count} violations)")
    return ok, lines


def _verify_appendix(args, cfg):
    from .spectral import AsymptoticInputs, kbessel_asymptotics, scaled_K
    lines, ok = [], True
    v, z = 10.0, 0.5
    err = abs(scaled_K(v, z) - kbessel_asymptotics(AsymptoticInputs(v, z), "oscillatory"))
    C = err * v ** 2.5
    good = C < 10
    ok &= good
    lines.append(f"oscillatory (v=10, z=0.5): {'ok' if good else 'FAIL'} error {err:.3g}, C = {C:.3g}")
    worst = 0.0
    for z in (0.3, 0.5, 0.6):
        for v in (20.0, 40.0, 80.0):
            inp = AsymptoticInputs(v, z)
            env = kbessel_asymptotics(inp, "transition")
            worst = max(worst, (abs(scaled_K(v, z)) - env) * v ** (4 / 3))
    good = worst < 10
    ok &= good
    lines.append(f"envelope bound: {'ok' if good else 'FAIL'} max (|K| - envelope) v^(4/3) = {worst:.3g}")
    return ok, lines


def _verify_bounds(args, cfg):
    from .spectral import TestFnSpec, verify_phicheck_bounds
    ref = verify_phicheck_bounds(TestFnSpec(40, 10, 3))
    dbl = verify_phicheck_bounds(TestFnSpec(40, 10, 6, strict=False))
    lines = [f"branch {b}: max ratio {'-' if r is None else f'{r:.4g}'}" for b, r in ref.max_ratio.items()]
    good = ref.worst <= 50
    q = dbl.max_ratio["large"] / ref.max_ratio["large"]
    stable = 0.25 <= q <= 4
    lines.append(f"single constant <= 50: {'ok' if good else 'FAIL'} ({ref.worst:.4g})")
    lines.append(f"large-r ratio under T -> 2T: {'ok' if stable else 'FAIL'} (factor {q:.3g})")
    return good and stable, lines


SUITES = {"traces": _verify_traces, "identities": _verify_identities, "appendix": _verify_appendix,
          "bounds": _verify_bounds}


def cmd_verify(args, cfg: RunConfig):
    ok, lines = SUITES[args.suite](args, cfg)
    lines.append(f"{args.suite}: {'PASS' if ok else 'FAIL'}")
    return (EXIT_OK if ok else EXIT_VERIFY), ("\n".join(lines) + "\n").encode()


# ---------------------------------------------------------------------------


def _common(p, suppress=False):
    """Global options; repeated on every subcommand so they may follow it."""
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--prec", type=int, default=dflt(None),
                   help=f"working precision in bits (default: auto, or ${PREC_ENV})")
    p.add_argument("--workers", type=int, default=dflt(1))
    p.add_argument("--max-cutoff", type=int, default=dflt(RECT_CEILING))
    p.add_argument("--max-rect", type=int, default=dflt(RECT_CEILING))
    p.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default=dflt("json"))
    p.add_argument("--seed", type=int, default=dflt(0))


def build_parser():
    p = argparse.ArgumentParser(prog="singmod", description=__doc__,
                                epilog="Put `--` before negative positional arguments, e.g. `trace -- -303 1 1`.")
    _common(p)
    sub = p.add_subparsers(dest="cmd", required=True)

    t = sub.add_parser("trace", help="trace of j_m over CM points of discriminant D, twisted by chi_d")
    t.add_argument("D", type=int)
    t.add_argument("d", type=int)
    t.add_argument("m", type=int)
    t.add_argument("--method", choices=("all", "direct", "series", "rect"), default="all")
    t.add_argument("--Y", type=float, default=None)
    t.set_defaults(fn=cmd_trace)

    c = sub.add_parser("coeff", help="c(n) of j by the Rademacher series")
    c.add_argument("n", type=int)
    c.set_defaults(fn=cmd_coeff)

    j = sub.add_parser("jcoeffs", help="c(-1..N) of j from the product formula")
    j.add_argument("N", type=int)
    j.set_defaults(fn=cmd_jcoeffs)

    s = sub.add_parser("sum", help="a single exponential sum")
    ss = s.add_subparsers(dest="kind", required=True)
    k = ss.add_parser("kloosterman")
    k.add_argument("n", type=int)
    k.add_argument("c", type=int)
    pl = ss.add_parser("plus")
    pl.add_argument("k", choices=("1/2", "-1/2"))
    pl.add_argument("m", type=int)
    pl.add_argument("n", type=int)
    pl.add_argument("c", type=int)
    w = ss.add_parser("weyl")
    w.add_argument("m", type=int)
    w.add_argument("D", type=int)
    w.add_argument("d", type=int)
    w.add_argument("c", type=int)
    w.add_argument("--method", choices=("direct", "kohnen"), default="direct")
    s.set_defaults(fn=cmd_sum)

    sc = sub.add_parser("scan", help="partial-sum tables")
    scs = sc.add_subparsers(dest="what", required=True)
    sums = scs.add_parser("sums")
    kinds = sums.add_subparsers(dest="series", required=True)
    st = kinds.add_parser("t", help="sum of T_m(d,d';c)/sqrt(c)")
    st.add_argument("m", type=int)
    st.add_argument("D", type=int)
    st.add_argument("d", type=int)
    sp = kinds.add_parser("s", help="sum of S_k^+(m,n;c)/c")
    sp.add_argument("k", choices=("1/2", "-1/2"))
    sp.add_argument("m", type=int)
    sp.add_argument("n", type=int)
    for q in (st, sp):
        q.add_argument("--x", type=int, default=10_000)
        q.add_argument("--stride", type=int, default=4)
    sc.set_defaults(fn=cmd_scan)

    v = sub.add_parser("verify", help="run a property suite; exit 1 on failure")
    v.add_argument("suite", choices=tuple(SUITES))
    v.add_argument("--count", type=int, default=None, help="cases to sample (traces: D values, identities: triples)")
    v.set_defaults(fn=cmd_verify)

    b = sub.add_parser("bench", help="time the hot kernels")
    b.add_argument("--repeat", type=int, default=3)
    b.set_defaults(fn=cmd_bench)
    for leaf in (t, c, j, k, pl, w, st, sp, v, b):
        _common(leaf, suppress=True)
    return p


def dispatch(argv, out=None, err=None):
    out = out if out is not None else sys.stdout.buffer
    err = err if err is not None else sys.stderr
    p = build_parser()
    # `--` only shields negative numbers; argparse already reads -303 as a positional
    # since no option looks like a number, so drop the sentinel and keep later flags live
    argv = [a for a in argv if a != "--"]
    try:
        args = p.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if getattr(args, "count", 1) is None:
        args.count = 10 if args.suite == "traces" else 200
    prec = args.prec
    if prec is None and os.environ.get(PREC_ENV):
        prec = int(os.environ[PREC_ENV])
    try:
        cfg = RunConfig(prec, args.workers, args.max_cutoff, args.max_rect, args.fmt, args.seed)
    except ValueError as e:
        print(f"error: {e}", file=err)
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            code, data = args.fn(args, cfg)
    except (ResourceLimit, NonConvergence) as e:
        print(f"resource limit: {e}", file=err)
        return EXIT_RESOURCE
    except (ValueError, ArithmeticError, PrecisionError) as e:
        print(f"precondition violated: {e}", file=err)
        return EXIT_PRECONDITION
    out.write(data)
    out.flush()
    return code


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
