"""Command-line front end: ``seeleyext <command> [<action>] [options]``.

Exit status is 0 when every requested check passes, 2 when a check fails
and 1 on usage or configuration errors.  Reports are JSON (numbers as
decimal strings) with a CSV mirror; only the ``timestamp`` field differs
between identical runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from contextlib import contextmanager
from datetime import datetime, timezone

import mpmath as mp
import numpy as np

from . import __version__
from .coeffs import (
    CoefficientFamily,
    dyadic_finite_coefficients,
    fixed_point_coefficients,
    moment_report,
    seeley_one_sided_coefficients,
    vandermonde_coefficients,
)
from .exceptions import ExtensionError, MomentValidationError
from .functions import GridFunction, builtin, write_grid_csv
from .operator import ExtensionPlan, adjoint_apply, extend_callable
from .precision import PrecisionContext

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
LOCK_NAME = ".seeleyext.lock"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------


def _num(x, digits=30):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, mp.mpf):
        return mp.nstr(x, digits)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _stringify(obj):
    """Recursively turn numbers into decimal strings (bools and None kept)."""
    if isinstance(obj, dict):
        return {str(k): _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(v) for v in obj]
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, float, np.integer, np.floating, mp.mpf)):
        return _num(obj)
    return str(obj)


@contextmanager
def output_lock(out):
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, LOCK_NAME)
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise UsageError(f"output directory {out} is locked by another run ({path})") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        os.remove(path)


def _config(args):
    skip = {"func", "handler"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def write_report(args, name, result, passed, csv_rows=None):
    report = {
        "tool": "seeleyext",
        "version": __version__,
        "command": args.command + (f" {args.action}" if getattr(args, "action", None) else ""),
        "config": _stringify(_config(args)),
        "precision": {"bits": str(args.bits), "report-float": "binary64 repr", "mp-digits": "30"},
        "pass": bool(passed),
        "result": _stringify(result),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    path = os.path.join(args.out, name + ".json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if csv_rows is not None:
        with open(os.path.join(args.out, name + ".csv"), "w", newline="") as fh:
            cols = []
            for row in csv_rows:
                cols.extend(c for c in row if c not in cols)
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for row in csv_rows:
                w.writerow({k: _num(v) if not isinstance(v, str) else v for k, v in row.items()})
    print(f"{'PASS' if passed else 'FAIL'} {report['command']} -> {path}")
    return EXIT_OK if passed else EXIT_FAIL


def _floats(text, name):
    if text is None:
        return None
    text = text.strip()
    if not text:
        return []
    try:
        return [math.inf if t.strip() in ("inf", "oo") else float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"--{name}: expected a comma-separated list of numbers, got {text!r}") from None


def _ints(text, name):
    vals = _floats(text, name)
    if vals is None:
        return None
    if any(v != int(v) for v in vals):
        raise UsageError(f"--{name}: expected integers")
    return [int(v) for v in vals]


def _range(text):
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"--range must look like lo:hi, got {text!r}") from None
    if not lo < hi:
        raise UsageError("--range needs lo < hi")
    return lo, hi


def _function(spec):
    try:
        return builtin(spec)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _ctx(args):
    return PrecisionContext(bits=args.bits, jmax=args.jmax, tail_tol=args.tol)


def _family(args, kmax_default=6):
    """Family from ``--coeffs`` or a freshly synthesized two-sided family."""
    if getattr(args, "coeffs", None):
        if not os.path.exists(args.coeffs):
            raise UsageError(f"coefficient file {args.coeffs} does not exist")
        return CoefficientFamily.from_json(args.coeffs)
    kmax = getattr(args, "kmax", None) or kmax_default
    return fixed_point_coefficients(_ctx(args), kmax)


# --------------------------------------------------------------------------
# coeffs
# --------------------------------------------------------------------------


def _moment_rows(report):
    return [
        {"k": r.k, "moment": r.moment, "residual": r.residual,
         "weighted-tail": r.weighted_tail, "unweighted-tail": r.unweighted_tail, "error": r.error or ""}
        for r in report.rows
    ]


def _moment_result(family, report):
    return {
        "family-id": family.id,
        "kind": family.kind,
        "entries": len(family),
        "max-residual": report.max_residual,
        "tol": report.tol,
        "max-delta": report.max_delta,
        "rows": _moment_rows(report),
    }


def cmd_coeffs_gen(args):
    ctx = _ctx(args)
    kind = args.kind
    try:
        if kind == "two-sided":
            family = fixed_point_coefficients(ctx, args.kmax)
            krange = (-args.kmax, args.kmax)
        elif kind == "seeley":
            family = seeley_one_sided_coefficients(ctx, args.kmax, args.beta)
            krange = (0, args.kmax)
        elif kind == "vandermonde":
            nodes = _floats(args.nodes, "nodes")
            if not nodes:
                raise UsageError("--kind vandermonde needs --nodes")
            family = vandermonde_coefficients(nodes, args.m1, args.m2, ctx)
            krange = (-args.m1, args.m2)
        else:
            family = dyadic_finite_coefficients(args.kmax, args.r, ctx)
            krange = (-args.kmax, args.kmax)
    except MomentValidationError as exc:
        family, report = exc.family, exc.report
        family.to_json(os.path.join(args.out, "coeffs.json"))
        return write_report(args, "moments", _moment_result(family, report), False, _moment_rows(report))
    report = moment_report(family, krange, family.delta, ctx)
    family.to_json(os.path.join(args.out, "coeffs.json"))
    return write_report(args, "moments", _moment_result(family, report), report.passed, _moment_rows(report))


def cmd_coeffs_check(args):
    if not args.coeffs:
        raise UsageError("coeffs check needs --coeffs FILE")
    family = _family(args)
    lo, hi = family.moment_range
    if args.kmax is not None:
        lo, hi = (-args.kmax if lo < 0 else 0), args.kmax
    ctx = _ctx(args)
    report = moment_report(family, (lo, hi), family.delta, ctx)
    return write_report(args, "moments", _moment_result(family, report), report.passed, _moment_rows(report))


# --------------------------------------------------------------------------
# extend
# --------------------------------------------------------------------------


def cmd_extend(args):
    f = _function(args.f)
    family = _family(args)
    lo, hi = _range(args.range)
    if not args.h > 0:
        raise UsageError("--h must be positive")
    n = int(round((hi - lo) / args.h)) + 1
    x = lo + args.h * np.arange(n)
    plan = ExtensionPlan(family, strict=False)
    values, tail = extend_callable(plan, f, x, return_tail=True)
    grid = GridFunction(np.asarray(values, float), (args.h,), (lo,), half=False)
    write_grid_csv(grid, os.path.join(args.out, "extend.csv"))
    neg = x < 0
    result = {
        "family-id": family.id,
        "function": f.name,
        "nodes": n,
        "negative-nodes": int(neg.sum()),
        "max-tail-bound": float(np.max(tail)) if tail.size else 0.0,
        "tail-target": plan.tail_target,
    }
    passed = result["max-tail-bound"] <= plan.tail_target
    if args.reference:
        ref = _function(args.reference)
        err = float(np.max(np.abs(values[neg] - ref(x[neg])))) if neg.any() else 0.0
        result["reference"] = ref.name
        result["max-reference-error"] = err
        passed = passed and err <= args.reference_tol
    return write_report(args, "extend", result, passed)


# --------------------------------------------------------------------------
# probe
# --------------------------------------------------------------------------


def _probe_rows(reports):
    rows = []
    for rep in reports:
        for r in rep.rows:
            rows.append({"spec": rep.spec.label, "function-id": r.fid, "norm-in": r.norm_in,
                         "norm-out": r.norm_out, "ratio": r.ratio, "bound": r.bound,
                         "pass": "" if r.passed is None else str(r.passed)})
    return rows


def _norm_probe(args, specs):
    from .normlab import operator_norm_probe, probe_family

    family = _family(args)
    plan = ExtensionPlan(family, strict=False)
    funcs = probe_family(args.seed)
    if args.limit is not None:
        funcs = funcs[: args.limit]
    reports = [operator_norm_probe(plan, spec, funcs) for spec in specs]
    result = {"family-id": family.id, "reports": [r.to_dict() for r in reports]}
    passed = all(r.passed for r in reports)
    return write_report(args, f"probe-{args.action}", result, passed, _probe_rows(reports))


def cmd_probe(args):
    from .normlab import (
        NormSpec,
        adjoint_duality,
        adjoint_flatness,
        boundary_smoothness_report,
        dilation_growth_probe,
    )

    action = args.action
    ps = _floats(getattr(args, "p", None), "p")
    if action in ("sobolev", "lp"):
        ks = _ints(args.k, "k") if action == "sobolev" else [0]
        ps = [1.0, 2.0, math.inf] if ps is None else ps
        ks = [0, 1, 2, 3] if ks is None else ks
        specs = []
        for k in ks:
            for p in ps:
                if k < 0:
                    specs.append(NormSpec("neg-sobolev-upper", k, p))
                else:
                    specs.append(NormSpec("lp" if action == "lp" else "sobolev", k, p))
        return _norm_probe(args, specs)
    if action == "holder":
        ss = _floats(args.s, "s")
        ss = [0.5] if ss is None else ss
        return _norm_probe(args, [NormSpec("holder", s, math.inf) for s in ss])
    if action == "besov":
        ss = _floats(args.s, "s")
        ss = [0.5, -0.5] if ss is None else ss
        ps = [2.0] if ps is None else ps
        q = 2.0 if args.q is None else (math.inf if args.q in ("inf", "oo") else float(args.q))
        return _norm_probe(args, [NormSpec("besov", s, p, q) for s in ss for p in ps])
    if action == "dilation":
        ks = _ints(args.k, "k")
        ks = [0] if ks is None else ks
        ps = [1.0, 2.0, math.inf] if ps is None else ps
        f = _function(args.f or "gaussian")
        reps = []
        for k in ks:
            for p in ps:
                spec = NormSpec("lp" if k == 0 else "sobolev", k, p)
                reps.append(dilation_growth_probe(spec, f))
        rows = [{"spec": r.spec.label, "r": rr, "ratio": q} for r in reps for rr, q in zip(r.r, r.ratios)]
        passed = True
        results = []
        for r in reps:
            d = r.to_dict()
            if r.spec.order == 0:
                target = 0.0 if math.isinf(r.spec.p) else -1.0 / r.spec.p
                ok = abs(r.slope - target) <= args.slope_tol
                d["target-slope"] = target
                d["pass"] = ok
                passed = passed and ok
            results.append(d)
        return write_report(args, "probe-dilation", {"function": f.name, "reports": results}, passed, rows)
    if action == "boundary":
        family = _family(args)
        f = _function(args.f or "gaussian")
        hs = _floats(args.hs, "hs") or [1e-2, 1e-3]
        rep = boundary_smoothness_report(family, f, args.orders, hs, stencil_points=args.stencil_points)
        rows = [{"order": r.order, "h": h, "mismatch": m} for r in rep.rows for h, m in zip(rep.hs, r.mismatch)]
        return write_report(args, "probe-boundary", rep.to_dict(), rep.passed, rows)
    if action == "adjoint":
        family = _family(args)
        plan = ExtensionPlan(family, strict=False)
        f = _function(args.f or "gaussian")
        g = _function(args.g or "gaussian")
        lhs, rhs = adjoint_duality(plan, f, g)
        dual_ok = abs(lhs - rhs) <= 1e-8
        flat = adjoint_flatness(plan, g, tuple(range(args.orders + 1)))
        flat_ok = all(r.ratio <= 1e-3 for r in flat)
        result = {
            "duality": {"lhs": lhs, "rhs": rhs, "difference": abs(lhs - rhs), "pass": dual_ok},
            "flatness": [dict(r.to_dict(), threshold=1e-3, **{"pass": r.ratio <= 1e-3}) for r in flat],
        }
        rows = [{"order": r.order, "ratio": r.ratio} for r in flat]
        # direct evaluation keeps the adjoint usable without the probe stack
        result["adjoint-at-0.5"] = float(adjoint_apply(plan, g, np.array([0.5]))[0])
        return write_report(args, "probe-adjoint", result, dual_ok and flat_ok, rows)
    raise UsageError(f"unknown probe {action!r}")


# --------------------------------------------------------------------------
# domain
# --------------------------------------------------------------------------


def _domain_function(spec):
    from .domain import MATCH_FUNCTIONS

    if spec.removeprefix("builtin:") in MATCH_FUNCTIONS:
        return MATCH_FUNCTIONS[spec.removeprefix("builtin:")]
    g = _function(spec)

    def f(x, y):
        return np.asarray(g(np.asarray(x, float)), float) + 0 * np.asarray(y, float)

    return f


def _domain(args):
    from .domain import SHAPES, PlanarDomain

    if args.domain:
        if not os.path.exists(args.domain):
            raise UsageError(f"domain file {args.domain} does not exist")
        with open(args.domain) as fh:
            d = json.load(fh)
        if args.t_max is not None:
            d["t_max"] = args.t_max
        return PlanarDomain.from_dict(d)
    if args.shape not in SHAPES:
        raise UsageError(f"--shape must be one of {sorted(SHAPES)}")
    return SHAPES[args.shape](t_max=0.3 if args.t_max is None else args.t_max)


def cmd_domain(args):
    from .domain import (
        DomainExtensionHandle,
        continuity_check,
        control_case,
        dependence_suite,
        field_grid,
        interior_check,
        normal_match,
        write_field_csv,
    )

    dom = _domain(args)
    family = _family(args)
    handle = DomainExtensionHandle(dom, family)
    f = _domain_function(args.f)
    if args.action == "extend":
        xs, ys, vals, mask = field_grid(handle, f, args.h)
        write_field_csv(os.path.join(args.out, "field.csv"), xs, ys, vals, mask)
        interior = interior_check(handle, f, seed=args.seed)
        cont = continuity_check(handle, f)
        far = float(np.abs(vals[mask == 0]).max()) if np.any(mask == 0) else 0.0
        thetas = np.linspace(0, 2 * np.pi, 8, endpoint=False) + 0.1
        match = normal_match(handle, f, thetas)
        match_ok = all(o >= 0.9 for o in match["fitted-order"])
        result = {
            "domain": dom.to_dict(),
            "reach": dom.reach,
            "interior-max-error": interior,
            "continuity": dict(cont, threshold=1e-3 * cont["scale"]),
            "outside-collar-max": far,
            "normal-match": dict(match, **{"pass": match_ok}),
            "grid": {"nx": xs.size, "ny": ys.size, "h": args.h},
        }
        passed = interior == 0.0 and cont["mismatch"] <= 1e-3 * cont["scale"] and far == 0.0 and match_ok
        return write_report(args, "domain-extend", result, passed)
    cases = dependence_suite(handle, f, cases=args.cases, seed=args.seed)
    control = control_case(handle, f)
    ok_cases = sum(bool(c["pass"]) for c in cases)
    passed = ok_cases == len(cases) and control["difference"] > 1e-6
    rows = [{"case": i, "difference": c["difference"], "gap": c["gap"], "pass": str(c["pass"])}
            for i, c in enumerate(cases)]
    result = {"domain": dom.to_dict(), "passed-cases": ok_cases, "cases": cases, "control": control}
    return write_report(args, "domain-depend", result, passed, rows)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--bits", type=int, default=512, help="mpmath working precision (default 512)")
    g.add_argument("--jmax", type=int, default=20, help="two-sided index cutoff (default 20)")
    g.add_argument("--tol", type=float, default=1e-30, help="moment / tail tolerance (default 1e-30)")
    g.add_argument("--out", default=".", help="output directory (default .)")
    g.add_argument("--seed", type=int, default=20240607, help="seed for probe families and suites")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="seeleyext", description="Seeley-type extension operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    coeffs = sub.add_parser("coeffs", help="synthesize or check coefficient families")
    csub = coeffs.add_subparsers(dest="action", required=True)
    gen = csub.add_parser("gen", parents=[common], help="synthesize a family")
    gen.add_argument("--kind", choices=("two-sided", "seeley", "vandermonde", "dyadic"), default="two-sided")
    gen.add_argument("--kmax", type=int, default=10, help="moment range (m for dyadic)")
    gen.add_argument("--beta", type=float, default=2, help="seeley node ratio")
    gen.add_argument("--nodes", help="vandermonde nodes, comma separated")
    gen.add_argument("--m1", type=int, default=0)
    gen.add_argument("--m2", type=int, default=0)
    gen.add_argument("--r", type=float, default=1.0, help="dyadic scale")
    gen.set_defaults(handler=cmd_coeffs_gen)
    chk = csub.add_parser("check", parents=[common], help="re-validate a coefficient file")
    chk.add_argument("--coeffs", required=True)
    chk.add_argument("--kmax", type=int)
    chk.set_defaults(handler=cmd_coeffs_check)

    ext = sub.add_parser("extend", parents=[common], help="extend a builtin function on a line grid")
    ext.add_argument("--f", required=True, help="builtin function, e.g. builtin:poly:2")
    ext.add_argument("--coeffs", help="coefficient file (default: synthesize two-sided)")
    ext.add_argument("--kmax", type=int, default=6)
    ext.add_argument("--h", type=float, default=0.01)
    ext.add_argument("--range", default="-2:2")
    ext.add_argument("--reference", help="builtin to compare against on x < 0")
    ext.add_argument("--reference-tol", type=float, default=1e-9)
    ext.set_defaults(handler=cmd_extend, action=None)

    probe = sub.add_parser("probe", help="norm, dilation, boundary and adjoint probes")
    psub = probe.add_subparsers(dest="action", required=True)
    for name in ("sobolev", "lp", "holder", "besov", "dilation", "boundary", "adjoint"):
        pp = psub.add_parser(name, parents=[common])
        pp.add_argument("--coeffs")
        pp.add_argument("--kmax", type=int, default=6)
        pp.set_defaults(handler=cmd_probe)
        if name in ("sobolev", "dilation"):
            pp.add_argument("--k", help="orders, comma separated ('' for none)")
        if name in ("sobolev", "lp", "besov", "dilation"):
            pp.add_argument("--p", help="exponents, comma separated; 'inf' allowed")
        if name in ("holder", "besov"):
            pp.add_argument("--s", help="smoothness values, comma separated")
        if name == "besov":
            pp.add_argument("--q", help="fine index (default 2)")
        if name in ("sobolev", "lp", "holder", "besov"):
            pp.add_argument("--limit", type=int, help="use only the first N probe functions")
        if name in ("dilation", "boundary", "adjoint"):
            pp.add_argument("--f", help="builtin function (default gaussian)")
        if name == "dilation":
            pp.add_argument("--slope-tol", type=float, default=0.02)
        if name == "boundary":
            pp.add_argument("--orders", type=int, default=6)
            pp.add_argument("--hs", help="step sizes, comma separated (default 1e-2,1e-3)")
            pp.add_argument("--stencil-points", type=int)
        if name == "adjoint":
            pp.add_argument("--g", help="builtin test function (default gaussian)")
            pp.add_argument("--orders", type=int, default=3)

    dom = sub.add_parser("domain", help="planar domain extension")
    dsub = dom.add_subparsers(dest="action", required=True)
    for name in ("extend", "depend"):
        dp = dsub.add_parser(name, parents=[common])
        dp.add_argument("--shape", default="disk", help="disk, ellipse or star")
        dp.add_argument("--domain", help="domain JSON file (overrides --shape)")
        dp.add_argument("--t-max", type=float)
        dp.add_argument("--f", default="exp(-x1)", help="x1, x1x2, exp(-x1), 1 or a builtin applied to x1")
        dp.add_argument("--coeffs")
        dp.add_argument("--kmax", type=int, default=6)
        dp.set_defaults(handler=cmd_domain)
        if name == "extend":
            dp.add_argument("--h", type=float, default=0.02, help="field grid spacing")
        else:
            dp.add_argument("--cases", type=int, default=20)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # ranges such as "-2:2" look like options to argparse
    for i, tok in enumerate(argv[:-1]):
        if tok == "--range":
            argv[i : i + 2] = [f"--range={argv[i + 1]}"]
            break
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        with output_lock(args.out):
            return args.handler(args)
    except (UsageError, ExtensionError, ValueError, OSError, KeyError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
