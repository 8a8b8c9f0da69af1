"""Operator-norm, boundary-smoothness, dilation and adjoint probes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from ..coeffs import CoefficientFamily, family_constant
from ..exceptions import WitnessError
from ..functions import CallableFunction, GridFunction
from ..operator import (
    ExtensionPlan,
    adjoint_function,
    commuted_family,
    dilate,
    extend_callable,
    extension_function,
)
from .family import ProbeFunction
from .norms import NormSpec, besov_levels, combine_levels, default_levels, holder_norm
from .quadrature import DEFAULT_QUAD, LogQuadrature, callable_inner, callable_lp_norm

UNIFORMITY_SPREAD = 10.0


def _num(x):
    """Decimal string for reports (``repr`` keeps round-trip precision)."""
    if x is None:
        return None
    if isinstance(x, mp.mpf):
        return mp.nstr(x, 30)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


@dataclass
class ProbeRow:
    fid: str
    norm_in: float
    norm_out: float
    ratio: float | None
    bound: float | None
    passed: bool | None
    note: str = ""

    def to_dict(self):
        return {
            "function-id": self.fid,
            "norm-in": _num(self.norm_in),
            "norm-out": _num(self.norm_out),
            "ratio": _num(self.ratio),
            "bound": _num(self.bound),
            "pass": self.passed,
            "note": self.note,
        }


@dataclass
class NormProbeReport:
    """Per-function ratios ``||E f|| / ||f||`` against an optional bound."""

    operator_id: str
    spec: NormSpec
    rows: list
    constant: float | None
    meta: dict = field(default_factory=dict)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows if r.ratio is not None])

    @property
    def spread(self) -> float:
        r = self.ratios
        return float(r.max() / r.min()) if r.size else 1.0

    @property
    def passed(self) -> bool:
        ok = all(r.passed is not False for r in self.rows)
        if self.constant is None and self.ratios.size:
            ok = ok and self.spread <= UNIFORMITY_SPREAD
        return ok

    def to_dict(self):
        return {
            "operator": self.operator_id,
            "spec": self.spec.to_dict(),
            "constant": _num(self.constant),
            "max-ratio": _num(self.ratios.max()) if self.ratios.size else None,
            "spread": _num(self.spread),
            "pass": self.passed,
            "rows": [r.to_dict() for r in self.rows],
            "meta": self.meta,
        }


# --------------------------------------------------------------------------
# Negative orders
# --------------------------------------------------------------------------


@dataclass
class DecompositionWitness:
    """``target = sum_m d^m g_m`` (normal derivatives only), ``m <= -order``."""

    order: int
    terms: list

    def __post_init__(self):
        if self.order >= 0:
            raise ValueError("witness order must be negative")
        for m, _ in self.terms:
            if not 0 <= m <= -self.order:
                raise ValueError(f"derivative order {m} outside 0..{-self.order}")

    def evaluate(self, x, h: float = 1e-3):
        """``sum_m d^m g_m(x)`` by central differences, Richardson-extrapolated once."""
        x = np.asarray(x, float)
        total = 0.0
        for m, g in self.terms:
            total = total + _richardson(g, m, x, h)
        return total

    def verify(self, target: CallableFunction, points, h: float = 1e-3, tol: float = 1e-6):
        pts = np.asarray(points, float)
        got = self.evaluate(pts, h)
        want = np.asarray(target(pts), float)
        scale = max(1.0, float(np.abs(want).max()))
        err = float(np.abs(got - want).max()) / scale
        if err > tol:
            raise WitnessError(f"witness reproduces the target only to {err:.3g} (tol {tol:.3g})")
        return err


def _central(g, m, x, h):
    if m == 0:
        return np.asarray(g(x), float)
    c = np.array([math.comb(m, i) * (-1) ** i for i in range(m + 1)], float)
    offs = (m / 2 - np.arange(m + 1)) * h
    return sum(ci * np.asarray(g(x + o), float) for ci, o in zip(c, offs)) / h**m


def _richardson(g, m, x, h):
    return (4 * _central(g, m, x, h / 2) - _central(g, m, x, h)) / 3


def witness_cost(witness: DecompositionWitness, p, full: bool | None = None, quad=DEFAULT_QUAD) -> float:
    parts = [callable_lp_norm(g, p, 0, full, quad) for _, g in witness.terms]
    if math.isinf(p):
        return max(parts, default=0.0)
    return sum(x**p for x in parts) ** (1.0 / p)


def neg_sobolev_upper(f: CallableFunction, k: int, p, witness: DecompositionWitness,
                      check_points=None, quad=DEFAULT_QUAD) -> float:
    """Objective value of a feasible decomposition: an upper bound of the norm."""
    if witness.order != k:
        raise ValueError("witness order does not match k")
    if check_points is not None:
        witness.verify(f, check_points)
    return witness_cost(witness, p, quad=quad)


def transport_witness(plan: ExtensionPlan, witness: DecompositionWitness) -> DecompositionWitness:
    """Witness for ``E f`` from one for ``f``: ``g_m -> E^{a(-b)^-m, b} g_m``."""
    terms = []
    for m, g in witness.terms:
        fam = commuted_family(plan.family, -m)
        sub = ExtensionPlan(fam, plan.tail_target, plan.order, plan.out_of_range,
                            plan.precision, plan.bits, strict=plan.strict)
        terms.append((m, extension_function(sub, g)))
    return DecompositionWitness(witness.order, terms)


# --------------------------------------------------------------------------
# Grid windows for spectral and Hoelder probes
# --------------------------------------------------------------------------


def extension_window(family: CoefficientFamily, pf: ProbeFunction, p, s=0.0,
                     rel: float = 1e-6, resolve: float = 1e-3, ppw: int = 8,
                     max_nodes: int = 2**21):
    """``(lo, hi, h)`` covering ``E f`` to relative weight ``rel``.

    Stretched copies (``b_j < 1``) are kept while ``|a_j| b_j^(-1/p)`` is
    above ``rel``; compressed ones are resolved with ``ppw`` nodes per
    feature while ``|a_j| b_j^max(s,0)`` is above ``resolve``.
    """
    a, b = family.as_float()
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    with np.errstate(over="ignore", divide="ignore"):
        wide = (b < 1) & (np.abs(a) * b ** (-inv_p) >= rel)
        fine = (b >= 1) & (np.abs(a) * b ** max(s, 0.0) >= resolve)
    stretch = float((1 / b[wide]).max()) if np.any(wide) else 1.0
    squeeze = float(b[fine].max()) if np.any(fine) else 1.0
    lo = -pf.extent * stretch
    hi = pf.extent
    h = pf.scale / (ppw * squeeze)
    if (hi - lo) / h > max_nodes:
        h = (hi - lo) / max_nodes
    return lo, hi, h


def sample_line(func, lo, hi, h) -> GridFunction:
    n0 = int(math.floor(-lo / h))
    n1 = int(math.ceil(hi / h))
    x = h * np.arange(-n0, n1 + 1)
    return GridFunction(np.asarray(func(x), float), h, (x[0],), half=False)


def extension_samples(plan: ExtensionPlan, pf: ProbeFunction, x) -> np.ndarray:
    """``E f`` on ``x`` in double precision, skipping reflected copies outside ``pf.extent``.

    Beyond its extent ``|f| < 1e-16 max|f|``, so each skipped term is below
    that bound times ``|a_j|``.
    """
    x = np.asarray(x, float)
    out = np.zeros(x.shape)
    pos = x >= 0
    out[pos] = pf.func(x[pos])
    neg = np.flatnonzero(~pos)
    y = -x[neg]
    order = np.argsort(y)
    ys = y[order]
    a, b = plan.arrays
    acc = np.zeros(ys.shape)
    for aj, bj in zip(a, b):
        n = np.searchsorted(ys, pf.extent / bj, side="right")
        if n:
            acc[:n] += aj * pf.func(bj * ys[:n])
    vals = np.empty(ys.shape)
    vals[order] = acc
    out[neg] = vals
    return out


GRID_SMOOTHNESS = 0.5
_LEVEL_CACHE: dict = {}


def _grid_pair(plan, pf, spec):
    lo, hi, h = extension_window(plan.family, pf, spec.p, GRID_SMOOTHNESS)
    Ef = sample_line(lambda x: extension_samples(plan, pf, x), lo, hi, h)
    if spec.family == "holder":
        n = int(math.ceil(pf.extent / h))
        f = GridFunction(np.asarray(pf.func(h * np.arange(n + 1)), float), h, (0.0,), True)
    else:
        # the half-space quasi-norm is realized through the even extension
        f = sample_line(lambda x: pf.func(np.abs(x)), -pf.extent, pf.extent, h)
    return f, Ef, {"window": [lo, hi], "h": h, "nodes": Ef.values.size}


def _spectral_pair(plan, pf, spec):
    """Cached per-level norms of the even extension and of ``E f``."""
    key = (plan.family.id, pf.fid, spec.p, spec.levels)
    if key not in _LEVEL_CACHE:
        f, Ef, info = _grid_pair(plan, pf, spec)
        if len(_LEVEL_CACHE) > 256:
            _LEVEL_CACHE.clear()
        levels = spec.levels if spec.levels is not None else default_levels(Ef)
        _LEVEL_CACHE[key] = (besov_levels(f, spec.p, levels), besov_levels(Ef, spec.p, levels), info)
    return _LEVEL_CACHE[key]


# --------------------------------------------------------------------------
# Operator-norm probe
# --------------------------------------------------------------------------


def _as_probe(item, i):
    if isinstance(item, ProbeFunction):
        return item
    return ProbeFunction(item.name or f"f{i}", item, 0.05, 10.0)


def operator_norm_probe(plan: ExtensionPlan, spec: NormSpec, family, quad: LogQuadrature = DEFAULT_QUAD,
                        delta: float | None = None) -> NormProbeReport:
    """Ratios ``||E f|| / ||f||`` over ``family`` for one norm.

    Sobolev, L^p, Hoelder and negative-order rows are compared with
    ``sum_j 2^(delta|j|) |a_j| (b_j^(-1/p) + b_j^(k-1/p))`` (Hoelder uses
    ``k = 0, p = inf``).  Besov rows only record ratios; the report then
    requires ``max/min <= 10`` across the family.  Rows whose input norm
    vanishes are excluded.
    """
    delta = plan.family.delta if delta is None else delta
    if spec.family in ("lp", "sobolev", "neg-sobolev-upper"):
        const = family_constant(plan.family, int(spec.order), spec.p, delta)
    elif spec.family == "holder":
        const = family_constant(plan.family, 0, math.inf, delta)
    else:
        const = None
    rows = []
    meta = {"delta": delta, "family-id": plan.family.id}
    for i, item in enumerate(family):
        pf = _as_probe(item, i)
        try:
            n_in, n_out, note = _probe_one(plan, spec, pf, quad, meta)
        except Exception as exc:  # noqa: BLE001  recorded per row
            rows.append(ProbeRow(pf.fid, math.nan, math.nan, None, const, False, f"error: {exc}"))
            continue
        if not n_in > 0:
            rows.append(ProbeRow(pf.fid, n_in, n_out, None, const, None, "excluded: zero input norm"))
            continue
        ratio = n_out / n_in
        ok = bool(np.isfinite(ratio)) and (const is None or ratio <= const)
        rows.append(ProbeRow(pf.fid, n_in, n_out, ratio, const, ok, note))
    return NormProbeReport(plan.family.id, spec, rows, const, meta)


def _probe_one(plan, spec, pf, quad, meta):
    f = pf.func
    if spec.family in ("lp", "sobolev"):
        k = int(spec.order)
        Ef = extension_function(plan, f)
        n_in = _sob(f, k, spec.p, False, quad)
        n_out = _sob(Ef, k, spec.p, True, quad)
        return n_in, n_out, ""
    if spec.family == "neg-sobolev-upper":
        m = -int(spec.order)
        target = f.derivative(m)
        wit = DecompositionWitness(int(spec.order), [(m, f)])
        n_in = neg_sobolev_upper(target, int(spec.order), spec.p, wit, quad=quad)
        moved = transport_witness(plan, wit)
        n_out = witness_cost(moved, spec.p, full=True, quad=quad)
        return n_in, n_out, "witness transport"
    if spec.family in ("besov", "triebel-diag"):
        lv_in, lv_out, info = _spectral_pair(plan, pf, spec)
        meta.setdefault("grids", {})[pf.fid] = info
        q = spec.p if spec.family == "triebel-diag" else spec.q
        tail = max(lv_in.tail, lv_out.tail)
        return combine_levels(lv_in, spec.order, q), combine_levels(lv_out, spec.order, q), f"level tail {tail:.2e}"
    g_in, g_out, info = _grid_pair(plan, pf, spec)
    meta.setdefault("grids", {})[pf.fid] = info
    k = int(math.floor(spec.order))
    s = spec.order - k
    return holder_norm(g_in, k, s, max_dense=64), holder_norm(g_out, k, s, max_dense=64), ""


def _sob(f, k, p, full, quad):
    parts = [callable_lp_norm(f, p, m, full, quad) for m in range(k + 1)]
    if math.isinf(p):
        return max(parts)
    return sum(x**p for x in parts) ** (1.0 / p)


# --------------------------------------------------------------------------
# Boundary smoothness
# --------------------------------------------------------------------------


def _one_sided_weights(k, npts, h, sign):
    nodes = [sign * i * h for i in range(npts)]
    A = mp.matrix([[x**r for x in nodes] for r in range(npts)])
    rhs = mp.matrix([mp.factorial(k) if r == k else 0 for r in range(npts)])
    w = mp.lu_solve(A, rhs)
    return nodes, [w[i] for i in range(npts)]


@dataclass
class SmoothnessRow:
    order: int
    mismatch: list
    fitted_order: float | None
    passed: bool

    def to_dict(self):
        return {"order": self.order, "mismatch": [_num(m) for m in self.mismatch],
                "fitted-order": _num(self.fitted_order), "pass": self.passed}


@dataclass
class SmoothnessReport:
    family_id: str
    function: str
    hs: list
    rows: list
    min_fitted_order: float
    tol: float

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    def to_dict(self):
        return {"family": self.family_id, "function": self.function, "h": [_num(h) for h in self.hs],
                "min-fitted-order": self.min_fitted_order, "pass": self.passed,
                "rows": [r.to_dict() for r in self.rows]}


def boundary_smoothness_report(family: CoefficientFamily, f: CallableFunction, K: int = 6,
                               hs=(1e-2, 1e-3), bits: int | None = None,
                               stencil_points: int | None = None,
                               min_fitted_order: float = 0.8, tol: float | None = None):
    """One-sided derivative mismatch ``|d^k Ef(0-) - d^k f(0+)|`` for ``k <= K``.

    Both sides use one-sided stencils on nodes ``0, +-h, ..., +-(n-1)h`` with
    ``n = k + 1`` (first order) unless ``stencil_points`` asks for more; the
    boundary node carries ``f(0)``.  Evaluation is in extended precision.
    A row passes when every mismatch is below ``tol`` or the fitted order
    ``log(m_1/m_2) / log(h_1/h_2)`` over consecutive ``h`` is at least
    ``min_fitted_order``.
    """
    bits = bits or int(family.meta.get("bits", 512))
    tol = float(family.meta.get("tail_tol", 1e-30)) if tol is None else tol
    plan = ExtensionPlan(family, precision="extended", bits=bits, strict=False)
    rows = []
    with mp.workprec(bits):
        f0 = f(mp.mpf(0))
        for k in range(K + 1):
            npts = max(k + 1, stencil_points or 0)
            mis = []
            for h in hs:
                h = mp.mpf(h)
                nodes, w = _one_sided_weights(k, npts, h, 1)
                right = mp.fsum(wi * (f(x) if i else f0) for i, (wi, x) in enumerate(zip(w, nodes)))
                nodes, w = _one_sided_weights(k, npts, h, -1)
                left = mp.fsum(
                    wi * (extend_callable(plan, f, x) if i else f0) for i, (wi, x) in enumerate(zip(w, nodes))
                )
                mis.append(abs(left - right))
            fits = []
            for (h1, m1), (h2, m2) in zip(zip(hs, mis), zip(hs[1:], mis[1:])):
                if m1 > tol and m2 > tol:
                    fits.append(float(mp.log(m1 / m2) / mp.log(mp.mpf(h1) / mp.mpf(h2))))
            fitted = min(fits) if fits else None
            exact = all(m <= tol for m in mis)
            ok = exact or (fitted is not None and fitted >= min_fitted_order and mis[-1] < mis[0])
            rows.append(SmoothnessRow(k, [float(m) for m in mis], fitted, bool(ok)))
    return SmoothnessReport(family.id, f.name, list(hs), rows, min_fitted_order, tol)


# --------------------------------------------------------------------------
# Dilation growth
# --------------------------------------------------------------------------


@dataclass
class DilationReport:
    spec: NormSpec
    r: list
    ratios: list
    slope: float
    slope_small: float
    slope_large: float

    @property
    def exponent(self) -> float:
        return max(abs(self.slope_small), abs(self.slope_large))

    def to_dict(self):
        return {"spec": self.spec.to_dict(), "r": [_num(r) for r in self.r],
                "ratios": [_num(x) for x in self.ratios], "slope": _num(self.slope),
                "slope-small-r": _num(self.slope_small), "slope-large-r": _num(self.slope_large),
                "exponent": _num(self.exponent)}


DILATIONS = tuple(4.0**e for e in range(-4, 5))


def dilation_growth_probe(spec: NormSpec, f: CallableFunction, rs=DILATIONS, quad=DEFAULT_QUAD) -> DilationReport:
    """Log-log slopes of ``||theta^r f|| / ||f||`` against ``r > 0``."""
    if spec.family not in ("lp", "sobolev"):
        raise ValueError("dilation probes support lp and sobolev")
    k = int(spec.order)
    base = _sob(f, k, spec.p, False, quad)
    rs = [float(r) for r in rs]
    ratios = [_sob(dilate(r, f), k, spec.p, False, quad) / base for r in rs]
    lr = np.log(rs)
    lq = np.log(ratios)
    slope = float(np.polyfit(lr, lq, 1)[0])
    small = lr <= 0
    large = lr >= 0
    s_small = float(np.polyfit(lr[small], lq[small], 1)[0]) if small.sum() > 1 else slope
    s_large = float(np.polyfit(lr[large], lq[large], 1)[0]) if large.sum() > 1 else slope
    return DilationReport(spec, rs, ratios, slope, s_small, s_large)


# --------------------------------------------------------------------------
# Adjoint
# --------------------------------------------------------------------------


def adjoint_duality(plan: ExtensionPlan, f: CallableFunction, g: CallableFunction, quad=DEFAULT_QUAD):
    """``(<E f, g>_line, <f, E* g>_half)`` by log-substituted trapezoid quadrature."""
    lhs = callable_inner(extension_function(plan, f), g, full=True, quad=quad)
    rhs = callable_inner(f, adjoint_function(plan, g), full=False, quad=quad)
    return lhs, rhs


@dataclass
class FlatnessRow:
    order: int
    values: dict
    reference: float
    ratio: float
    monotone: bool

    def to_dict(self):
        return {"order": self.order, "values": {repr(k): _num(v) for k, v in self.values.items()},
                "reference": _num(self.reference), "ratio": _num(self.ratio), "monotone": self.monotone}


def adjoint_flatness(plan: ExtensionPlan, g: CallableFunction, orders=(0, 1, 2, 3),
                     xs=(1e-2, 1e-3, 1e-4), probe: float = 1e-3, reference: float = 0.5):
    """``|d^m E* g|`` near the boundary against its size at ``reference``.

    ``ratio`` is ``|d^m E*g(probe)| / |d^m E*g(reference)|``; ``monotone``
    says whether the values shrink along ``xs`` (which must be decreasing).
    """
    Eg = adjoint_function(plan, g)
    rows = []
    pts = sorted(set(xs) | {probe})[::-1]
    for m in orders:
        d = Eg.derivative(m) if m else Eg
        vals = {x: abs(float(d(x))) for x in pts}
        ref = abs(float(d(reference)))
        seq = [vals[x] for x in xs]
        mono = all(b <= a for a, b in zip(seq, seq[1:]))
        rows.append(FlatnessRow(m, vals, ref, vals[probe] / ref if ref else math.inf, mono))
    return rows
