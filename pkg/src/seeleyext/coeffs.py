"""Reflection-coefficient families and their synthesis in extended precision.

A family is a finite list of triples ``(j, a_j, b_j)`` with ``b_j > 0``.  The
extension operator built from it reproduces ``x_n**k`` below the boundary
exactly when the moment identity ``sum_j a_j * (-b_j)**k == 1`` holds, so
every constructor here ends with a moment check.

Four kinds are supported:

``two-sided-dyadic``
    ``b_j = 4**j`` for ``j`` in ``Z``; moments hold for all signs of ``k``.
    Built by a contraction iteration on interpolation data at ``4**-k`` and
    Taylor expansion of the resulting entire interpolant.
``one-sided-seeley``
    ``b_j = beta**j`` for ``j >= 0``; moments hold for ``k >= 0`` only.
``finite-vandermonde``
    Arbitrary distinct positive nodes, moments on a finite window.
``finite-dyadic``
    Nodes ``r * 2**-j`` for ``j = 0..2m``, moments for ``|k| <= m``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import mpmath as mp

from . import __version__
from .exceptions import (
    ConditioningError,
    ContractionError,
    DuplicateNodeError,
    MomentValidationError,
    PrecisionError,
)
from .precision import PrecisionContext

KINDS = ("two-sided-dyadic", "one-sided-seeley", "finite-vandermonde", "finite-dyadic")

# Abort threshold, a little above the contraction constant 64 e^(2/3) / 165.
CONTRACTION_ABORT = 0.76
DELTA_LADDER = (0.25, 0.5, 1.0, 2.0, 4.0)


def contraction_constant(beta=4) -> float:
    """Upper bound ``beta^3 e^(2/(beta-1)) / ((beta^2-1)(beta^2-beta-1))``.

    Valid for ``beta > 2``; equals ``64 e^(2/3) / 165 ~ 0.7552`` at ``beta=4``.
    """
    beta = float(beta)
    if beta <= 2:
        raise ValueError("the quantitative sum bound needs beta > 2")
    return beta**3 * math.exp(2 / (beta - 1)) / ((beta**2 - 1) * (beta**2 - beta - 1))


# --------------------------------------------------------------------------
# Weierstrass product and cardinal interpolation at geometric nodes
# --------------------------------------------------------------------------


class WeierstrassValue(NamedTuple):
    value: object
    tail_bound: float


def _mpf(x):
    if isinstance(x, (mp.mpf, mp.mpc)):
        return x
    if isinstance(x, str):
        return mp.mpf(x)
    if isinstance(x, complex):
        return mp.mpc(x)
    return mp.mpf(x)


def _check_beta(beta):
    beta = _mpf(beta)
    if not beta > 1:
        raise ValueError(f"beta must exceed 1, got {beta}")
    return beta


def _product(beta, z, nfactors, skip=None):
    r = mp.mpf(1)
    p = mp.mpf(1)
    for j in range(nfactors):
        if j != skip:
            r *= 1 - z / p
        p *= beta
    return r


def weierstrass_tail_bound(beta, z, nfactors) -> float:
    """Relative error bound for dropping factors ``j >= nfactors``."""
    beta = float(beta)
    x = abs(complex(z)) * beta ** (-nfactors)
    return math.expm1(2 * x / (1 - 1 / beta))


def weierstrass_eval(beta, z, ctx: PrecisionContext) -> WeierstrassValue:
    """Truncated ``W_beta(z) = prod_{j>=0} (1 - z / beta**j)``.

    Raises
    ------
    ValueError
        If ``beta <= 1``.
    PrecisionError
        If ``ctx.product_terms`` factors leave a tail ``|z| beta^-P`` above
        ``ctx.tail_tol``.
    """
    with mp.workprec(ctx.bits):
        beta = _check_beta(beta)
        z = _mpf(z)
        P = ctx.product_terms
        if abs(z) * beta ** (-P) > ctx.tail_tol:
            raise PrecisionError(
                f"{P} product terms leave a tail of {mp.nstr(abs(z) * beta ** (-P), 5)} "
                f"> tol {ctx.tail_tol:g}"
            )
        value = _product(beta, z, P)
        return WeierstrassValue(+value, weierstrass_tail_bound(beta, z, P))


def weierstrass_derivative_at_node(beta, k: int, ctx: PrecisionContext):
    """``W_beta'(beta**k) = -beta**-k W_beta(1/beta) prod_{l=1..k} (1 - beta**l)``."""
    if k < 0:
        raise ValueError("node index must be >= 0")
    with mp.workprec(ctx.bits):
        beta = _check_beta(beta)
        w = _product(beta, 1 / beta, ctx.product_terms)
        fin = mp.mpf(1)
        for l in range(1, k + 1):
            fin *= 1 - beta**l
        out = -(beta ** (-k)) * w * fin
        if not mp.isfinite(out):
            raise PrecisionError(f"W'(beta^{k}) overflows at {ctx.bits} bits")
        return out


@dataclass(frozen=True)
class BoundarySequence:
    """Target values ``u_0..u_K`` at the nodes ``beta**k``."""

    entries: tuple
    beta: object = 4

    def __post_init__(self):
        if float(self.beta) <= 1:
            raise ValueError("beta must exceed 1")
        object.__setattr__(self, "entries", tuple(_mpf(u) for u in self.entries))

    def __len__(self):
        return len(self.entries)

    @classmethod
    def seeley(cls, K: int, beta=2) -> "BoundarySequence":
        return cls(tuple((-1) ** k for k in range(K)), beta)


class _Cardinal:
    """Cached pieces of ``F_u(z) = sum_k u_k/W'(b^k) * W(z)/(z - b^k)``."""

    def __init__(self, beta, K, ctx):
        self.beta = _check_beta(beta)
        self.K = K
        self.ctx = ctx
        self.nodes = [self.beta**k for k in range(K)]
        w_inv = _product(self.beta, 1 / self.beta, ctx.product_terms)
        self.dW = []
        fin = mp.mpf(1)
        for k in range(K):
            if k:
                fin *= 1 - self.beta**k
            self.dW.append(-(self.beta ** (-k)) * w_inv * fin)

    def basis_row(self, z):
        """Values ``W(z) / (W'(b^k) (z - b^k))`` for all retained k."""
        for k, node in enumerate(self.nodes):
            if z == node:
                return [mp.mpf(1) if i == k else mp.mpf(0) for i in range(self.K)]
        Wz = _product(self.beta, z, self.ctx.product_terms)
        return [Wz / (d * (z - node)) for d, node in zip(self.dW, self.nodes)]

    def eval(self, u, z):
        return mp.fsum(uk * c for uk, c in zip(u, self.basis_row(z)))


def interpolant_eval(u: BoundarySequence, z, ctx: PrecisionContext):
    """Evaluate the entire cardinal interpolant ``F_u`` at ``z``.

    At a retained node ``z = beta**m`` the cardinal branch returns ``u_m``.
    """
    with mp.workprec(ctx.bits):
        card = _Cardinal(u.beta, len(u), ctx)
        return +card.eval(u.entries, _mpf(z))


def interpolation_sum_bound(beta, l: int, K: int, ctx: PrecisionContext):
    """Left side of the contraction estimate at ``z = beta**-l``.

    ``sum_{k=1..K} |W(beta^-l) / (W'(beta^k) (beta^-l - beta^k))|``
    """
    with mp.workprec(ctx.bits):
        card = _Cardinal(beta, K + 1, ctx)
        row = card.basis_row(card.beta ** (-l))
        return +mp.fsum(abs(c) for c in row[1:])


# --------------------------------------------------------------------------
# Taylor coefficients of F_u
# --------------------------------------------------------------------------


def _series_without(beta, skip, count, nfactors):
    c = [mp.mpf(0)] * count
    c[0] = mp.mpf(1)
    p = mp.mpf(1)
    for j in range(nfactors):
        if j != skip:
            q = 1 / p
            for n in range(count - 1, 0, -1):
                c[n] -= q * c[n - 1]
        p *= beta
    return c


def _taylor_product(card, u, count):
    # W(z)/(z - b^k) = -b^-k prod_{j != k} (1 - z/b^j)
    out = [mp.mpf(0)] * count
    for k, uk in enumerate(u):
        if uk == 0:
            continue
        w = -uk * card.beta ** (-k) / card.dW[k]
        s = _series_without(card.beta, k, count, card.ctx.product_terms)
        for n in range(count):
            out[n] += w * s[n]
    return out


def _taylor_division(card, u, count):
    # (z - c) q(z) = W(z)  =>  q_0 = -w_0 / c,  q_n = (q_{n-1} - w_n) / c
    Wser = _series_without(card.beta, None, count, card.ctx.product_terms)
    out = [mp.mpf(0)] * count
    for k, uk in enumerate(u):
        if uk == 0:
            continue
        c = card.nodes[k]
        q = -Wser[0] / c
        scale = uk / card.dW[k]
        out[0] += scale * q
        for n in range(1, count):
            q = (q - Wser[n]) / c
            out[n] += scale * q
    return out


def taylor_coefficients(
    u: BoundarySequence,
    count: int,
    ctx: PrecisionContext,
    method: str = "product",
    cross_check: bool = False,
):
    """Taylor coefficients ``F_u(z) = sum_n c_n z**n`` for ``n < count``.

    ``method="product"`` expands each partial-fraction term as the product
    with the vanishing factor removed; ``method="division"`` divides the
    truncated series of ``W`` by ``z - beta**k``.  The division path cancels
    roughly ``K**2 log2(beta) / 2`` bits, so it runs at raised precision.

    With ``cross_check=True`` both paths are computed and a
    :class:`ConditioningError` is raised if they differ by more than
    ``ctx.tail_tol`` relative to the largest coefficient.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if method not in ("product", "division"):
        raise ValueError(f"unknown method {method!r}")
    K = len(u)
    extra = int(math.log2(max(float(u.beta), 2.0)) * K * (K + 1) / 2) + 64
    if cross_check or method == "division":
        with mp.workprec(ctx.bits + extra):
            card = _Cardinal(u.beta, K, ctx)
            div = _taylor_division(card, u.entries, count)
    with mp.workprec(ctx.bits):
        card = _Cardinal(u.beta, K, ctx)
        if method == "division" and not cross_check:
            return [+x for x in div]
        prod = _taylor_product(card, u.entries, count)
        if cross_check:
            scale = max([abs(x) for x in prod] + [mp.mpf(1)])
            gap = max(abs(a - b) for a, b in zip(prod, div))
            if gap > ctx.tail_tol * scale:
                raise ConditioningError(
                    f"Taylor paths disagree by {mp.nstr(gap, 5)} (> {ctx.tail_tol:g})"
                )
        return prod if method == "product" else [+x for x in div]


# --------------------------------------------------------------------------
# Families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientFamily:
    """Finite reflection data ``(j, a_j, b_j)`` plus validation metadata.

    ``moment_range`` is the inclusive ``(kmin, kmax)`` window on which the
    moments were validated.  ``tail`` holds further computed entries beyond
    the stored cutoff; they are used only to certify truncation errors and
    never enter operator sums.
    """

    kind: str
    indices: tuple
    a: tuple
    b: tuple
    moment_range: tuple
    delta: float = 0.5
    residuals: tuple = ()
    tail: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if not (len(self.indices) == len(self.a) == len(self.b)):
            raise ValueError("indices, a and b must have equal length")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("family indices must be distinct")
        if any(not bj > 0 for bj in self.b):
            raise ValueError("every b_j must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def __len__(self):
        return len(self.indices)

    def entries(self):
        return list(zip(self.indices, self.a, self.b))

    @property
    def id(self) -> str:
        blob = json.dumps([self.kind, [(j, mp.nstr(a, 40), mp.nstr(b, 40)) for j, a, b in self.entries()]])
        return f"{self.kind}-{hashlib.sha256(blob.encode()).hexdigest()[:12]}"

    @property
    def jmax(self) -> int:
        return max(abs(j) for j in self.indices)

    def as_float(self):
        """``(a, b)`` as float64 numpy arrays."""
        import numpy as np

        return (
            np.array([float(x) for x in self.a]),
            np.array([float(x) for x in self.b]),
        )

    def moment(self, k: int):
        """``sum_j a_j (-b_j)**k`` at the current mpmath precision."""
        terms = [a * (-b) ** k for a, b in zip(self.a, self.b)]
        return mp.fsum(terms)

    def with_(self, **changes) -> "CoefficientFamily":
        from dataclasses import replace

        return replace(self, **changes)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        bits = int(self.meta.get("bits", 512))
        digits = int(bits * math.log10(2)) + 5
        lo, hi = self.moment_range
        return {
            "kind": self.kind,
            "beta": None if self.meta.get("beta") is None else mp.nstr(_mpf(self.meta["beta"]), digits),
            "delta": repr(float(self.delta)),
            "entries": [
                {"j": int(j), "a": mp.nstr(a, digits, strip_zeros=False), "b": mp.nstr(b, digits, strip_zeros=False)}
                for j, a, b in self.entries()
            ],
            "tail": [
                {"j": int(j), "a": mp.nstr(a, digits, strip_zeros=False), "b": mp.nstr(b, digits, strip_zeros=False)}
                for j, a, b in self.tail
            ],
            "validated": {"m1": int(-lo), "m2": int(hi)},
            "meta": {
                "bits": bits,
                "jmax": int(self.meta.get("jmax", self.jmax)),
                "tail_tol": repr(float(self.meta.get("tail_tol", 1e-30))),
                "tool-version": __version__,
            },
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientFamily":
        meta = dict(d.get("meta", {}))
        bits = int(meta.get("bits", 512))
        with mp.workprec(bits):
            entries = [(int(e["j"]), mp.mpf(e["a"]), mp.mpf(e["b"])) for e in d["entries"]]
            tail = tuple((int(e["j"]), mp.mpf(e["a"]), mp.mpf(e["b"])) for e in d.get("tail", []))
        v = d.get("validated", {})
        meta["bits"] = bits
        if "tail_tol" in meta:
            meta["tail_tol"] = float(meta["tail_tol"])
        if d.get("beta") is not None:
            meta["beta"] = d["beta"]
        return cls(
            kind=d["kind"],
            indices=tuple(e[0] for e in entries),
            a=tuple(e[1] for e in entries),
            b=tuple(e[2] for e in entries),
            moment_range=(-int(v.get("m1", 0)), int(v.get("m2", 0))),
            delta=float(d.get("delta", 0.5)),
            tail=tail,
            meta=meta,
        )

    @classmethod
    def from_json(cls, path) -> "CoefficientFamily":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# --------------------------------------------------------------------------
# Moment reports
# --------------------------------------------------------------------------


@dataclass
class MomentRow:
    k: int
    moment: object
    residual: object
    weighted_tail: object
    unweighted_tail: object
    error: str | None = None


@dataclass
class MomentReport:
    family_id: str
    rows: list
    delta: float
    tol: float
    passed: bool
    max_delta: float | None = None

    def residual(self, k):
        for row in self.rows:
            if row.k == k:
                return row.residual
        raise KeyError(k)

    @property
    def max_residual(self):
        vals = [r.residual for r in self.rows if r.error is None]
        return max(vals) if vals else mp.mpf(0)

    def to_dict(self, digits: int = 40) -> dict:
        def s(x):
            return None if x is None else mp.nstr(x, digits)

        return {
            "family": self.family_id,
            "delta": repr(self.delta),
            "tol": repr(self.tol),
            "pass": self.passed,
            "max_delta": None if self.max_delta is None else repr(self.max_delta),
            "rows": [
                {
                    "k": r.k,
                    "moment": s(r.moment),
                    "residual": s(r.residual),
                    "weighted_tail": s(r.weighted_tail),
                    "unweighted_tail": s(r.unweighted_tail),
                    "pass": r.error is None and r.residual <= self.tol,
                    "error": r.error,
                }
                for r in self.rows
            ],
        }


def _k_values(k_range) -> list:
    if k_range is None:
        return []
    if isinstance(k_range, tuple) and len(k_range) == 2:
        lo, hi = k_range
        return list(range(int(lo), int(hi) + 1))
    return [int(k) for k in k_range]


def _tail_sum(tail, k, delta):
    w = mp.mpf(0)
    uw = mp.mpf(0)
    for j, a, b in tail:
        t = abs(a) * b**k
        uw += t
        w += mp.mpf(2) ** (delta * abs(j)) * t
    return w, uw


def moment_report(
    family: CoefficientFamily,
    k_range,
    delta: float = 0.5,
    ctx: PrecisionContext | None = None,
) -> MomentReport:
    """Residuals ``|sum_j a_j (-b_j)^k - 1|`` and truncation tails per ``k``.

    ``k_range`` is either an inclusive ``(lo, hi)`` pair or an iterable of
    integers.  The weighted tail ``sum 2^(delta|j|) |a_j| b_j^k`` runs over the
    family's certification entries (empty for finite families).  The report
    passes iff every residual is at most ``ctx.tail_tol``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    ctx = ctx or PrecisionContext(bits=int(family.meta.get("bits", 512)),
                                  tail_tol=float(family.meta.get("tail_tol", 1e-30)))
    rows = []
    with mp.workprec(ctx.bits):
        for k in _k_values(k_range):
            try:
                m = family.moment(k)
                if not mp.isfinite(m):
                    raise OverflowError("non-finite moment")
                w, uw = _tail_sum(family.tail, k, delta)
                rows.append(MomentRow(k, +m, abs(m - 1), w, uw))
            except (OverflowError, ZeroDivisionError) as exc:
                rows.append(MomentRow(k, None, None, None, None, error=str(exc)))
        passed = all(r.error is None and r.residual <= ctx.tail_tol for r in rows)
        max_delta = None
        ks = [r.k for r in rows if r.error is None]
        if family.tail and ks:
            for d in DELTA_LADDER:
                if all(_tail_sum(family.tail, k, d)[0] <= ctx.tail_tol for k in ks):
                    max_delta = d
        elif ks:
            max_delta = DELTA_LADDER[-1]
    return MomentReport(family.id, rows, float(delta), float(ctx.tail_tol), passed, max_delta)


# --------------------------------------------------------------------------
# Constructors
# --------------------------------------------------------------------------


@dataclass
class FixedPointTrace:
    iterations: int
    diffs: list
    ratios: list
    u: BoundarySequence

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0


def fixed_point_boundary_data(
    ctx: PrecisionContext,
    K: int,
    fp_tol=None,
    beta=4,
    max_iter: int | None = None,
) -> FixedPointTrace:
    """Iterate ``u_k <- (-1)^k - F_u(beta^-k)`` (``k >= 1``) with ``u_0 = 1/2``.

    Returns the converged boundary data with the recorded successive
    differences ``||u^{n+1} - u^n||_inf`` and their ratios.
    """
    with mp.workprec(ctx.bits):
        card = _Cardinal(beta, K, ctx)
        fp_tol = mp.mpf(2) ** (-(ctx.bits // 2)) if fp_tol is None else _mpf(fp_tol)
        max_iter = max_iter or 4 * ctx.bits
        # row l holds the cardinal basis evaluated at beta^-l
        M = [card.basis_row(card.beta ** (-l)) for l in range(K)]
        sign = [mp.mpf((-1) ** k) for k in range(K)]
        u = [mp.mpf(1) / 2] + sign[1:]
        diffs, ratios = [], []
        for it in range(1, max_iter + 1):
            new = [mp.mpf(1) / 2] + [sign[l] - mp.fsum(x * y for x, y in zip(u, M[l])) for l in range(1, K)]
            d = max(abs(x - y) for x, y in zip(new, u))
            u = new
            if diffs and diffs[-1] > 0:
                r = float(d / diffs[-1])
                ratios.append(r)
                # ratios are only meaningful while d is above the rounding floor
                if r > CONTRACTION_ABORT and d > mp.mpf(2) ** (-ctx.bits + 32):
                    raise ContractionError(
                        f"fixed-point step {it} has ratio {r:.4f} > {CONTRACTION_ABORT}; "
                        "precision or truncation is inadequate"
                    )
            diffs.append(d)
            if d < fp_tol:
                break
        else:
            raise ContractionError(f"no convergence to {mp.nstr(fp_tol, 3)} in {max_iter} steps")
        return FixedPointTrace(it, [float(x) for x in diffs], ratios, BoundarySequence(tuple(u), card.beta))


def _validate(family, krange, ctx, validate):
    report = moment_report(family, krange, family.delta, ctx)
    family = family.with_(residuals=tuple(r.residual for r in report.rows))
    if validate and not report.passed:
        worst = max((r for r in report.rows if r.error is None), key=lambda r: r.residual)
        raise MomentValidationError(
            f"{family.kind} family fails moment k={worst.k} with residual "
            f"{mp.nstr(worst.residual, 5)} > {ctx.tail_tol:g}; increase jmax or bits",
            family=family,
            report=report,
        )
    return family, report


def fixed_point_coefficients(
    ctx: PrecisionContext,
    kmax: int,
    fp_tol=None,
    *,
    delta: float = 0.5,
    guard: int = 8,
    count: int | None = None,
    validate: bool = True,
) -> CoefficientFamily:
    """Two-sided dyadic family ``b_j = 4**j`` with moments for ``|k| <= kmax``.

    The contraction iteration fixes boundary data ``u`` with ``u_0 = 1/2``;
    the Taylor coefficients ``t_n`` of ``F_u`` give ``a_j = t_|j|`` for
    ``j != 0`` and ``a_0 = 2 t_0``.  Coefficients with ``jmax < |j| < count``
    are kept in ``family.tail`` for truncation certificates.

    Raises
    ------
    PrecisionError
        ``ctx.bits`` is too small for ``kmax``.
    ContractionError
        A fixed-point ratio exceeded 0.76.
    MomentValidationError
        Moment residuals exceed ``ctx.tail_tol``; usually ``jmax`` is too
        small for ``kmax`` (the dropped term ``t_{jmax+1} 4^((jmax+1) kmax)``
        must itself be below tolerance).
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    ctx.check_bits(kmax, 4)
    K = kmax + guard
    trace = fixed_point_boundary_data(ctx, K, fp_tol, beta=4)
    count = count or 2 * ctx.jmax + 2
    with mp.workprec(ctx.bits):
        t = taylor_coefficients(trace.u, count, ctx)
        four = mp.mpf(4)
        idx, a, b = [], [], []
        for j in range(-ctx.jmax, ctx.jmax + 1):
            idx.append(j)
            a.append(2 * t[0] if j == 0 else t[abs(j)])
            b.append(four**j)
        tail = []
        for n in range(ctx.jmax + 1, count):
            tail += [(-n, t[n], four ** (-n)), (n, t[n], four**n)]
    family = CoefficientFamily(
        kind="two-sided-dyadic",
        indices=tuple(idx),
        a=tuple(a),
        b=tuple(b),
        moment_range=(-kmax, kmax),
        delta=delta,
        tail=tuple(tail),
        meta={
            "bits": ctx.bits,
            "jmax": ctx.jmax,
            "tail_tol": ctx.tail_tol,
            "beta": 4,
            "K": K,
            "iterations": trace.iterations,
            "ratios": trace.ratios,
            "u": trace.u,
            "taylor": t,
        },
    )
    family, _ = _validate(family, (-kmax, kmax), ctx, validate)
    return family


def _guard_for(beta, kmax, tol):
    # dropped nodes enter with weight ~ beta**(-K(K-1)/2) times beta**(K*kmax)
    need = math.log2(1 / tol) + 16
    K = kmax + 8
    while math.log2(float(beta)) * (K * (K - 1) / 2 - K * kmax) < need:
        K += 1
    return K - kmax


def seeley_one_sided_coefficients(
    ctx: PrecisionContext,
    kmax: int,
    beta=2,
    *,
    delta: float = 0.5,
    guard: int | None = None,
    count: int | None = None,
    validate: bool = True,
) -> CoefficientFamily:
    """One-sided family ``b_j = beta**j`` (``j >= 0``) from ``u_k = (-1)^k``.

    Moments hold for ``0 <= k <= kmax`` only; negative ``k`` cannot be
    matched by any entire interpolant and are expected to fail.
    """
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    ctx.check_bits(kmax, float(beta))
    K = kmax + (guard if guard is not None else _guard_for(beta, kmax, ctx.tail_tol))
    u = BoundarySequence.seeley(K, beta)
    count = count or 2 * ctx.jmax + 2
    # dropped product factors perturb low Taylor coefficients by ~beta**-P
    P = math.ceil(math.log(1 / ctx.tail_tol) / math.log(float(beta))) + K + count + 16
    if P > ctx.product_terms:
        ctx = ctx.with_(product_terms=P)
    with mp.workprec(ctx.bits):
        t = taylor_coefficients(u, count, ctx)
        beta_m = _mpf(beta)
        idx = tuple(range(ctx.jmax + 1))
        a = tuple(t[j] for j in idx)
        b = tuple(beta_m**j for j in idx)
        tail = tuple((n, t[n], beta_m**n) for n in range(ctx.jmax + 1, count))
    family = CoefficientFamily(
        kind="one-sided-seeley",
        indices=idx,
        a=a,
        b=b,
        moment_range=(0, kmax),
        delta=delta,
        tail=tail,
        meta={"bits": ctx.bits, "jmax": ctx.jmax, "tail_tol": ctx.tail_tol, "beta": beta, "K": K},
    )
    family, _ = _validate(family, (0, kmax), ctx, validate)
    return family


def _vandermonde_closed(nodes, M1):
    out = []
    for j, bj in enumerate(nodes):
        v = (-bj) ** M1
        for k, bk in enumerate(nodes):
            if k != j:
                v *= (bk + 1) / (bk - bj)
        out.append(v)
    return out


def _vandermonde_solve(nodes, M1, M2):
    ks = range(-M1, M2 + 1)
    A = mp.matrix([[bj**k for bj in nodes] for k in ks])
    rhs = mp.matrix([(-1) ** k for k in ks])
    x = mp.lu_solve(A, rhs)
    return [x[i] for i in range(len(nodes))]


def _finite_family(kind, indices, nodes, M1, M2, ctx, method, meta):
    if len(nodes) != M1 + M2 + 1:
        raise ValueError(f"need exactly M1+M2+1 = {M1 + M2 + 1} nodes, got {len(nodes)}")
    if any(not x > 0 for x in nodes):
        raise ValueError("nodes must be positive")
    for i in range(len(nodes)):
        for k in range(i):
            if nodes[i] == nodes[k]:
                raise DuplicateNodeError(f"duplicate node {mp.nstr(nodes[i], 10)}")
    closed = _vandermonde_closed(nodes, M1)
    solved = _vandermonde_solve(nodes, M1, M2)
    scale = max([abs(x) for x in closed] + [mp.mpf(1)])
    gap = max(abs(x - y) for x, y in zip(closed, solved))
    if gap > ctx.tail_tol * scale:
        raise ConditioningError(
            f"closed form and linear solve differ by {mp.nstr(gap, 5)}; nodes ill-conditioned"
        )
    a = closed if method == "closed" else solved
    family = CoefficientFamily(
        kind=kind,
        indices=tuple(indices),
        a=tuple(a),
        b=tuple(nodes),
        moment_range=(-M1, M2),
        meta={"bits": ctx.bits, "jmax": max(abs(j) for j in indices), "tail_tol": ctx.tail_tol,
              "solve_gap": gap, **meta},
    )
    family, report = _validate(family, (-M1, M2), ctx, validate=False)
    if not report.passed:
        raise ConditioningError(
            f"moment residual {mp.nstr(report.max_residual, 5)} exceeds {ctx.tail_tol:g}"
        )
    return family


def vandermonde_coefficients(
    b_list: Sequence,
    M1: int,
    M2: int,
    ctx: PrecisionContext | None = None,
    method: str = "closed",
) -> CoefficientFamily:
    """Solve ``sum_j a_j b_j**k = (-1)**k`` for ``-M1 <= k <= M2``.

    ``b_list`` holds the nodes for indices ``-M1..M2`` in order.  The closed
    product formula ``a_j = (-b_j)^M1 prod_{k != j} (b_k + 1)/(b_k - b_j)`` is
    checked against a direct LU solve at working precision.
    """
    if M1 < 0 or M2 < 0:
        raise ValueError("M1 and M2 must be >= 0")
    ctx = ctx or PrecisionContext()
    with mp.workprec(ctx.bits):
        nodes = [_mpf(x) for x in b_list]
        return _finite_family(
            "finite-vandermonde", range(-M1, M2 + 1), nodes, M1, M2, ctx, method, {}
        )


def dyadic_finite_coefficients(
    m: int, r, ctx: PrecisionContext | None = None, method: str = "closed"
) -> CoefficientFamily:
    """The unique ``A^{m,r}`` on nodes ``r 2**-j`` (``j = 0..2m``), ``|k| <= m``.

    ``meta["max_abs"]`` records ``max_j |A_j|`` for growth checks in ``r``.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if not float(r) > 0:
        raise ValueError("r must be positive")
    ctx = ctx or PrecisionContext()
    with mp.workprec(ctx.bits):
        rr = _mpf(r)
        nodes = [rr * mp.mpf(2) ** (-j) for j in range(2 * m + 1)]
        fam = _finite_family(
            "finite-dyadic", range(2 * m + 1), nodes, m, m, ctx, method, {"m": m, "r": str(r)}
        )
        fam.meta["max_abs"] = max(abs(x) for x in fam.a)
        return fam


def family_constant(family: CoefficientFamily, k, p, delta: float | None = None) -> float:
    """``sum_j 2^(delta|j|) |a_j| (b_j^(-1/p) + b_j^(k - 1/p))`` in float.

    ``p = inf`` uses ``1/p = 0``.  ``k`` may be negative.
    """
    delta = family.delta if delta is None else delta
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    with mp.workprec(128):
        tot = mp.mpf(0)
        for j, a, b in family.entries():
            tot += mp.mpf(2) ** (delta * abs(j)) * abs(a) * (b ** (-inv_p) + b ** (k - inv_p))
        return float(tot)
