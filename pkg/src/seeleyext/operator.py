"""Applying reflection extensions, their adjoints, zero extension and dilation.

``E f(x', x_n) = sum_j a_j f(x', -b_j x_n)`` for ``x_n < 0`` and ``f`` itself
above the boundary.  Sums run over the stored entries of a
:class:`~seeleyext.coeffs.CoefficientFamily`; the dropped tail is certified
from the family's extra entries and the declared growth of ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .coeffs import CoefficientFamily, dyadic_finite_coefficients
from .exceptions import OutOfRangeError, TailCertificateError
from .functions import CallableFunction, GridFunction, Growth

POLICIES = ("error", "zero-pad", "decay-model")


@dataclass
class ExtensionPlan:
    """How to apply a family: precision, truncation target and grid options.

    Parameters
    ----------
    family : CoefficientFamily
    tail_target : float, optional
        Largest admissible certified tail per evaluation point.  Defaults to
        ``1e-12`` in double precision and the family tolerance otherwise.
    order : int
        Lagrange interpolation order used in grid mode (``1..8``).
    out_of_range : {"error", "zero-pad", "decay-model"}
        What grid mode does with ray points beyond the sampled range.
        ``decay-model`` evaluates ``tail_model(y)`` there, or extrapolates
        from the edge stencil when no model is supplied.
    precision : {"double", "extended"}
    bits : int, optional
        mpmath precision for ``extended``; defaults to the family's bits.
    """

    family: CoefficientFamily
    tail_target: float | None = None
    order: int = 4
    out_of_range: str = "zero-pad"
    precision: str = "double"
    bits: int | None = None
    tail_model: object = None
    strict: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 1 <= self.order <= 8:
            raise ValueError("interpolation order must be in 1..8")
        if self.out_of_range not in POLICIES:
            raise ValueError(f"out_of_range must be one of {POLICIES}")
        if self.precision not in ("double", "extended"):
            raise ValueError("precision must be 'double' or 'extended'")
        if self.bits is None:
            self.bits = int(self.family.meta.get("bits", 512))
        if self.tail_target is None:
            self.tail_target = 1e-12 if self.precision == "double" else float(
                self.family.meta.get("tail_tol", 1e-30)
            )
        if not self.tail_target > 0:
            raise ValueError("tail_target must be positive")

    @property
    def arrays(self):
        if "ab" not in self._cache:
            self._cache["ab"] = self.family.as_float()
        return self._cache["ab"]

    @property
    def tail_arrays(self):
        if "tail" not in self._cache:
            t = self.family.tail
            self._cache["tail"] = (
                np.array([float(abs(a)) for _, a, _ in t]),
                np.array([float(b) for _, _, b in t]),
            )
        return self._cache["tail"]


def _split(x):
    if isinstance(x, tuple):
        return x[:-1], x[-1]
    if isinstance(x, list):
        return tuple(x[:-1]), x[-1]
    return (), x


def tail_bound(plan: ExtensionPlan, growth: Growth, y, adjoint: bool = False):
    """Certified bound on the dropped terms at normal distance ``y >= 0``.

    Extension tail: ``sum |a_j| G(b_j y)``; adjoint tail:
    ``sum |a_j|/b_j G(y/b_j)`` over the family's certification entries.
    """
    ta, tb = plan.tail_arrays
    if ta.size == 0:
        return 0.0 * np.asarray(y, float)
    y = np.abs(np.asarray(y, float))[..., None]
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        if adjoint:
            t = ta / tb * growth.bound(y / tb)
        else:
            t = ta * growth.bound(tb * y)
        t = np.where(ta == 0, 0.0, t)
    return np.sum(t, axis=-1)


def _certify(plan, growth, y, adjoint=False):
    tb = tail_bound(plan, growth, y, adjoint)
    worst = float(np.max(tb)) if np.size(tb) else 0.0
    if plan.strict and not worst <= plan.tail_target:
        raise TailCertificateError(
            f"tail bound {worst:.3g} exceeds target {plan.tail_target:.3g} for growth {growth.kind}"
        )
    return tb


def _reflect_sum(plan, f, xprime, xn, scale_fn, weight_fn):
    """``sum_j w_j f(x', s_j * xn)`` in double precision over broadcast points."""
    a, b = plan.arrays
    total = 0.0
    for aj, bj in zip(a, b):
        w = weight_fn(aj, bj)
        if w == 0.0:
            continue
        total = total + w * f(*xprime, scale_fn(bj) * xn)
    return total


def _reflect_sum_mp(plan, f, xprime, xn, scale_fn, weight_fn):
    terms = []
    for aj, bj in zip(plan.family.a, plan.family.b):
        w = weight_fn(aj, bj)
        if w == 0:
            continue
        terms.append(w * f(*xprime, scale_fn(bj) * xn))
    return mp.fsum(terms)


def extend_callable(plan: ExtensionPlan, f: CallableFunction, x, return_tail: bool = False):
    """Evaluate ``E f`` at ``x`` (scalar ``x_n`` or a tuple ``(x', x_n)``).

    Double precision accepts numpy arrays for the coordinates; extended
    precision evaluates a single point with mpmath at ``plan.bits``.
    For ``x_n >= 0`` the value is ``f(x)`` itself.

    Raises
    ------
    TailCertificateError
        The certified tail exceeds ``plan.tail_target`` (``plan.strict``).
    """
    xprime, xn = _split(x)
    if plan.precision == "extended":
        with mp.workprec(plan.bits):
            xn = mp.mpf(xn)
            xprime = tuple(mp.mpf(c) for c in xprime)
            if xn >= 0:
                val, tb = f(*xprime, xn), 0.0
            else:
                tb = float(_certify(plan, f.growth, float(xn)))
                val = _reflect_sum_mp(plan, f, xprime, xn, lambda b: -b, lambda a, b: a)
            return (val, tb) if return_tail else val

    coords = np.broadcast_arrays(*[np.asarray(c, float) for c in xprime], np.asarray(xn, float))
    xprime, xn = coords[:-1], coords[-1]
    out = np.empty(xn.shape)
    pos = xn >= 0
    neg = ~pos
    if np.any(pos):
        out[pos] = f(*[c[pos] for c in xprime], xn[pos])
    tb = np.zeros(xn.shape)
    if np.any(neg):
        tb[neg] = _certify(plan, f.growth, xn[neg])
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            out[neg] = _reflect_sum(
                plan, f, [c[neg] for c in xprime], xn[neg], lambda b: -b, lambda a, b: a
            )
    if out.ndim == 0:
        out, tb = float(out), float(tb)
    return (out, tb) if return_tail else out


def adjoint_apply(plan: ExtensionPlan, g: CallableFunction, x, return_tail: bool = False):
    """``E* g(x) = g(x) - sum_j a_j/(-b_j) g(x', -x_n/b_j)`` for ``x_n > 0``."""
    xprime, xn = _split(x)
    weight = lambda a, b: a / b  # noqa: E731  (-a/(-b))
    scale = lambda b: -1 / b  # noqa: E731
    if plan.precision == "extended":
        with mp.workprec(plan.bits):
            xn = mp.mpf(xn)
            if not xn > 0:
                raise ValueError("the adjoint is evaluated on x_n > 0")
            xprime = tuple(mp.mpf(c) for c in xprime)
            tb = float(_certify(plan, g.growth, float(xn), adjoint=True))
            val = g(*xprime, xn) + _reflect_sum_mp(plan, g, xprime, xn, scale, weight)
            return (val, tb) if return_tail else val
    coords = np.broadcast_arrays(*[np.asarray(c, float) for c in xprime], np.asarray(xn, float))
    xprime, xn = coords[:-1], coords[-1]
    if np.any(xn <= 0):
        raise ValueError("the adjoint is evaluated on x_n > 0")
    tb = _certify(plan, g.growth, xn, adjoint=True)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        out = g(*xprime, xn) + _reflect_sum(plan, g, list(xprime), xn, scale, weight)
    out = np.asarray(out, float)
    if out.ndim == 0:
        out, tb = float(out), float(tb)
    return (out, tb) if return_tail else out


def extension_function(plan: ExtensionPlan, f: CallableFunction) -> CallableFunction:
    """``E f`` wrapped as a full-space callable with analytic normal derivatives.

    Derivatives use ``d^m E f = E^{a(-b)^m, b} d^m f`` (valid off the boundary).
    """

    def ev(*x):
        return extend_callable(plan, f, tuple(x) if len(x) > 1 else x[0])

    dn = None
    if f.has_derivatives:

        def dn(m, *x):
            sub = ExtensionPlan(
                commuted_family(plan.family, m, check=False),
                plan.tail_target,
                plan.order,
                plan.out_of_range,
                plan.precision,
                plan.bits,
                strict=False,
            )
            return extend_callable(sub, f.derivative(m), tuple(x) if len(x) > 1 else x[0])

    return CallableFunction(ev, f.dim, "full", dn, f.growth, f"E[{f.name}]")


def adjoint_function(plan: ExtensionPlan, g: CallableFunction) -> CallableFunction:
    """``E* g`` as a half-space callable; ``d^m E* g = E*_{(-b)^-m} d^m g``."""

    def ev(*x):
        return adjoint_apply(plan, g, tuple(x) if len(x) > 1 else x[0])

    dn = None
    if g.has_derivatives:

        def dn(m, *x):
            fam = plan.family
            with mp.workprec(plan.bits):
                fam = fam.with_(a=tuple(a * (-1 / b) ** m for a, b in zip(fam.a, fam.b)),
                                tail=tuple((j, a * (1 / b) ** m, b) for j, a, b in fam.tail))
            sub = ExtensionPlan(fam, plan.tail_target, plan.order, plan.out_of_range,
                                plan.precision, plan.bits, strict=False)
            # d^m [g(-x/b)] = (-1/b)^m g^(m)(-x/b); the identity term keeps g^(m)
            return adjoint_apply(sub, g.derivative(m), tuple(x) if len(x) > 1 else x[0])

    return CallableFunction(ev, g.dim, "half", dn, g.growth, f"E*[{g.name}]")


# --------------------------------------------------------------------------
# Grid mode
# --------------------------------------------------------------------------


def _lagrange_weights(s, start, npts):
    """Weights for nodes ``start..start+npts-1`` at fractional index ``s``."""
    t = s[:, None] - (start[:, None] + np.arange(npts)[None, :])
    w = np.ones((s.size, npts))
    for i in range(npts):
        for k in range(npts):
            if k != i:
                w[:, i] *= t[:, k] / (k - i)
    return w


def interpolate_normal(values, s, order, policy="zero-pad", tail_model=None, h=1.0):
    """Interpolate ``values[..., :]`` at fractional normal indices ``s``.

    Returns ``(interp, err)`` where ``err`` estimates the stencil error by
    comparing with the interpolant one order lower.  Indices beyond the
    last node follow ``policy``.
    """
    values = np.asarray(values, float)
    N = values.shape[-1]
    s = np.asarray(s, float).ravel()
    npts = min(order + 1, N)
    out = np.zeros(values.shape[:-1] + (s.size,))
    err = np.zeros(s.size)
    inside = s <= N - 1 + 1e-9
    if np.any(~inside):
        if policy == "error":
            raise OutOfRangeError(
                f"ray point x_n={s[~inside].max() * h:.4g} beyond sampled range {(N - 1) * h:.4g}"
            )
        if policy == "decay-model":
            if tail_model is not None:
                out[..., ~inside] = np.asarray(tail_model(s[~inside] * h), float)
            else:
                start = np.full(np.sum(~inside), N - npts)
                w = _lagrange_weights(s[~inside], start, npts)
                idx = start[:, None] + np.arange(npts)[None, :]
                out[..., ~inside] = np.sum(values[..., idx] * w, axis=-1)
    si = s[inside]
    if si.size:
        start = np.clip(np.rint(si).astype(int) - npts // 2, 0, N - npts)
        w = _lagrange_weights(si, start, npts)
        idx = start[:, None] + np.arange(npts)[None, :]
        vals = values[..., idx]
        out[..., inside] = np.sum(vals * w, axis=-1)
        if npts > 1:
            # lower-order stencil: drop the node farthest from s
            far = np.abs(si[:, None] - idx).argmax(axis=1)
            keep = np.ones_like(idx, dtype=bool)
            keep[np.arange(si.size), far] = False
            idx2 = idx[keep].reshape(si.size, npts - 1)
            w2 = np.ones((si.size, npts - 1))
            for i in range(npts - 1):
                for k in range(npts - 1):
                    if k != i:
                        w2[:, i] *= (si - idx2[:, k]) / (idx2[:, i] - idx2[:, k])
            low = np.sum(values[..., idx2] * w2, axis=-1)
            diff = np.abs(out[..., inside] - low)
            err[inside] = diff.reshape(-1, si.size).max(axis=0)
    return out, err


def extend_grid(plan: ExtensionPlan, f: GridFunction, n_negative: int | None = None) -> GridFunction:
    """Extend half-grid samples to ``x_n = -n_negative*h .. (N-1)*h``.

    Nonnegative nodes (including the boundary node) are copied; each
    negative node gets the reflection sum with ray values read by centered
    Lagrange interpolation.  ``result.meta["report"]`` records the largest
    interpolation error estimate, weighted by ``|a_j|``, and the number of
    ray points that left the sampled range.
    """
    if not f.half:
        raise ValueError("extend_grid expects a half grid")
    N = f.values.shape[-1]
    M = N - 1 if n_negative is None else int(n_negative)
    a, b = plan.arrays
    m = np.arange(1, M + 1)
    # fractional indices of reflected points b_j * m * h, shape (J, M)
    s = b[:, None] * m[None, :]
    interp, err = interpolate_normal(
        f.values, s.ravel(), plan.order, plan.out_of_range, plan.tail_model, f.hn
    )
    interp = interp.reshape(f.values.shape[:-1] + s.shape)
    neg = np.tensordot(interp, a, axes=([-2], [0]))  # (..., M)
    err = (np.abs(a)[:, None] * err.reshape(s.shape)).sum(axis=0)
    values = np.concatenate([neg[..., ::-1], f.values], axis=-1)
    origin = f.origin[:-1] + (-M * f.hn,)
    out = GridFunction(values, f.h, origin, half=False)
    out.meta["report"] = {
        "max_stencil_error": float(err.max()) if err.size else 0.0,
        "out_of_range_points": int(np.sum(s > N - 1 + 1e-9)),
        "order": plan.order,
        "policy": plan.out_of_range,
    }
    return out


# --------------------------------------------------------------------------
# Zero extension, dilation, finite operators, commuted families
# --------------------------------------------------------------------------


def zero_extend(f, n_negative: int | None = None):
    """``S f``: ``f`` on ``x_n >= 0`` and ``0`` below (boundary keeps ``f``)."""
    if isinstance(f, GridFunction):
        if not f.half:
            raise ValueError("zero_extend expects a half grid")
        M = f.values.shape[-1] - 1 if n_negative is None else int(n_negative)
        pad = np.zeros(f.values.shape[:-1] + (M,))
        return GridFunction(
            np.concatenate([pad, f.values], axis=-1), f.h, f.origin[:-1] + (-M * f.hn,), half=False
        )

    def ev(*x):
        xn = x[-1]
        if isinstance(xn, (mp.mpf, float, int)):
            return f(*x) if xn >= 0 else 0 * xn
        xn = np.asarray(xn, float)
        out = np.zeros(np.broadcast(*x).shape)
        pos = np.broadcast_to(xn >= 0, out.shape)
        coords = [np.broadcast_to(np.asarray(c, float), out.shape)[pos] for c in x]
        if np.any(pos):
            out[pos] = f(*coords)
        return out

    return CallableFunction(ev, f.dim, "full", None, f.growth, f"S[{f.name}]")


def dilate(r, f):
    """``theta^r f(x', x_n) = f(x', r x_n)``.

    Callables are reparametrized exactly (derivative handles pick up
    ``r**m``); grids are resampled by interpolation with zero padding.
    Negative ``r`` requires a full-space function.
    """
    if r == 0:
        raise ValueError("dilation factor must be nonzero")
    if isinstance(f, GridFunction):
        if f.half and r < 0:
            raise ValueError("negative dilation of a half grid; zero-extend first")
        if f.half:
            s = r * np.arange(f.values.shape[-1])
            vals, _ = interpolate_normal(f.values, s, 4, "zero-pad", h=f.hn)
            return GridFunction(vals, f.h, f.origin, True)
        xn = f.xn
        s = (r * xn - f.origin[-1]) / f.hn
        inside = (s >= 0) & (s <= f.values.shape[-1] - 1)
        vals = np.zeros(f.values.shape)
        if np.any(inside):
            got, _ = interpolate_normal(f.values, s[inside], 4, "zero-pad", h=f.hn)
            vals[..., inside] = got
        return GridFunction(vals, f.h, f.origin, False)
    if f.support == "half" and r < 0:
        raise ValueError("negative dilation of a half-space function; zero-extend first")

    def ev(*x):
        return f(*x[:-1], r * x[-1])

    dn = None
    if f.dn is not None:

        def dn(m, *x):
            return r**m * f.dn(m, *x[:-1], r * x[-1])

    g = f.growth
    if g.kind == "poly":
        g = Growth("poly", g.scale * max(1.0, abs(r)) ** abs(g.degree), g.degree, g.rate)
    elif g.kind == "exp-decay" and r > 0:
        g = Growth("exp-decay", g.scale, g.degree, g.rate * r)
    return CallableFunction(ev, f.dim, f.support, dn, g, f"theta^{r}[{f.name}]")


def finite_plan(m: int, r, precision: str = "extended", bits: int = 256) -> ExtensionPlan:
    from .precision import PrecisionContext

    fam = dyadic_finite_coefficients(m, r, PrecisionContext(bits=bits, tail_tol=1e-40))
    return ExtensionPlan(fam, precision=precision, bits=bits)


def finite_extend(m: int, r, f: CallableFunction, x, precision: str = "extended"):
    """``E^{m,r} f(x) = sum_{j=0}^{2m} A_j f(x', -r 2^-j x_n)`` for ``x_n < 0``."""
    xprime, xn = _split(x)
    if xn == 0:
        raise ValueError("finite_extend needs x_n != 0")
    return extend_callable(finite_plan(m, r, precision), f, x)


def commuted_family(family: CoefficientFamily, gamma_n: int, invert: bool = False,
                    check: bool = True) -> CoefficientFamily:
    """``(a (-b)^gamma, b)`` or, with ``invert``, ``(a (-b)^gamma, 1/b)``.

    The validated moment window moves with the shift; ``check`` raises if
    the result no longer contains ``k = 0`` (so would not extend at all).
    """
    lo, hi = family.moment_range
    if invert:
        new_range = (gamma_n - hi, gamma_n - lo)
    else:
        new_range = (lo - gamma_n, hi - gamma_n)
    if check and not new_range[0] <= 0 <= new_range[1]:
        raise ValueError(
            f"shift {gamma_n} leaves the validated window {family.moment_range}"
        )
    bits = int(family.meta.get("bits", 512))
    with mp.workprec(bits):
        a = tuple(aj * (-bj) ** gamma_n for aj, bj in zip(family.a, family.b))
        b = tuple(1 / bj for bj in family.b) if invert else family.b
        tail = tuple(
            (j, aj * (-bj) ** gamma_n, (1 / bj if invert else bj)) for j, aj, bj in family.tail
        )
        idx = tuple(-j for j in family.indices) if invert and family.kind == "two-sided-dyadic" else family.indices
        tail = tuple((-j, aj, bj) for j, aj, bj in tail) if invert and family.kind == "two-sided-dyadic" else tail
    meta = dict(family.meta)
    meta["derived"] = {"gamma_n": gamma_n, "invert": invert, "from": family.id}
    return CoefficientFamily(family.kind, idx, a, b, new_range, family.delta, (), tail, meta)


def triangle_constant(q: float, delta: float) -> float:
    """Constant ``K_{q,delta}`` of the weighted q-triangle inequality.

    ``((2^(d/(1-q)) + 1) / (2^(d/(1-q)) - 1))^(1/q - 1)`` for ``q < 1``, else 1.
    """
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if q == 1:
        return 1.0
    t = 2.0 ** (delta / (1 - q))
    return ((t + 1) / (t - 1)) ** (1 / q - 1)
