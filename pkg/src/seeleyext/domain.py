"""Extension from bounded planar domains through a tubular chart.

The boundary is a closed curve ``gamma(theta) = sum_n c_n exp(i n theta)``
(points are complex numbers internally, ``(x, y)`` pairs at the API).  The
chart is ``Psi^-1(theta, t) = gamma(theta) - t * t_max * nu(theta)`` with
``nu`` the outward normal, so ``t > 0`` inside.  Outside the domain

    Ef(x) = chi1(t) * sum_j a_j chi0(-b_j t) f(Psi^-1(theta, -b_j t))

and ``Ef = f`` inside.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .coeffs import CoefficientFamily
from .exceptions import DomainError, TubularInverseError
from .operator import ExtensionPlan

SAMPLES = 1024


def _pts(x):
    """Accept ``(x, y)``, ``[(x, y), ...]`` or complex arrays; return complex array."""
    a = np.asarray(x)
    if np.iscomplexobj(a):
        return a.astype(complex)
    a = np.asarray(a, float)
    if a.shape[-1] != 2:
        raise ValueError("points need two coordinates")
    return a[..., 0] + 1j * a[..., 1]


def _xy(z):
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1)


# --------------------------------------------------------------------------
# Domain
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanarDomain:
    """Closed curve from complex Fourier coefficients ``{n: c_n}``.

    ``orientation = +1`` means counterclockwise (interior on the left).
    Construction checks ``|gamma'| > 0`` and simplicity on ``samples``
    nodes and that ``t_max`` is below the estimated reach.
    """

    coefficients: dict
    t_max: float = 0.3
    orientation: int = 1
    samples: int = SAMPLES
    name: str = ""
    reach: float = field(init=False, default=math.nan)

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise DomainError("orientation must be +1 or -1")
        if self.samples < SAMPLES:
            raise DomainError(f"need at least {SAMPLES} samples")
        if not self.t_max > 0:
            raise DomainError("t_max must be positive")
        coeffs = {int(n): complex(c) for n, c in self.coefficients.items()}
        object.__setattr__(self, "coefficients", coeffs)
        th = np.linspace(0, 2 * np.pi, self.samples, endpoint=False)
        speed = np.abs(self.d1(th))
        if speed.min() <= 1e-12:
            raise DomainError("curve has a vanishing tangent")
        g = self.gamma(th)
        if _self_intersects(g):
            raise DomainError("curve is not simple")
        area = 0.5 * np.sum((g.conj() * np.roll(g, -1)).imag)
        if np.sign(area) != self.orientation:
            raise DomainError("orientation flag disagrees with the curve's winding")
        reach = _reach(self, th)
        object.__setattr__(self, "reach", reach)
        if not self.t_max < reach:
            raise DomainError(f"t_max={self.t_max} is not below the reach estimate {reach:.4g}")

    def gamma(self, th):
        th = np.asarray(th, float)
        return sum(c * np.exp(1j * n * th) for n, c in self.coefficients.items())

    def d1(self, th):
        th = np.asarray(th, float)
        return sum(1j * n * c * np.exp(1j * n * th) for n, c in self.coefficients.items())

    def d2(self, th):
        th = np.asarray(th, float)
        return sum(-n * n * c * np.exp(1j * n * th) for n, c in self.coefficients.items())

    def normal(self, th):
        """Outward unit normal."""
        T = self.d1(th)
        T = T / np.abs(T)
        return -1j * T * self.orientation

    def contains(self, x) -> np.ndarray:
        """Winding-number test against a dense polygon (interior only)."""
        z = _pts(x)
        th = np.linspace(0, 2 * np.pi, 4 * self.samples, endpoint=False)
        g = self.gamma(th)
        flat = z.reshape(-1)
        wind = np.empty(flat.shape)
        for i in range(0, flat.size, 256):
            d = g[None, :] - flat[i : i + 256, None]
            ang = np.angle(np.roll(d, -1, axis=1) / d)
            wind[i : i + 256] = ang.sum(axis=1) / (2 * np.pi)
        return (np.abs(wind) > 0.5).reshape(z.shape)

    def to_dict(self):
        return {
            "fourier-coefficients": [[n, c.real, c.imag] for n, c in sorted(self.coefficients.items())],
            "t_max": self.t_max,
            "orientation": self.orientation,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, d):
        coeffs = {int(n): complex(re, im) for n, re, im in d["fourier-coefficients"]}
        return cls(coeffs, float(d.get("t_max", 0.3)), int(d.get("orientation", 1)), name=d.get("name", ""))

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _self_intersects(g) -> bool:
    a = g
    b = np.roll(g, -1)
    n = g.size
    ax, ay, bx, by = a.real, a.imag, b.real, b.imag

    def orient(px, py, qx, qy, rx, ry):
        return np.sign((qx - px) * (ry - py) - (qy - py) * (rx - px))

    for i in range(n):
        j = np.arange(i + 2, n)
        if i == 0:
            j = j[j != n - 1]
        if j.size == 0:
            continue
        o1 = orient(ax[i], ay[i], bx[i], by[i], ax[j], ay[j])
        o2 = orient(ax[i], ay[i], bx[i], by[i], bx[j], by[j])
        o3 = orient(ax[j], ay[j], bx[j], by[j], ax[i], ay[i])
        o4 = orient(ax[j], ay[j], bx[j], by[j], bx[i], by[i])
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return True
    return False


def _reach(dom: PlanarDomain, th) -> float:
    d1 = dom.d1(th)
    d2 = dom.d2(th)
    cross = np.abs((d1.conj() * d2).imag)
    with np.errstate(divide="ignore"):
        rho = np.abs(d1) ** 3 / cross
    rho_min = float(rho.min())
    g = dom.gamma(th)
    # arc length between samples; pairs further apart than pi*rho_min are "far"
    ds = np.abs(d1) * (2 * np.pi / th.size)
    s = np.concatenate([[0.0], np.cumsum(ds)[:-1]])
    total = float(ds.sum())
    arc = np.abs(s[:, None] - s[None, :])
    arc = np.minimum(arc, total - arc)
    dist = np.abs(g[:, None] - g[None, :])
    far = arc > math.pi * rho_min
    half_gap = 0.5 * float(dist[far].min()) if np.any(far) else math.inf
    return min(rho_min, half_gap)


def disk(t_max: float = 0.3) -> PlanarDomain:
    return PlanarDomain({1: 1.0}, t_max, name="disk")


def ellipse(a: float = 1.3, b: float = 0.8, t_max: float = 0.3) -> PlanarDomain:
    """``(a cos, b sin)`` written as ``(a+b)/2 e^{i th} + (a-b)/2 e^{-i th}``."""
    return PlanarDomain({1: (a + b) / 2, -1: (a - b) / 2}, t_max, name="ellipse")


def star(amp: float = 0.15, t_max: float = 0.3) -> PlanarDomain:
    """``r(th) = 1 + amp cos(3 th)`` in polar form."""
    return PlanarDomain({1: 1.0, 4: amp / 2, -2: amp / 2}, t_max, name="star")


SHAPES = {"disk": disk, "ellipse": ellipse, "star": star}


# --------------------------------------------------------------------------
# Chart
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TubularChart:
    """Normal-distance chart on the ``t_max`` collar of the boundary."""

    domain: PlanarDomain
    tol: float = 1e-13
    max_iter: int = 50

    def forward(self, theta, t):
        theta = np.asarray(theta, float)
        t = np.asarray(t, float)
        if np.any(np.abs(t) >= 1):
            raise ValueError("chart coordinate t must satisfy |t| < 1")
        return _xy(self._forward(theta, t))

    def _forward(self, theta, t):
        d = self.domain
        return d.gamma(theta) - t * d.t_max * d.normal(theta)

    def inverse(self, x, strict: bool = True):
        """``(theta, t)`` by damped Newton projection onto the curve.

        With ``strict`` a point outside the open collar raises
        :class:`TubularInverseError`; otherwise ``t`` is returned as is
        (``|t| >= 1`` marks points beyond the tube).
        """
        z = _pts(x)
        flat = z.reshape(-1)
        d = self.domain
        th0 = np.linspace(0, 2 * np.pi, 2 * d.samples, endpoint=False)
        g0 = d.gamma(th0)
        theta = np.empty(flat.shape)
        for i in range(0, flat.size, 512):
            chunk = flat[i : i + 512]
            theta[i : i + 512] = th0[np.abs(g0[None, :] - chunk[:, None]).argmin(axis=1)]
        for _ in range(self.max_iter):
            r = d.gamma(theta) - flat
            g1 = d.d1(theta)
            g2 = d.d2(theta)
            phi = (r.conj() * g1).real
            dphi = np.abs(g1) ** 2 + (r.conj() * g2).real
            step = np.where(dphi > 0, phi / np.where(dphi > 0, dphi, 1), 0.0)
            lim = 0.25
            step = np.clip(step, -lim, lim)
            theta = theta - step
            if np.max(np.abs(step)) < self.tol:
                break
        else:
            raise TubularInverseError("Newton projection did not converge")
        theta = np.mod(theta, 2 * np.pi)
        signed = ((flat - d.gamma(theta)).conj() * d.normal(theta)).real
        t = -signed / d.t_max
        if strict and np.any(np.abs(t) >= 1):
            raise TubularInverseError("point lies outside the tubular neighborhood")
        return theta.reshape(z.shape), t.reshape(z.shape)


# --------------------------------------------------------------------------
# Cutoffs
# --------------------------------------------------------------------------


def _step(u):
    u = np.asarray(u, float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        e0 = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1)), 0.0)
        e1 = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1 - u, 1)), 0.0)
    return e0 / (e0 + e1)


@dataclass(frozen=True)
class CutoffProfile:
    """Even smooth plateaus ``chi_i(t) = 1 - step((|t| - p_i)/(s_i - p_i))``.

    ``chi0``: 1 on ``|t| <= 1/2``, zero for ``|t| >= s0``; ``chi1`` is 1 on
    the support of ``chi0``; ``chi2`` (the vector-field cutoff) is 1 on the
    support of ``chi1``.  All supports lie inside ``(-1, 1)``.
    """

    plateau0: float = 0.5
    support0: float = 0.7
    support1: float = 0.9
    support2: float = 0.98

    def __post_init__(self):
        if not 0 < self.plateau0 < self.support0 < self.support1 < self.support2 < 1:
            raise ValueError("need 0 < plateau0 < support0 < support1 < support2 < 1")

    @staticmethod
    def _bump(t, plateau, support):
        return 1.0 - _step((np.abs(np.asarray(t, float)) - plateau) / (support - plateau))

    def chi0(self, t):
        return self._bump(t, self.plateau0, self.support0)

    def chi1(self, t):
        return self._bump(t, self.support0, self.support1)

    def chi2(self, t):
        return self._bump(t, self.support1, self.support2)


# --------------------------------------------------------------------------
# Extension
# --------------------------------------------------------------------------


@dataclass
class DomainExtensionHandle:
    domain: PlanarDomain
    family: CoefficientFamily
    cutoffs: CutoffProfile = field(default_factory=CutoffProfile)
    chart: TubularChart | None = None
    plan: ExtensionPlan | None = None

    def __post_init__(self):
        if self.chart is None:
            self.chart = TubularChart(self.domain)
        if self.plan is None:
            self.plan = ExtensionPlan(self.family)

    def locate(self, x):
        """``(inside, theta, t, in_tube)`` for points ``x``."""
        z = _pts(x)
        theta, t = self.chart.inverse(z, strict=False)
        in_tube = np.abs(t) < 1
        inside = np.where(in_tube, t > 0, self.domain.contains(z))
        return inside, theta, t, in_tube


def extend_on_domain(handle: DomainExtensionHandle, f, x, return_tail: bool = False):
    """Evaluate the domain extension of ``f(x, y)`` at points ``x``.

    Interior points return ``f`` itself; exterior points in the collar use
    the cutoff reflection sum along the normal ray; everything further out
    is 0.  ``f`` must accept numpy arrays.
    """
    z = _pts(x)
    flat = z.reshape(-1)
    inside, theta, t, tube = handle.locate(flat)
    out = np.zeros(flat.shape)
    tail = np.zeros(flat.shape)
    if np.any(inside):
        zi = flat[inside]
        out[inside] = np.asarray(f(zi.real, zi.imag), float) * np.ones(zi.shape)
    ext = ~inside & tube
    if np.any(ext):
        th = theta[ext]
        tt = t[ext]
        a, b = handle.plan.arrays
        cut = handle.cutoffs
        dom = handle.domain
        nu = dom.normal(th)
        base = dom.gamma(th)
        acc = np.zeros(th.shape)
        for aj, bj in zip(a, b):
            s = -bj * tt
            w = cut.chi0(s)
            live = w > 0
            if not np.any(live):
                continue
            p = base[live] - s[live] * dom.t_max * nu[live]
            acc[live] += aj * w[live] * np.asarray(f(p.real, p.imag), float)
        out[ext] = cut.chi1(tt) * acc
        ta, _ = handle.plan.tail_arrays
        bound = handle.plan.tail_target if ta.size == 0 else float(ta.sum())
        tail[ext] = bound * _sup_estimate(f, handle)
    out = out.reshape(z.shape)
    return (out, tail.reshape(z.shape)) if return_tail else out


def _sup_estimate(f, handle):
    th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    ts = np.linspace(0, 0.7, 8)
    pts = (handle.domain.gamma(th)[:, None] - ts[None, :] * handle.domain.t_max * handle.domain.normal(th)[:, None])
    return float(np.abs(np.asarray(f(pts.real, pts.imag), float)).max()) + 1.0


def dependence_vector_field(handle: DomainExtensionHandle, x):
    """``X = chi2(t) * dPsi^-1/dt``: the normal-line field, zero off the collar."""
    z = _pts(x)
    theta, t = handle.chart.inverse(z, strict=False)
    tube = np.abs(t) < 1
    w = np.where(tube, handle.cutoffs.chi2(np.where(tube, t, 0.0)), 0.0)
    v = -handle.domain.t_max * handle.domain.normal(theta) * w
    return _xy(v)


def integral_curve(handle: DomainExtensionHandle, x, ts):
    """Points of the integral curve of X through ``x``: fixed ``theta``, varying ``t``."""
    theta, _ = handle.chart.inverse(_pts(x), strict=True)
    return handle.chart.forward(np.full(len(ts), float(theta)), np.asarray(ts, float))


@dataclass(frozen=True)
class Bump:
    """``amp * exp(1 - 1/(1 - |x-c|^2/r^2))`` inside the disk ``|x - c| < r``."""

    center: tuple
    radius: float
    amp: float = 1.0

    def __call__(self, x, y):
        c = complex(*self.center)
        rr = np.abs((np.asarray(x) + 1j * np.asarray(y)) - c) ** 2 / self.radius**2
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            v = np.where(rr < 1, np.exp(1 - 1 / np.where(rr < 1, 1 - rr, 1)), 0.0)
        return self.amp * v


def _segment_distance(p, a, b):
    ab = b - a
    s = np.clip(((p - a).conj() * ab).real / abs(ab) ** 2, 0, 1)
    return abs(p - (a + s * ab))


def curve_dependence_check(handle: DomainExtensionHandle, f, x, bump: Bump, margin: float = 0.02,
                           require_disjoint: bool = True, tol: float = 1e-12):
    """Compare ``E(f + bump)(x)`` with ``E f(x)`` for an exterior point ``x``.

    The bump must lie in the domain and avoid the normal trace
    ``{Psi^-1(theta(x), t): 0 < t < 1}`` by ``margin``; pass
    ``require_disjoint=False`` for control cases that touch the trace.
    """
    z = complex(*np.asarray(x, float))
    theta, t = handle.chart.inverse(np.array([z]), strict=True)
    if t[0] >= 0:
        raise ValueError("curve-dependence checks need an exterior point")
    dom = handle.domain
    th = float(theta[0])
    # the trace is nearly straight; sample it as a polyline
    ts = np.linspace(0, 0.999, 200)
    trace = dom.gamma(th) - ts * dom.t_max * dom.normal(th)
    c = complex(*bump.center)
    gap = min(_segment_distance(c, trace[i], trace[i + 1]) for i in range(ts.size - 1)) - bump.radius
    ring = c + bump.radius * np.exp(1j * np.linspace(0, 2 * np.pi, 256, endpoint=False))
    contained = bool(np.all(dom.contains(ring))) and bool(dom.contains(np.array([c]))[0])
    disjoint = gap > margin
    if require_disjoint and not (disjoint and contained):
        raise ValueError(
            f"bump violates the precondition (gap to trace {gap:.3g}, contained={contained})"
        )

    def g(u, v):
        return f(u, v) + bump(u, v)

    e0 = float(extend_on_domain(handle, f, np.array([z]))[0])
    e1 = float(extend_on_domain(handle, g, np.array([z]))[0])
    diff = abs(e1 - e0)
    return {
        "x": [z.real, z.imag],
        "theta": th,
        "t": float(t[0]),
        "bump": {"center": list(bump.center), "radius": bump.radius, "amp": bump.amp},
        "gap": gap,
        "disjoint": bool(disjoint and contained),
        "difference": diff,
        "pass": bool(diff <= tol) if disjoint and contained else None,
    }


def dependence_suite(handle: DomainExtensionHandle, f, cases: int = 20, seed: int = 7, margin: float = 0.02):
    """Seeded disjoint-bump cases: random exterior collar points, bumps off their traces."""
    rng = np.random.default_rng(seed)
    dom = handle.domain
    out = []
    while len(out) < cases:
        th = rng.uniform(0, 2 * np.pi)
        t = -rng.uniform(0.05, 0.9)
        x = complex(*handle.chart.forward(th, t))
        th_b = th + rng.uniform(0.6, 2 * np.pi - 0.6)
        depth = rng.uniform(0.3, 0.9)
        c = complex(*handle.chart.forward(th_b, depth)) if depth < 1 else 0j
        radius = rng.uniform(0.03, 0.12)
        try:
            out.append(curve_dependence_check(handle, f, (x.real, x.imag), Bump((c.real, c.imag), radius), margin))
        except ValueError:
            continue
    return out


def control_case(handle: DomainExtensionHandle, f, theta: float = 0.0, t: float = -1 / 3, radius: float = 0.25):
    """Bump centered on the first reflected point of ``Psi^-1(theta, t)``."""
    x = handle.chart.forward(theta, t)
    c = handle.chart.forward(theta, -t * 1.0)
    return curve_dependence_check(handle, f, tuple(x), Bump(tuple(c), radius), require_disjoint=False)


def field_grid(handle: DomainExtensionHandle, f, h: float = 0.02, pad: float | None = None):
    """Extension on a bounding-box grid: ``(xs, ys, values, mask)``.

    ``mask`` is 1 inside, 2 in the exterior collar, 0 beyond.
    """
    dom = handle.domain
    pad = dom.t_max * 1.5 if pad is None else pad
    g = dom.gamma(np.linspace(0, 2 * np.pi, dom.samples, endpoint=False))
    xs = np.arange(g.real.min() - pad, g.real.max() + pad + h / 2, h)
    ys = np.arange(g.imag.min() - pad, g.imag.max() + pad + h / 2, h)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = X + 1j * Y
    inside, _, t, tube = handle.locate(Z.reshape(-1))
    vals = extend_on_domain(handle, f, Z.reshape(-1))
    mask = np.where(inside, 1, np.where(tube, 2, 0))
    return xs, ys, vals.reshape(X.shape), mask.reshape(X.shape)


def write_field_csv(path, xs, ys, values, mask):
    hx = float(xs[1] - xs[0]) if xs.size > 1 else 1.0
    hy = float(ys[1] - ys[0]) if ys.size > 1 else 1.0
    lines = [
        f"# dim=2, h={hx!r};{hy!r}, origin={float(xs[0])!r};{float(ys[0])!r}, shape={xs.size};{ys.size}, full",
        "x,y,value,mask",
    ]
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            lines.append(f"{float(x)!r},{float(y)!r},{float(values[i, j])!r},{int(mask[i, j])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def interior_check(handle: DomainExtensionHandle, f, n: int = 100, seed: int = 0):
    """Max ``|Ef - f|`` over ``n`` seeded interior points (0 when ``Ef = f`` there)."""
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi, n)
    t = rng.uniform(0.05, 0.95, n)
    z = handle.domain.gamma(th) - t * handle.domain.t_max * handle.domain.normal(th)
    z = np.concatenate([z, 0.2 * rng.uniform(-1, 1, n // 4) + 0j])[:n]
    return float(np.abs(extend_on_domain(handle, f, z) - np.asarray(f(z.real, z.imag), float)).max())


def continuity_check(handle: DomainExtensionHandle, f, n: int = 64, tau: float = 1e-4):
    """Mismatch between ``Ef`` at distance ``tau`` outside and ``f`` at ``tau`` inside.

    ``scale`` is a C^1 size of ``f`` on the collar (sup of ``|f|`` plus a
    finite-difference gradient sup), the natural yardstick for the
    ``O(tau)`` mismatch.
    """
    dom = handle.domain
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    base = dom.gamma(th)
    nu = dom.normal(th)
    out = extend_on_domain(handle, f, base + tau * nu)
    zin = base - tau * nu
    inn = np.asarray(f(zin.real, zin.imag), float)
    pts = (base[:, None] - np.linspace(0, 1, 9)[None, :] * dom.t_max * nu[:, None]).reshape(-1)
    e = 1e-6
    fx = (f(pts.real + e, pts.imag) - f(pts.real - e, pts.imag)) / (2 * e)
    fy = (f(pts.real, pts.imag + e) - f(pts.real, pts.imag - e)) / (2 * e)
    scale = float(np.abs(f(pts.real, pts.imag)).max() + np.hypot(fx, fy).max())
    return {"mismatch": float(np.abs(out - inn).max()), "scale": scale}


def _stencil(k, npts, h, sign):
    nodes = [sign * h * i for i in range(npts)]
    A = mp.matrix([[x**r for x in nodes] for r in range(npts)])
    rhs = mp.matrix([0] * npts)
    rhs[k] = mp.factorial(k)
    return list(mp.lu_solve(A, rhs))


def _mp_step(u):
    if u <= 0:
        return mp.mpf(0)
    if u >= 1:
        return mp.mpf(1)
    e0 = mp.exp(-1 / u)
    e1 = mp.exp(-1 / (1 - u))
    return e0 / (e0 + e1)


def _mp_bump(t, plateau, support):
    return 1 - _mp_step((abs(t) - mp.mpf(plateau)) / (mp.mpf(support) - mp.mpf(plateau)))


def ray_extension(handle: DomainExtensionHandle, f, theta: float, s, bits: int = 256):
    """Extension at ``gamma(theta) + s * nu(theta)`` (``s > 0`` outside) in mpmath.

    The chart coordinates are known exactly along the normal ray, so no
    inverse is needed; ``f(x, y)`` must accept mpmath scalars.
    """
    dom = handle.domain
    cut = handle.cutoffs
    with mp.workprec(bits):
        s = mp.mpf(s)
        th = mp.mpf(theta)
        base = sum(mp.mpc(c) * mp.expj(n * th) for n, c in dom.coefficients.items())
        d1 = sum(1j * n * mp.mpc(c) * mp.expj(n * th) for n, c in dom.coefficients.items())
        nu = -1j * dom.orientation * d1 / abs(d1)
        if s <= 0:
            p = base + s * nu
            return mp.mpf(f(p.real, p.imag))
        tm = mp.mpf(dom.t_max)
        t = -s / tm
        acc = mp.mpf(0)
        for aj, bj in zip(handle.family.a, handle.family.b):
            u = -bj * t
            w = _mp_bump(u, cut.plateau0, cut.support0)
            if w == 0:
                continue
            p = base - u * tm * nu
            acc += aj * w * f(p.real, p.imag)
        return +(_mp_bump(t, cut.support0, cut.support1) * acc)


def _uexp(v):
    return mp.exp(v) if isinstance(v, mp.mpf) else np.exp(v)


MATCH_FUNCTIONS = {
    "1": lambda x, y: 0 * x + 1,
    "x1": lambda x, y: x,
    "x1x2": lambda x, y: x * y,
    "exp(-x1)": lambda x, y: _uexp(-x),
}


def normal_match(handle: DomainExtensionHandle, f, thetas, order: int = 2,
                 hs=(1e-5, 1e-6, 1e-7), bits: int = 256):
    """One-sided normal-derivative mismatch across the boundary.

    Along the normal line through ``gamma(theta)`` the ``order``-th
    derivative is estimated from ``order + 1`` nodes on each side (the
    boundary node is shared) and the two estimates are compared.  Values
    are computed with :func:`ray_extension` at ``bits`` precision so the
    stencils are free of rounding noise.  Returns the max mismatch over
    ``thetas`` per ``h`` and the fitted orders between consecutive ``h``.
    """
    npts = order + 1
    mis = []
    with mp.workprec(bits):
        for h in hs:
            w_in = _stencil(order, npts, mp.mpf(h), -1)
            w_out = _stencil(order, npts, mp.mpf(h), 1)
            worst = mp.mpf(0)
            for th in np.asarray(thetas, float).ravel():
                inner = sum(w * ray_extension(handle, f, th, -i * mp.mpf(h), bits) for i, w in enumerate(w_in))
                outer = sum(w * ray_extension(handle, f, th, i * mp.mpf(h), bits) for i, w in enumerate(w_out))
                worst = max(worst, abs(inner - outer))
            mis.append(float(worst))
    fits = []
    for (h1, m1), (h2, m2) in zip(zip(hs, mis), zip(hs[1:], mis[1:])):
        fits.append(math.log(m1 / m2) / math.log(h1 / h2) if m1 > 0 and m2 > 0 else math.inf)
    return {"h": list(hs), "mismatch": mis, "fitted-order": fits}
