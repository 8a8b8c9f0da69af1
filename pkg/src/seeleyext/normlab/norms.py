"""Discrete norm estimators on uniform grids.

Spectral estimators (``h_s_norm``, ``besov_quasinorm``) treat the grid as
one period of a torus; frequencies are angular, ``xi = 2*pi*m / L``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..functions import GridFunction

FAMILIES = ("lp", "sobolev", "neg-sobolev-upper", "holder", "besov", "triebel-diag")


class AliasingWarning(UserWarning):
    """Spectral mass near the Nyquist frequency exceeds 1% of the norm."""


@dataclass(frozen=True)
class NormSpec:
    """Which norm to estimate.

    ``order`` is the smoothness ``k`` (integer for Sobolev families) or ``s``.
    ``levels`` caps the Littlewood-Paley level count; ``None`` goes up to
    the grid's Nyquist frequency.
    """

    family: str
    order: float = 0.0
    p: float = 2.0
    q: float | None = None
    levels: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}")
        if not self.p > 0:
            raise ValueError("p must be positive")
        if self.family in ("sobolev", "lp") and self.order < 0:
            raise ValueError("use neg-sobolev-upper for negative orders")
        if self.family == "lp" and self.order != 0:
            raise ValueError("lp has order 0")
        if self.family == "neg-sobolev-upper" and not self.order < 0:
            raise ValueError("neg-sobolev-upper needs a negative order")
        if self.family == "holder" and not 0 < self.order % 1 < 1:
            raise ValueError("holder order must be k + s with 0 < s < 1")
        if self.family == "besov" and (self.q is None or not self.q > 0):
            raise ValueError("besov needs q > 0")
        if self.family == "triebel-diag" and self.q not in (None, self.p):
            raise ValueError("triebel-diag supports only q = p")

    @property
    def label(self) -> str:
        q = "" if self.q is None else f",q={_pstr(self.q)}"
        return f"{self.family}(order={self.order:g},p={_pstr(self.p)}{q})"

    def to_dict(self):
        return {"family": self.family, "order": self.order, "p": _pstr(self.p),
                "q": None if self.q is None else _pstr(self.q), "levels": self.levels}


def _pstr(p):
    return "inf" if math.isinf(p) else repr(float(p))


def _cell(grid: GridFunction) -> float:
    return float(np.prod(grid.h))


def lp_norm(f: GridFunction, p) -> float:
    """``(sum |f|^p * cell)^(1/p)``; ``max |f|`` for ``p = inf``.  ``p < 1`` allowed."""
    if not p > 0:
        raise ValueError("p must be positive")
    v = np.abs(f.values)
    if math.isinf(p):
        return float(v.max()) if v.size else 0.0
    return float((np.sum(v**p) * _cell(f)) ** (1.0 / p))


def _diff(values, h, axis, order):
    out = values
    for _ in range(order):
        out = np.gradient(out, h, axis=axis, edge_order=2)
    return out


def derivatives(f: GridFunction, k: int):
    """All partial derivatives of total order ``<= k`` as ``{alpha: array}``."""
    if any(n < k + 2 for n in f.values.shape):
        raise ValueError(f"grid too coarse for order {k}: need at least {k + 2} nodes per axis")
    out = {}
    for alpha in product(range(k + 1), repeat=f.dim):
        if sum(alpha) > k:
            continue
        v = f.values
        for ax, m in enumerate(alpha):
            v = _diff(v, f.h[ax], ax, m)
        out[alpha] = v
    return out


def _combine(parts, p):
    parts = np.asarray(parts, float)
    if math.isinf(p):
        return float(parts.max())
    return float(np.sum(parts**p) ** (1.0 / p))


def sobolev_norm(f: GridFunction, k: int, p) -> float:
    """``(sum_{|alpha|<=k} ||d^alpha f||_p^p)^(1/p)`` with finite differences."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return lp_norm(f, p)
    parts = [lp_norm(GridFunction(v, f.h, f.origin, False), p) for v in derivatives(f, k).values()]
    return _combine(parts, p)


def _freqs(f: GridFunction):
    axes = [2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(f.values.shape, f.h)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.sqrt(sum(m * m for m in mesh))


def _alias_check(spec_abs2, xi, total):
    nyq = xi.max()
    hi = spec_abs2[xi > 0.8 * nyq].sum()
    frac = math.sqrt(hi / total) if total > 0 else 0.0
    if frac > 0.01:
        warnings.warn(f"spectral tail holds {frac:.2%} of the norm", AliasingWarning, stacklevel=3)
    return frac


def h_s_multiplier(f: GridFunction, s: float) -> GridFunction:
    """Apply ``(1 + |xi|^2)^(s/2)`` on the torus."""
    xi = _freqs(f)
    out = np.fft.ifftn(np.fft.fftn(f.values) * (1 + xi * xi) ** (s / 2)).real
    return GridFunction(out, f.h, f.origin, False)


def h_s_norm(f: GridFunction, s: float) -> float:
    """``(sum (1+|xi|^2)^s |f^(xi)|^2)^(1/2)``, normalized so ``s = 0`` is the L^2 norm."""
    F = np.fft.fftn(f.values)
    xi = _freqs(f)
    w = np.abs(F) ** 2
    total = w.sum()
    _alias_check(w, xi, total)
    n = f.values.size
    return float(math.sqrt(np.sum((1 + xi * xi) ** s * w) * _cell(f) / n))


# --------------------------------------------------------------------------
# Littlewood-Paley
# --------------------------------------------------------------------------


def _smooth_step(t):
    """``C^inf`` step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, float)
    out = (t >= 1).astype(float)
    band = (t > 0) & (t < 1)
    tb = t[band]
    e0 = np.exp(-1.0 / tb)
    e1 = np.exp(-1.0 / (1 - tb))
    out[band] = e0 / (e0 + e1)
    return out


def lp_window(xi):
    """Radial symbol of the level-0 kernel: 1 on ``|xi| <= 1``, 0 on ``|xi| >= 2``."""
    return 1.0 - _smooth_step(np.abs(xi) - 1.0)


def lp_symbols(xi, levels: int):
    """Symbols of level ``0..levels``; they sum to ``lp_window(2^-levels xi)``."""
    prev = lp_window(xi)
    out = [prev]
    for j in range(1, levels + 1):
        cur = lp_window(xi / 2**j)
        out.append(cur - prev)
        prev = cur
    return out


def default_levels(f: GridFunction) -> int:
    nyq = min(np.pi / h for h in f.h)
    return max(0, int(math.floor(math.log2(nyq))) - 1)


@dataclass
class LevelNorms:
    norms: np.ndarray
    p: float
    tail: float
    meta: dict = field(default_factory=dict)


def besov_levels(f: GridFunction, p, levels: int | None = None) -> LevelNorms:
    """``||lambda_j * f||_p`` for ``j = 0..levels`` plus the unresolved tail.

    ``tail`` is the L^2 mass of the spectrum outside the last level's
    window, relative to the full L^2 norm.
    """
    J = default_levels(f) if levels is None else int(levels)
    F = np.fft.fftn(f.values)
    xi = _freqs(f)
    w = np.abs(F) ** 2
    total = w.sum()
    alias = _alias_check(w, xi, total)
    syms = lp_symbols(xi, J)
    norms = np.empty(J + 1)
    n = f.values.size
    for j, lam in enumerate(syms):
        if p == 2:
            norms[j] = math.sqrt(np.sum(np.abs(lam * F) ** 2) * _cell(f) / n)
        else:
            piece = np.fft.ifftn(lam * F).real
            norms[j] = lp_norm(GridFunction(piece, f.h, f.origin, False), p)
    covered = np.sum(np.abs(sum(syms) * F) ** 2)
    tail = math.sqrt(max(total - covered, 0.0) / total) if total > 0 else 0.0
    return LevelNorms(norms, p, tail, {"levels": J, "alias_fraction": alias})


def combine_levels(levels: LevelNorms, s: float, q) -> float:
    """``(sum_j 2^(j s q) ||lambda_j * f||_p^q)^(1/q)``; sup for ``q = inf``."""
    j = np.arange(levels.norms.size)
    terms = 2.0 ** (j * s) * levels.norms
    if math.isinf(q):
        return float(terms.max()) if terms.size else 0.0
    return float(np.sum(terms**q) ** (1.0 / q))


def besov_quasinorm(f: GridFunction, p, q, s, levels: int | None = None) -> float:
    """Littlewood-Paley Besov quasi-norm on the torus embedding of ``f``."""
    return combine_levels(besov_levels(f, p, levels), s, q)


def level_shares(f: GridFunction, p, q, s, levels: int | None = None) -> np.ndarray:
    """Fraction of the ``l^q`` mass carried by each level."""
    lv = besov_levels(f, p, levels)
    j = np.arange(lv.norms.size)
    terms = (2.0 ** (j * s) * lv.norms)
    if math.isinf(q):
        return terms / terms.max()
    t = terms**q
    return t / t.sum()


# --------------------------------------------------------------------------
# Hoelder
# --------------------------------------------------------------------------


def _shifts(n, window, max_dense=1024):
    w = max(1, min(n - 1, window))
    dense = np.arange(1, min(w, max_dense) + 1)
    if w <= max_dense:
        return dense
    sparse = np.unique(np.geomspace(max_dense, w, 64).astype(int))
    return np.concatenate([dense, sparse])


def holder_seminorm(f: GridFunction, k: int, s: float, window: float | None = None,
                    max_dense: int = 1024) -> float:
    """``max |d^alpha f(x) - d^alpha f(y)| / |x - y|^s`` over axis-aligned grid pairs.

    Pairs are limited to ``|x - y| <= window`` (default a quarter of the
    shortest side).  This is a lower estimate of the true supremum.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    ders = derivatives(f, k) if k > 0 else {(0,) * f.dim: f.values}
    best = 0.0
    for alpha, v in ders.items():
        if sum(alpha) != k:
            continue
        for ax in range(f.dim):
            n = v.shape[ax]
            L = n * f.h[ax]
            w = (window if window is not None else L / 4) / f.h[ax]
            for d in _shifts(n, int(w), max_dense):
                a = np.take(v, range(d, n), axis=ax)
                b = np.take(v, range(0, n - d), axis=ax)
                m = float(np.abs(a - b).max()) / (d * f.h[ax]) ** s
                best = max(best, m)
    return best


def holder_norm(f: GridFunction, k: int, s: float, window: float | None = None,
                max_dense: int = 1024) -> float:
    """``sum_{|alpha|<=k} sup|d^alpha f| + seminorm``."""
    ders = derivatives(f, k) if k > 0 else {(0,) * f.dim: f.values}
    sup = sum(float(np.abs(v).max()) for v in ders.values())
    return sup + holder_seminorm(f, k, s, window, max_dense)


def grid_norm(f: GridFunction, spec: NormSpec) -> float:
    """Dispatch a :class:`NormSpec` on a grid (witness-based families excluded)."""
    if spec.family == "lp":
        return lp_norm(f, spec.p)
    if spec.family == "sobolev":
        return sobolev_norm(f, int(spec.order), spec.p)
    if spec.family == "holder":
        k = int(math.floor(spec.order))
        return holder_norm(f, k, spec.order - k)
    if spec.family == "besov":
        return besov_quasinorm(f, spec.p, spec.q, spec.order, spec.levels)
    if spec.family == "triebel-diag":
        return besov_quasinorm(f, spec.p, spec.p, spec.order, spec.levels)
    raise ValueError(f"{spec.family} needs a decomposition witness")
