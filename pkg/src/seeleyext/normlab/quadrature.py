"""Norms of one-dimensional callables along the normal axis.

Extensions spread a function over many scales: the copies ``f(-b_j x)``
live at ``x ~ 1/b_j``.  Integrals therefore use the substitution
``y = exp(u)`` on each half-line with a uniform trapezoid rule in ``u``,
which resolves every dyadic scale with the same number of nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..functions import CallableFunction

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class LogQuadrature:
    """Trapezoid rule in ``u = log y`` over ``[u_min, u_max]``."""

    u_min: float = -40.0
    u_max: float = 40.0
    du: float = 1.0 / 128

    @property
    def y(self) -> np.ndarray:
        return np.exp(self.u)

    @property
    def u(self) -> np.ndarray:
        n = int(round((self.u_max - self.u_min) / self.du)) + 1
        return np.linspace(self.u_min, self.u_max, n)

    def integrate(self, values) -> float:
        """``int_0^inf g(y) dy`` from ``values = g(self.y)``."""
        y = self.y
        return float(_trapezoid(np.asarray(values, float) * y, self.u))


DEFAULT_QUAD = LogQuadrature()


def _side_values(f, m, side, quad):
    g = f.derivative(m) if m else f
    y = quad.y
    if side > 0:
        return np.asarray(g(y), float)
    return np.asarray(g(-y), float)


def half_line_lp(f: CallableFunction, p, m: int = 0, side: int = 1, quad=DEFAULT_QUAD) -> float:
    """``||d^m f||_{L^p}`` over ``x > 0`` (``side=1``) or ``x < 0`` (``side=-1``)."""
    v = np.abs(_side_values(f, m, side, quad))
    if math.isinf(p):
        g = f.derivative(m) if m else f
        edge = abs(float(g(side * 0.0)))
        return float(max(v.max(), edge))
    return quad.integrate(v**p) ** (1.0 / p)


def callable_lp_norm(f: CallableFunction, p, m: int = 0, full: bool | None = None, quad=DEFAULT_QUAD):
    """L^p norm of ``d^m f`` on the half-line, or on the line for full-space ``f``."""
    full = f.support == "full" if full is None else full
    pos = half_line_lp(f, p, m, 1, quad)
    if not full:
        return pos
    neg = half_line_lp(f, p, m, -1, quad)
    if math.isinf(p):
        return max(pos, neg)
    return (pos**p + neg**p) ** (1.0 / p)


def callable_sobolev_norm(f: CallableFunction, k: int, p, full: bool | None = None, quad=DEFAULT_QUAD):
    """``(sum_{m<=k} ||d^m f||_p^p)^(1/p)`` using analytic derivative handles."""
    parts = [callable_lp_norm(f, p, m, full, quad) for m in range(k + 1)]
    if math.isinf(p):
        return max(parts)
    return sum(x**p for x in parts) ** (1.0 / p)


def callable_inner(f: CallableFunction, g: CallableFunction, full: bool, quad=DEFAULT_QUAD) -> float:
    """``int f g`` over the half-line or the line."""
    y = quad.y
    tot = quad.integrate(np.asarray(f(y), float) * np.asarray(g(y), float))
    if full:
        tot += quad.integrate(np.asarray(f(-y), float) * np.asarray(g(-y), float))
    return tot
