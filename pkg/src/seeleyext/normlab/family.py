"""The shipped 20-function test family.

Every member is ``Re(P(y) exp(Q(y)))`` with complex polynomials ``P`` and
quadratic ``Q`` (decaying), so all normal derivatives are exact via
``(P e^Q)' = (P' + Q' P) e^Q``.

Members, in order (seeded parameters drawn with ``numpy.random.default_rng``):

* ``gauss-0..5``: Gaussians, widths ``0.08 * 2^i``, centers in ``[0.5w, 3w]``.
* ``bump-0..3``: wide centered bumps touching the boundary, widths ``0.05 .. 5``.
* ``wave-{2,8,32}-{0,1}``: Gaussian-windowed cosines at three frequencies.
* ``profile-0..3``: one-sided profiles ``e^-y``, ``(1 + y) e^-y^2``,
  ``y^2 e^-y``, ``cos(3y) e^-y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from ..functions import CallableFunction, Growth


def _expoly(pc, qc, name, bound):
    pc = np.asarray(pc, complex)
    qc = np.asarray(qc, complex)
    dq = P.polyder(qc)
    cache = {0: pc}

    def poly(m):
        if m not in cache:
            prev = poly(m - 1)
            cache[m] = P.polyadd(P.polyder(prev) if prev.size > 1 else np.zeros(1), P.polymul(dq, prev))
        return cache[m]

    def ev(m, *x):
        y = np.asarray(x[-1], float)
        with np.errstate(under="ignore", over="ignore", invalid="ignore"):
            e = np.exp(P.polyval(y, qc))
            out = (P.polyval(y, poly(m)) * e).real
        return np.where(np.isfinite(out), out, 0.0) if np.ndim(out) else float(out if np.isfinite(out) else 0.0)

    return CallableFunction(lambda *x: ev(0, *x), 1, "half", ev, Growth("bounded", bound), name)


@dataclass(frozen=True)
class ProbeFunction:
    """A family member with the length scales grid probes need.

    ``scale`` is the finest feature width; ``extent`` bounds the support
    (``|f| < 1e-16 max|f|`` beyond it).
    """

    fid: str
    func: CallableFunction
    scale: float
    extent: float


def _gauss(c, w, omega=0.0, phase=0.0, amp=1.0):
    # exp(-((y - c)/w)^2 + i(omega y + phase))
    q = [-(c * c) / w**2 + 1j * phase, 2 * c / w**2 + 1j * omega, -1 / w**2]
    return [amp], q


def _sup(f, extent):
    y = np.linspace(0, extent, 20001)
    return float(np.abs(f(y)).max())


def probe_family(seed: int = 20240607) -> list[ProbeFunction]:
    """The 20 probe functions; identical for identical ``seed``."""
    rng = np.random.default_rng(seed)
    out = []

    def add(fid, pc, qc, scale, extent):
        tmp = _expoly(pc, qc, fid, 1.0)
        bound = 1.5 * _sup(tmp, extent)
        out.append(ProbeFunction(fid, _expoly(pc, qc, fid, bound), scale, extent))

    for i in range(6):
        w = 0.08 * 2**i
        c = w * rng.uniform(0.5, 3.0)
        add(f"gauss-{i}", *_gauss(c, w), w, c + 7 * w)
    for i, w in enumerate((0.05, 0.3, 1.5, 5.0)):
        add(f"bump-{i}", *_gauss(0.0, w), w, 7 * w)
    for omega in (2.0, 8.0, 32.0):
        for i in range(2):
            w = 0.6
            c = rng.uniform(0.3, 1.5)
            phase = rng.uniform(0, 2 * np.pi)
            add(f"wave-{int(omega)}-{i}", *_gauss(c, w, omega, phase), min(w, 1 / omega), c + 7 * w)
    add("profile-0", [1.0], [0.0, -1.0], 1.0, 40.0)
    add("profile-1", [1.0, 1.0], [0.0, 0.0, -1.0], 0.7, 7.0)
    add("profile-2", [0.0, 0.0, 1.0], [0.0, -1.0], 1.0, 50.0)
    add("profile-3", [1.0], [0.0, -1.0 + 3j], 1 / 3, 40.0)
    return out
