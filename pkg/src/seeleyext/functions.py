"""Callable and gridded test functions, the builtin registry, and grid CSV I/O.

All coordinates are ordered ``(x', x_n)`` with the normal variable last.
Callables are invoked as ``f(*coords)`` where each coordinate is a float,
a numpy array, or an ``mpmath.mpf`` scalar; builtins dispatch on the type so
the same function serves the double and extended-precision paths.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import mpmath as mp
import numpy as np


def _is_mp(x) -> bool:
    return isinstance(x, (mp.mpf, mp.mpc))


def _lib(x):
    return mp if _is_mp(x) else np


@dataclass(frozen=True)
class Growth:
    """Declared growth of ``|f(x', y)|`` along the normal ray ``y >= 0``.

    ``kind`` is ``"poly"`` (``scale * (1 + y)**degree``), ``"exp-decay"``
    (``scale * exp(-rate * y)``) or ``"bounded"`` (``scale``).  Negative
    ``degree`` is allowed for ``poly`` and then bounds ``scale * y**degree``.
    """

    kind: str = "bounded"
    scale: float = 1.0
    degree: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in ("poly", "exp-decay", "bounded"):
            raise ValueError(f"unknown growth class {self.kind!r}")

    def bound(self, y):
        y = abs(y)
        if self.kind == "bounded":
            return self.scale + 0 * y
        if self.kind == "exp-decay":
            return self.scale * _lib(y).exp(-self.rate * y)
        if self.degree < 0:
            return self.scale * y**self.degree
        return self.scale * (1 + y) ** self.degree


@dataclass(frozen=True)
class CallableFunction:
    """An evaluable function on the half-space (``x_n > 0``) or full space.

    ``derivative(m)`` returns the ``m``-th normal derivative as another
    :class:`CallableFunction` when analytic handles were supplied.
    """

    func: Callable
    dim: int = 1
    support: str = "half"
    dn: Callable | None = None
    growth: Growth = field(default_factory=Growth)
    name: str = ""

    def __post_init__(self):
        if self.support not in ("half", "full"):
            raise ValueError("support must be 'half' or 'full'")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    def __call__(self, *x):
        return self.func(*x)

    @property
    def has_derivatives(self) -> bool:
        return self.dn is not None

    def derivative(self, m: int = 1) -> "CallableFunction":
        if m == 0:
            return self
        if self.dn is None:
            raise ValueError(f"{self.name or 'function'} has no analytic derivative handle")
        dn = self.dn
        return CallableFunction(
            lambda *x: dn(m, *x),
            self.dim,
            self.support,
            lambda k, *x: dn(m + k, *x),
            self.growth,
            f"d{m}[{self.name}]",
        )


@dataclass
class GridFunction:
    """Samples on a uniform grid; the last axis is the normal direction.

    For a half grid the normal nodes are ``0, h, 2h, ...`` (``origin[-1] == 0``).
    """

    values: np.ndarray
    h: tuple
    origin: tuple | None = None
    half: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if np.isscalar(self.h) or np.ndim(self.h) == 0:
            self.h = (float(self.h),) * self.values.ndim
        self.h = tuple(float(x) for x in self.h)
        if self.origin is None:
            self.origin = (0.0,) * self.values.ndim
        self.origin = tuple(float(x) for x in self.origin)
        if len(self.h) != self.values.ndim or len(self.origin) != self.values.ndim:
            raise ValueError("h and origin need one entry per array axis")
        if any(not x > 0 for x in self.h):
            raise ValueError("grid spacing must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")
        if self.half and abs(self.origin[-1]) > 1e-12 * self.h[-1]:
            raise ValueError("half grids must start at x_n = 0")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def hn(self) -> float:
        return self.h[-1]

    def axis(self, i: int = -1) -> np.ndarray:
        n = self.values.shape[i]
        return self.origin[i] + self.h[i] * np.arange(n)

    @property
    def xn(self) -> np.ndarray:
        return self.axis(-1)

    def restrict_half(self) -> "GridFunction":
        """Nodes with ``x_n >= 0`` as a half grid."""
        i0 = int(round(-self.origin[-1] / self.hn))
        if i0 < 0:
            raise ValueError("grid has no x_n = 0 node")
        origin = self.origin[:-1] + (0.0,)
        return GridFunction(self.values[..., i0:].copy(), self.h, origin, True)

    @classmethod
    def sample(cls, f: Callable, h, n: int, xprime=(), n_negative: int = 0) -> "GridFunction":
        """Sample ``f`` on normal nodes ``-n_negative*h .. (n-1)*h``.

        ``xprime`` is a sequence of 1-D tangential axes; the result has shape
        ``(len(x'_1), ..., n_negative + n)``.
        """
        xn = h * np.arange(-n_negative, n)
        axes = [np.asarray(a, float) for a in xprime] + [xn]
        mesh = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(f(*mesh), dtype=float) * np.ones(mesh[0].shape)
        hs = tuple((a[1] - a[0]) if len(a) > 1 else 1.0 for a in axes[:-1]) + (h,)
        origin = tuple(a[0] for a in axes[:-1]) + (-n_negative * h,)
        return cls(vals, hs, origin, half=n_negative == 0)


# --------------------------------------------------------------------------
# Builtin registry
# --------------------------------------------------------------------------


def _hermite(m, x):
    if _is_mp(x):
        return mp.hermite(m, x)
    c = np.zeros(m + 1)
    c[m] = 1
    return np.polynomial.hermite.hermval(x, c)


def _const(c=1.0):
    def f(*x):
        return c + 0 * x[-1]

    def dn(m, *x):
        return (c if m == 0 else 0) + 0 * x[-1]

    return CallableFunction(f, dn=dn, growth=Growth("bounded", abs(c)), name=f"const:{c}")


def _poly(k: int):
    def f(*x):
        return x[-1] ** k

    def dn(m, *x):
        if k >= 0 and m > k:
            return 0 * x[-1]
        coef = 1
        for i in range(m):
            coef *= k - i
        return coef * x[-1] ** (k - m)

    return CallableFunction(f, dn=dn, growth=Growth("poly", 1.0, float(k)), name=f"poly:{k}")


def _exp_decay(rate=1.0):
    def f(*x):
        return _lib(x[-1]).exp(-rate * x[-1])

    def dn(m, *x):
        return (-rate) ** m * _lib(x[-1]).exp(-rate * x[-1])

    return CallableFunction(f, dn=dn, growth=Growth("exp-decay", 1.0, rate=rate), name="exp-decay")


def _gaussian(center=0.0, width=1.0):
    def f(*x):
        y = (x[-1] - center) / width
        return _lib(y).exp(-y * y)

    def dn(m, *x):
        y = (x[-1] - center) / width
        return (-1) ** m * _hermite(m, y) * _lib(y).exp(-y * y) / width**m

    return CallableFunction(f, dn=dn, growth=Growth("bounded", 1.0), name="gaussian")


def _sine(omega=1.0):
    def f(*x):
        return _lib(x[-1]).sin(omega * x[-1])

    def dn(m, *x):
        lib = _lib(x[-1])
        return omega**m * lib.sin(omega * x[-1] + m * lib.pi / 2)

    return CallableFunction(f, dn=dn, growth=Growth("bounded", 1.0), name=f"sine:{omega}")


def builtin(spec: str) -> CallableFunction:
    """Look up a builtin by name: ``const``, ``poly:k``, ``exp-decay``, ``gaussian``, ``sine:w``.

    A leading ``builtin:`` prefix is accepted.
    """
    spec = spec.removeprefix("builtin:")
    name, _, arg = spec.partition(":")
    if name == "const":
        return _const(float(arg) if arg else 1.0)
    if name == "poly":
        return _poly(int(arg or 1))
    if name == "exp-decay":
        return _exp_decay(float(arg) if arg else 1.0)
    if name == "gaussian":
        return _gaussian()
    if name == "sine":
        return _sine(float(arg) if arg else 1.0)
    raise KeyError(f"unknown builtin function {spec!r}")


BUILTIN_NAMES = ("const", "poly:k", "exp-decay", "gaussian", "sine:w")


# --------------------------------------------------------------------------
# Grid CSV files
# --------------------------------------------------------------------------

_HEADER = re.compile(r"#\s*(.*)")


def _fmt_list(xs):
    return ";".join(repr(float(x)) for x in xs)


def write_grid_csv(grid: GridFunction, path) -> None:
    """Write ``# dim=..., h=..., origin=..., shape=..., half|full`` then rows.

    Rows are the array reshaped to ``(-1, N_normal)``, row-major.
    """
    flag = "half" if grid.half else "full"
    shape = ";".join(str(s) for s in grid.values.shape)
    lines = [f"# dim={grid.dim}, h={_fmt_list(grid.h)}, origin={_fmt_list(grid.origin)}, shape={shape}, {flag}"]
    rows = grid.values.reshape(-1, grid.values.shape[-1])
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_csv(path) -> GridFunction:
    with open(path) as fh:
        first = fh.readline()
        m = _HEADER.match(first)
        if not m:
            raise ValueError(f"{path}: missing '# dim=..., h=...' header")
        meta = {}
        flag = "half"
        for part in m.group(1).split(","):
            part = part.strip()
            if "=" in part:
                k, v = part.split("=", 1)
                meta[k.strip()] = v.strip()
            elif part in ("half", "full"):
                flag = part
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    dim = int(meta.get("dim", 1))
    h = tuple(float(x) for x in meta["h"].split(";"))
    origin = tuple(float(x) for x in meta.get("origin", ";".join(["0"] * dim)).split(";"))
    if "shape" in meta:
        shape = tuple(int(s) for s in meta["shape"].split(";"))
    elif dim == 1:
        shape = (data.size,)
    else:
        shape = data.shape
    return GridFunction(data.reshape(shape), h, origin, flag == "half")

