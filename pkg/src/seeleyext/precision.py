"""Working-precision and truncation settings for infinite sums and products."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .exceptions import PrecisionError

GUARD_BITS = 64


@dataclass(frozen=True)
class PrecisionContext:
    """Precision and truncation knobs used by every coefficient routine.

    Parameters
    ----------
    bits : int
        Binary working precision of the mpmath computations.
    jmax : int
        Two-sided index cutoff; stored families hold ``|j| <= jmax``.
    product_terms : int, optional
        Number of factors kept in truncated Weierstrass products.  Defaults
        to ``jmax + 80`` which keeps the dropped tail below ``4**-80`` for
        arguments of modulus ``4**jmax``.
    tail_tol : float
        Admissible truncation error for sums, products and moment residuals.
    """

    bits: int = 512
    jmax: int = 20
    product_terms: int | None = None
    tail_tol: float = 1e-30

    def __post_init__(self):
        if self.product_terms is None:
            object.__setattr__(self, "product_terms", self.jmax + 80)
        if self.bits < 64:
            raise PrecisionError(f"bits must be >= 64, got {self.bits}")
        if self.jmax < 1:
            raise ValueError(f"jmax must be >= 1, got {self.jmax}")
        if self.product_terms < self.jmax:
            raise ValueError("product_terms must be >= jmax")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")

    @property
    def dps(self) -> int:
        """Decimal digits carried by ``bits``."""
        return int(self.bits * math.log10(2))

    def with_(self, **changes) -> "PrecisionContext":
        return replace(self, **changes)

    def required_bits(self, kmax: int, beta: float = 4.0) -> int:
        """Bits needed to validate moments up to ``|k| <= kmax``.

        The largest summand of ``sum_j a_j beta**(j*k)`` behaves like
        ``beta**(k*(k+1)/2)`` (super-geometric decay of the coefficients
        against geometric growth of the nodes), so that many bits cancel
        before the residual emerges; on top we need ``log2(1/tail_tol)``
        bits for the residual itself plus a fixed guard.
        """
        cancel = math.log2(beta) * kmax * (kmax + 1) / 2
        return int(math.ceil(cancel + math.log2(1.0 / self.tail_tol))) + GUARD_BITS

    def check_bits(self, kmax: int, beta: float = 4.0) -> None:
        need = self.required_bits(kmax, beta)
        if self.bits < need:
            raise PrecisionError(
                f"{self.bits} bits cannot validate moments up to |k|={kmax} "
                f"at tol={self.tail_tol:g}; need at least {need}"
            )
