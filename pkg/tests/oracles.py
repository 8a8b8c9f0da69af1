"""Independent reference computations used by the tests.

Nothing here imports the package's numerical routines; each oracle takes
another route to the same number (exact rationals, direct products,
closed forms).
"""

from fractions import Fraction

import mpmath as mp


def exact_vandermonde(nodes, ks):
    """Solve ``sum_j a_j nodes_j**k = (-1)**k`` for ``k in ks`` in exact rationals."""
    nodes = [Fraction(x) for x in nodes]
    n = len(nodes)
    A = [[x**k for x in nodes] + [Fraction((-1) ** k)] for k in ks]
    for c in range(n):
        piv = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c] / A[c][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [A[i][n] / A[i][i] for i in range(n)]


def weierstrass(beta, z, nfactors=400):
    """``prod_{j>=0} (1 - z / beta**j)`` by direct multiplication."""
    beta = mp.mpf(beta)
    out = mp.mpf(1)
    for j in range(nfactors):
        out *= 1 - z / beta**j
    return out


def weierstrass_slope(beta, k, nfactors=400):
    """Derivative at the zero ``beta**k``: ``-beta**-k prod_{j != k} (1 - beta**k / beta**j)``."""
    beta = mp.mpf(beta)
    z = beta**k
    out = -1 / z
    for j in range(nfactors):
        if j != k:
            out *= 1 - z / beta**j
    return out


def sum_bound(beta, l, K, nfactors=400):
    """``sum_{k=1..K} |W(beta^-l) / (W'(beta^k) (beta^-l - beta^k))|``."""
    beta = mp.mpf(beta)
    z = beta ** (-l)
    W = weierstrass(beta, z, nfactors)
    return mp.fsum(abs(W / (weierstrass_slope(beta, k, nfactors) * (z - beta**k))) for k in range(1, K + 1))


def moment(a, b, k):
    """``sum_j a_j (-b_j)**k`` with mpmath summation."""
    return mp.fsum(aj * (-bj) ** k for aj, bj in zip(a, b))


def reflect(a, b, f, x):
    """``sum_j a_j f(-b_j x)`` at a single negative point."""
    return mp.fsum(aj * f(-bj * x) for aj, bj in zip(a, b))
