import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from seeleyext.functions import GridFunction
from seeleyext.normlab import (
    AliasingWarning,
    NormSpec,
    besov_levels,
    besov_quasinorm,
    combine_levels,
    grid_norm,
    h_s_norm,
    holder_seminorm,
    level_shares,
    lp_norm,
    lp_symbols,
    lp_window,
    sobolev_norm,
)


def test_lp_of_constant():
    g = GridFunction(np.full(100, 2.0), 0.01, half=False)
    assert lp_norm(g, 1) == pytest.approx(2.0)
    assert lp_norm(g, 2) == pytest.approx(2.0)
    assert lp_norm(g, math.inf) == 2.0
    assert lp_norm(g, 0.5) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        lp_norm(g, 0)


def test_sobolev_of_sine():
    x = np.linspace(0, 2 * np.pi, 4001)[:-1]
    g = GridFunction(np.sin(x), x[1] - x[0], half=False)
    # ||sin||_2^2 = ||cos||_2^2 = pi on one period
    assert sobolev_norm(g, 1, 2) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-5)
    assert sobolev_norm(g, 1, math.inf) == pytest.approx(1.0, rel=1e-5)


@settings(max_examples=30, deadline=None)
@given(arrays(float, st.integers(8, 64), elements=st.floats(-10, 10)))
def test_h0_is_l2(v):
    g = GridFunction(v, 0.1, half=False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasingWarning)
        assert h_s_norm(g, 0.0) == pytest.approx(lp_norm(g, 2), rel=1e-10, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 8), arrays(float, 32, elements=st.floats(0, 600)))
def test_symbols_telescope(J, xi):
    syms = lp_symbols(xi, J)
    assert np.allclose(sum(syms), lp_window(xi / 2**J), atol=1e-14)
    assert all(np.all(s >= -1e-15) for s in syms)


def test_window_shape():
    xi = np.array([0.0, 1.0, 1.5, 2.0, 3.0])
    w = lp_window(xi)
    assert w[0] == 1 and w[1] == 1 and w[3] == 0 and w[4] == 0 and 0 < w[2] < 1


def test_besov_p2_matches_pointwise_route():
    x = np.linspace(-20, 20, 2**12, endpoint=False)
    g = GridFunction(np.exp(-x * x) * np.cos(3 * x), x[1] - x[0], (x[0],), False)
    fast = besov_levels(g, 2)
    F = np.fft.fft(g.values)
    xi = np.abs(2 * np.pi * np.fft.fftfreq(g.values.size, g.h[0]))
    for j, lam in enumerate(lp_symbols(xi, fast.meta["levels"])):
        piece = GridFunction(np.fft.ifft(lam * F).real, g.h, g.origin, False)
        assert fast.norms[j] == pytest.approx(lp_norm(piece, 2), rel=1e-9, abs=1e-14)
    assert fast.tail < 1e-10


def test_besov_s0_q2_close_to_l2():
    x = np.linspace(-20, 20, 2**12, endpoint=False)
    g = GridFunction(np.exp(-x * x), x[1] - x[0], (x[0],), False)
    b = besov_quasinorm(g, 2, 2, 0.0)
    assert 0.5 * lp_norm(g, 2) < b <= lp_norm(g, 2) * (1 + 1e-9)
    shares = level_shares(g, 2, 2, 0.0)
    assert shares.sum() == pytest.approx(1.0)


def test_combine_levels_sup():
    g = GridFunction(np.sin(np.linspace(0, 8 * np.pi, 256, endpoint=False)), 0.1, half=False)
    lv = besov_levels(g, 1)
    assert combine_levels(lv, 0.5, math.inf) == pytest.approx(
        max(2 ** (0.5 * j) * n for j, n in enumerate(lv.norms))
    )


def test_aliasing_warning():
    v = np.cos(np.pi * np.arange(64))
    with pytest.warns(AliasingWarning):
        h_s_norm(GridFunction(v, 1.0, half=False), 1.0)


def test_holder_of_linear_function():
    x = np.linspace(0, 1, 1001)
    g = GridFunction(x, x[1] - x[0], half=True)
    # |x - y| / |x - y|^(1/2) is largest at the window 1/4
    assert holder_seminorm(g, 0, 0.5) == pytest.approx(math.sqrt(0.25), rel=1e-2)
    with pytest.raises(ValueError):
        holder_seminorm(g, 0, 1.0)


def test_normspec_validation():
    with pytest.raises(ValueError):
        NormSpec("morrey")
    with pytest.raises(ValueError):
        NormSpec("besov", 0.5, 2)
    with pytest.raises(ValueError):
        NormSpec("sobolev", -1, 2)
    with pytest.raises(ValueError):
        NormSpec("holder", 1.0, math.inf)
    assert NormSpec("besov", 0.5, 2, 2).label == "besov(order=0.5,p=2.0,q=2.0)"


def test_grid_norm_dispatch():
    x = np.linspace(0, 1, 101)
    g = GridFunction(x, 0.01, half=True)
    assert grid_norm(g, NormSpec("lp", 0, math.inf)) == 1.0
    with pytest.raises(ValueError):
        grid_norm(g, NormSpec("neg-sobolev-upper", -1, 2))
