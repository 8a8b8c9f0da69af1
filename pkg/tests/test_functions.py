import mpmath as mp
import numpy as np
import pytest

from seeleyext import PrecisionContext
from seeleyext.exceptions import PrecisionError
from seeleyext.functions import GridFunction, Growth, builtin, read_grid_csv, write_grid_csv


def test_precision_context_defaults():
    ctx = PrecisionContext()
    assert ctx.product_terms == ctx.jmax + 80
    assert ctx.dps == 154
    with pytest.raises(PrecisionError):
        PrecisionContext(bits=32)
    with pytest.raises(PrecisionError):
        ctx.check_bits(40)


@pytest.mark.parametrize("name", ["const", "poly:3", "exp-decay", "gaussian", "sine:2"])
def test_builtin_derivatives(name):
    f = builtin(name)
    for x in (0.3, 1.7):
        h = 1e-5
        fd = (f(x + h) - f(x - h)) / (2 * h)
        assert f.derivative(1)(x) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_builtins_accept_mp_scalars():
    with mp.workprec(200):
        v = builtin("gaussian")(mp.mpf("0.5"))
        assert isinstance(v, mp.mpf) and abs(v - mp.exp(-0.25)) < mp.mpf(10) ** -55


def test_unknown_builtin():
    with pytest.raises(KeyError):
        builtin("nope")


def test_growth_bounds():
    assert Growth("poly", 2.0, 3).bound(1.0) == 16.0
    assert Growth("exp-decay", 1.0, rate=2.0).bound(1.0) == pytest.approx(np.exp(-2))
    with pytest.raises(ValueError):
        Growth("wild")


def test_grid_validation():
    with pytest.raises(ValueError):
        GridFunction([1.0, np.nan], 0.1)
    with pytest.raises(ValueError):
        GridFunction([1.0, 2.0], 0.1, origin=(0.5,))
    g = GridFunction.sample(lambda x: x, 0.5, 3, n_negative=2)
    assert not g.half and np.allclose(g.xn, [-1, -0.5, 0, 0.5, 1])
    assert np.allclose(g.restrict_half().values, [0, 0.5, 1])


def test_grid_csv_round_trip(tmp_path):
    g = GridFunction.sample(lambda x, y: x + y, 0.25, 4, xprime=[np.linspace(0, 1, 3)])
    path = tmp_path / "g.csv"
    write_grid_csv(g, path)
    back = read_grid_csv(path)
    assert back.values.shape == g.values.shape and np.array_equal(back.values, g.values)
    assert back.h == g.h and back.half
