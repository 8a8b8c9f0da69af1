import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seeleyext.exceptions import OutOfRangeError, TailCertificateError
from seeleyext.functions import CallableFunction, GridFunction, Growth, builtin
from seeleyext.operator import (
    ExtensionPlan,
    adjoint_apply,
    commuted_family,
    dilate,
    extend_callable,
    extend_grid,
    extension_function,
    finite_extend,
    interpolate_normal,
    triangle_constant,
    zero_extend,
)

from . import oracles


@pytest.fixture(scope="module")
def xplan(family6):
    return ExtensionPlan(family6, precision="extended")


def test_identity_on_half_space(plan6):
    f = builtin("gaussian")
    x = np.linspace(0, 3, 7)
    assert np.array_equal(extend_callable(plan6, f, x), f(x))


@pytest.mark.parametrize("k", range(0, 7))
def test_polynomials_reproduced_double(plan6, family6, k):
    x = -np.geomspace(1e-3, 1.0, 9)
    got = extend_callable(plan6, builtin(f"poly:{k}"), x)
    # rounding in the reflection sum scales with sum |a_j| b_j^k
    a, b = family6.as_float()
    cond = float(np.sum(np.abs(a) * b**k))
    assert np.allclose(got, x**k, rtol=1e-15 * cond, atol=0)


@pytest.mark.parametrize("k", [0, 3, 6, -2])
def test_polynomials_reproduced_extended(xplan, k):
    f = builtin(f"poly:{k}")
    with mp.workprec(512):
        x = mp.mpf("-0.7")
        assert abs(extend_callable(xplan, f, x) / x**k - 1) < mp.mpf(10) ** -40


def test_point_value_against_reflection_oracle(xplan, family6):
    f = builtin("gaussian")
    with mp.workprec(512):
        x = mp.mpf("-0.31")
        ref = oracles.reflect(family6.a, family6.b, lambda y: mp.exp(-y * y), x)
        assert abs(extend_callable(xplan, f, x) - ref) < mp.mpf(10) ** -60


def test_double_matches_extended(plan6, xplan):
    f = builtin("sine:2")
    for x in (-0.05, -0.5, -1.7):
        assert extend_callable(plan6, f, x) == pytest.approx(float(extend_callable(xplan, f, x)), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, -1e-3))
def test_linearity(plan6, alpha, beta, x):
    f, g = builtin("gaussian"), builtin("exp-decay")
    h = CallableFunction(lambda y: alpha * f(y) + beta * g(y), growth=Growth("bounded", abs(alpha) + abs(beta)))
    lhs = extend_callable(plan6, h, x)
    rhs = alpha * extend_callable(plan6, f, x) + beta * extend_callable(plan6, g, x)
    assert lhs == pytest.approx(rhs, abs=1e-11 * (1 + abs(alpha) + abs(beta)))


def test_tail_certificate_raises(family6):
    plan = ExtensionPlan(family6)
    with pytest.raises(TailCertificateError):
        extend_callable(plan, builtin("poly:40"), -50.0)
    val, tail = extend_callable(ExtensionPlan(family6, strict=False), builtin("poly:40"), -50.0, return_tail=True)
    assert tail > plan.tail_target


def test_derivative_handle_matches_differences(plan6):
    Ef = extension_function(plan6, builtin("gaussian"))
    for x in (-0.4, -1.1):
        h = 1e-4
        fd = (Ef(x + h) - Ef(x - h)) / (2 * h)
        assert Ef.derivative(1)(x) == pytest.approx(fd, rel=1e-6)


def test_adjoint_matches_direct_formula(plan6, family6):
    g = builtin("gaussian")
    a, b = family6.as_float()
    for x in (0.1, 0.9):
        ref = g(x) + np.sum(a / b * g(-x / b))
        assert adjoint_apply(plan6, g, x) == pytest.approx(ref, rel=1e-13)
    with pytest.raises(ValueError):
        adjoint_apply(plan6, g, 0.0)


def test_commuted_family_shifts_moments(family6):
    fam = commuted_family(family6, 2)
    assert fam.moment_range == (-8, 4)
    with mp.workprec(512):
        for k in range(-8, 5):
            assert abs(oracles.moment(fam.a, fam.b, k) - 1) < 1e-28
    with pytest.raises(ValueError):
        commuted_family(family6, 9)


def test_commuted_inverse_family(family6):
    fam = commuted_family(family6, -1, invert=True)
    with mp.workprec(512):
        for k in range(-5, 6):
            # sum a (-b)^-1 (-1/b)^k = moment(-1 - k)
            assert abs(oracles.moment(fam.a, fam.b, k) - 1) < 1e-28


def test_finite_extend_value():
    # A = (-5, 10, -4) on nodes 1, 1/2, 1/4; (x^2) at x = -1
    assert float(finite_extend(1, 1, builtin("poly:2"), -1.0)) == pytest.approx(-2.75, abs=1e-30)
    with pytest.raises(ValueError):
        finite_extend(1, 1, builtin("poly:2"), 0.0)


def test_triangle_constant():
    assert triangle_constant(0.5, 0.5) == pytest.approx(3.0)
    assert triangle_constant(1, 0.5) == 1.0
    with pytest.raises(ValueError):
        triangle_constant(0, 0.5)


def test_grid_extension_with_tail_model(family6):
    plan = ExtensionPlan(family6, order=4, out_of_range="decay-model", tail_model=lambda y: y**2)
    h = 0.01
    grid = GridFunction.sample(lambda x: x**2, h, 401)
    out = extend_grid(plan, grid, n_negative=50)
    xn = out.xn
    assert out.values.shape == (451,)
    assert np.allclose(out.values[xn < 0], xn[xn < 0] ** 2, atol=1e-9)
    rep = out.meta["report"]
    assert rep["out_of_range_points"] > 0 and rep["max_stencil_error"] < 1e-8


def test_grid_matches_callable_for_decaying_data(family6, plan6):
    plan = ExtensionPlan(family6, order=6, out_of_range="zero-pad")
    h = 0.005
    grid = GridFunction.sample(lambda x: np.exp(-x) * np.cos(x), h, 12001)
    out = extend_grid(plan, grid, n_negative=100)
    xn = out.xn[:100]
    f = CallableFunction(lambda x: np.exp(-x) * np.cos(x), growth=Growth("exp-decay", 1.0))
    ref = extend_callable(plan6, f, xn)
    assert np.max(np.abs(out.values[:100] - ref)) < 1e-7


def test_grid_out_of_range_error(family6):
    plan = ExtensionPlan(family6, out_of_range="error")
    grid = GridFunction.sample(np.cos, 0.1, 20)
    with pytest.raises(OutOfRangeError):
        extend_grid(plan, grid)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.floats(0.0, 5.0))
def test_interpolation_exact_for_low_degree(deg, s):
    vals = np.arange(8.0) ** deg
    out, err = interpolate_normal(vals, [s], 4)
    assert out[0] == pytest.approx(s**deg, abs=1e-9)


def test_zero_extension():
    grid = GridFunction.sample(np.cos, 0.1, 5)
    z = zero_extend(grid)
    assert np.array_equal(z.values[:4], np.zeros(4)) and z.values[4] == 1.0
    S = zero_extend(builtin("const"))
    assert np.array_equal(S(np.array([-1.0, 0.0, 2.0])), [0.0, 1.0, 1.0])


def test_dilation():
    f = builtin("gaussian")
    g = dilate(3.0, f)
    assert g(0.5) == pytest.approx(f(1.5))
    assert g.derivative(2)(0.2) == pytest.approx(9 * f.derivative(2)(0.6))
    with pytest.raises(ValueError):
        dilate(0, f)
    with pytest.raises(ValueError):
        dilate(-1, f)
    grid = GridFunction.sample(lambda x: x, 0.1, 11)
    assert np.allclose(dilate(0.5, grid).values, 0.5 * grid.xn)


def test_plan_validation(family6):
    with pytest.raises(ValueError):
        ExtensionPlan(family6, order=9)
    with pytest.raises(ValueError):
        ExtensionPlan(family6, out_of_range="wrap")
    assert math.isclose(ExtensionPlan(family6, precision="extended").tail_target, 1e-30)
