import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seeleyext import (
    BoundarySequence,
    CoefficientFamily,
    PrecisionContext,
    dyadic_finite_coefficients,
    fixed_point_coefficients,
    moment_report,
    seeley_one_sided_coefficients,
    vandermonde_coefficients,
)
from seeleyext.coeffs import (
    contraction_constant,
    family_constant,
    fixed_point_boundary_data,
    interpolant_eval,
    interpolation_sum_bound,
    taylor_coefficients,
    weierstrass_derivative_at_node,
    weierstrass_eval,
)
from seeleyext.exceptions import (
    DuplicateNodeError,
    MomentValidationError,
    PrecisionError,
)

from . import oracles

CTX = PrecisionContext()


def test_contraction_constant_value():
    assert contraction_constant(4) == pytest.approx(64 * math.exp(2 / 3) / 165, rel=1e-15)
    assert 0.755 < contraction_constant(4) < 0.75550


def test_contraction_constant_needs_beta_above_two():
    with pytest.raises(ValueError):
        contraction_constant(2)


@pytest.mark.parametrize("z", [0.3, -2.5, 17.0, mp.mpf(4) ** -3])
def test_weierstrass_matches_direct_product(z):
    with mp.workprec(CTX.bits):
        got = weierstrass_eval(4, z, CTX)
        ref = oracles.weierstrass(4, mp.mpf(z))
        # the dropped factors are certified by tail_bound
        assert abs(got.value - ref) <= got.tail_bound * abs(ref) + mp.mpf(10) ** -100
    assert got.tail_bound < 1e-30


def test_weierstrass_rejects_short_product():
    with pytest.raises(PrecisionError):
        weierstrass_eval(4, 4.0**40, PrecisionContext(jmax=1, product_terms=20))


@pytest.mark.parametrize("k", [0, 1, 3, 7])
def test_weierstrass_slope_at_nodes(k):
    with mp.workprec(CTX.bits):
        got = weierstrass_derivative_at_node(4, k, CTX)
        ref = oracles.weierstrass_slope(4, k)
        assert abs(got / ref - 1) < 1e-55


def test_interpolant_hits_nodes():
    u = BoundarySequence((0.5, -1, 1, -1, 1), 4)
    for m, um in enumerate(u.entries):
        assert interpolant_eval(u, mp.mpf(4) ** m, CTX) == um


def test_sum_bound_matches_direct_oracle():
    for l in (1, 2, 5):
        with mp.workprec(CTX.bits):
            got = interpolation_sum_bound(4, l, 30, CTX)
            ref = oracles.sum_bound(4, l, 30)
            assert abs(got - ref) < 1e-50


def test_taylor_paths_agree():
    u = BoundarySequence((0.5, -1, 1, -1, 1, -1), 4)
    prod = taylor_coefficients(u, 12, CTX, method="product")
    div = taylor_coefficients(u, 12, CTX, method="division")
    for x, y in zip(prod, div):
        assert abs(x - y) <= mp.mpf(10) ** -60 * max(1, abs(x))


def test_fixed_point_solves_its_equation():
    trace = fixed_point_boundary_data(CTX, 10)
    u = trace.u
    assert u.entries[0] == mp.mpf(1) / 2
    with mp.workprec(CTX.bits):
        for l in range(1, 10):
            resid = u.entries[l] - ((-1) ** l - interpolant_eval(u, mp.mpf(4) ** -l, CTX))
            assert abs(resid) < mp.mpf(10) ** -60
    assert trace.max_ratio <= 0.756


def test_two_sided_family_shape(family6):
    idx = family6.indices
    assert idx == tuple(range(-20, 21))
    a = dict(zip(idx, family6.a))
    with mp.workprec(512):
        assert a[0] == 2 * family6.meta["taylor"][0]
    assert all(a[j] == a[-j] for j in range(1, 21))
    assert all(family6.b[i] == mp.mpf(4) ** j for i, j in enumerate(idx))


def test_two_sided_moments_against_oracle(family6):
    with mp.workprec(512):
        for k in range(-6, 7):
            assert abs(oracles.moment(family6.a, family6.b, k) - 1) <= 1e-30


def test_seeley_family_moments(seeley3):
    assert seeley3.kind == "one-sided-seeley"
    with mp.workprec(512):
        for k in range(0, 4):
            assert abs(oracles.moment(seeley3.a, seeley3.b, k) - 1) <= 1e-30
        # negative moments are not matched by a one-sided family
        assert abs(oracles.moment(seeley3.a, seeley3.b, -1) - 1) > 1e-3


def test_hestenes_pair():
    fam = vandermonde_coefficients((1, 2), 0, 1)
    assert fam.a == (3, -2)
    assert [int(x) for x in fam.a] == [int(x) for x in oracles.exact_vandermonde((1, 2), (0, 1))]


def test_dyadic_m1():
    fam = dyadic_finite_coefficients(1, 1)
    for got, want in zip(fam.a, (-5, 10, -4)):
        assert abs(got - want) < 1e-20


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=2, max_size=5, unique=True), st.data())
def test_vandermonde_matches_exact_solve(nodes, data):
    M1 = data.draw(st.integers(0, len(nodes) - 1))
    M2 = len(nodes) - 1 - M1
    b = [mp.mpf(x) / 8 for x in nodes]
    fam = vandermonde_coefficients(b, M1, M2)
    ref = oracles.exact_vandermonde([Fraction(x, 8) for x in nodes], range(-M1, M2 + 1))
    with mp.workprec(512):
        for got, want in zip(fam.a, ref):
            assert abs(got - mp.mpf(want.numerator) / want.denominator) <= 1e-25 * max(1, abs(float(want)))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 4), st.floats(0.25, 8.0))
def test_dyadic_moments_property(m, r):
    fam = dyadic_finite_coefficients(m, r)
    with mp.workprec(512):
        for k in range(-m, m + 1):
            assert abs(oracles.moment(fam.a, fam.b, k) - 1) <= 1e-25


def test_duplicate_nodes_rejected():
    with pytest.raises(DuplicateNodeError):
        vandermonde_coefficients((1, 1, 2), 1, 1)


def test_precision_guard():
    with pytest.raises(PrecisionError):
        fixed_point_coefficients(PrecisionContext(bits=64), 10)


def test_short_cutoff_fails_validation():
    with pytest.raises(MomentValidationError) as info:
        fixed_point_coefficients(PrecisionContext(jmax=6), 6)
    assert info.value.report is not None and not info.value.report.passed


def test_moment_report_rows(family6):
    rep = moment_report(family6, (-6, 6))
    assert rep.passed
    assert [r.k for r in rep.rows] == list(range(-6, 7))
    assert all(r.weighted_tail >= r.unweighted_tail for r in rep.rows)


def test_json_round_trip(tmp_path, family6):
    path = tmp_path / "fam.json"
    family6.to_json(path)
    back = CoefficientFamily.from_json(path)
    assert back.id == family6.id
    assert back.moment_range == (-6, 6)
    with mp.workprec(512):
        assert all(abs(x - y) < mp.mpf(10) ** -140 for x, y in zip(back.a, family6.a))


def test_family_constant_limits(family6):
    a, b = family6.as_float()
    w = 2.0 ** (0.5 * np.abs(np.array(family6.indices)))
    assert family_constant(family6, 0, math.inf) == pytest.approx(float((2 * w * abs(a)).sum()))
    # a_{-j} = a_j and b_{-j} = 1/b_j make the k = 0 and k = 1 sums coincide at p = 2
    assert family_constant(family6, 1, 2) == pytest.approx(family_constant(family6, 0, 2), rel=1e-14)
    assert family_constant(family6, 2, 2) > family_constant(family6, 1, 2)
