import math

import numpy as np
import pytest

from seeleyext.exceptions import WitnessError
from seeleyext.functions import builtin
from seeleyext.normlab import (
    DecompositionWitness,
    LogQuadrature,
    NormSpec,
    adjoint_duality,
    boundary_smoothness_report,
    callable_inner,
    callable_lp_norm,
    callable_sobolev_norm,
    dilation_growth_probe,
    extension_samples,
    extension_window,
    operator_norm_probe,
    probe_family,
    transport_witness,
)
from seeleyext.operator import ExtensionPlan, extend_callable, extension_function


@pytest.fixture(scope="module")
def family20():
    return probe_family()


def test_gaussian_norms():
    g = builtin("gaussian")
    assert callable_lp_norm(g, 2) == pytest.approx((math.pi / 8) ** 0.25, rel=1e-12)
    assert callable_lp_norm(g, 1) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)
    assert callable_lp_norm(g, 1, full=True) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert callable_lp_norm(g, math.inf) == 1.0
    # ||g'||_1 on the half line is g(0) - g(inf)
    assert callable_sobolev_norm(g, 1, 1) == pytest.approx(math.sqrt(math.pi) / 2 + 1, rel=1e-10)


def test_quadrature_refinement_is_stable():
    g = builtin("exp-decay")
    coarse = callable_lp_norm(g, 0.5, quad=LogQuadrature(du=1 / 64))
    fine = callable_lp_norm(g, 0.5, quad=LogQuadrature(du=1 / 256))
    assert coarse == pytest.approx(fine, rel=1e-10)
    assert fine == pytest.approx(4.0, rel=1e-10)


def test_inner_product():
    g = builtin("gaussian")
    assert callable_inner(g, g, full=False) == pytest.approx(math.sqrt(math.pi / 8), rel=1e-12)


def test_probe_family_members(family20):
    assert len(family20) == 20
    assert len({p.fid for p in family20}) == 20
    for pf in family20:
        f = pf.func
        x = np.array([0.3 * pf.scale, 1.1 * pf.scale])
        h = 1e-5 * pf.scale
        fd = (f(x + h) - f(x - h)) / (2 * h)
        assert np.allclose(f.derivative(1)(x), fd, rtol=1e-5, atol=1e-6 / pf.scale)
        assert abs(float(f(pf.extent))) < 1e-12


def test_probe_family_is_seeded():
    a, b = probe_family(1), probe_family(1)
    assert [float(p.func(0.7)) for p in a] == [float(p.func(0.7)) for p in b]


def test_witness_checks():
    g = builtin("gaussian")
    wit = DecompositionWitness(-1, [(1, g)])
    assert wit.verify(g.derivative(1), [0.2, 0.8]) < 1e-6
    with pytest.raises(WitnessError):
        wit.verify(g, [0.2, 0.8])
    with pytest.raises(ValueError):
        DecompositionWitness(-1, [(2, g)])
    with pytest.raises(ValueError):
        DecompositionWitness(1, [])


def test_transported_witness_represents_extension(plan6):
    g = builtin("gaussian")
    wit = DecompositionWitness(-1, [(1, g)])
    moved = transport_witness(ExtensionPlan(plan6.family, strict=False), wit)
    # E(g') on x < 0 equals d/dx of the transported term
    E_target = extension_function(ExtensionPlan(plan6.family, strict=False), g.derivative(1))
    for x in (-0.3, -1.2):
        assert moved.evaluate(x) == pytest.approx(E_target(x), rel=1e-6)


def test_sobolev_probe_small(plan6, family20):
    rep = operator_norm_probe(ExtensionPlan(plan6.family, strict=False), NormSpec("sobolev", 1, 2), family20[:3])
    assert rep.passed
    assert all(r.ratio <= rep.constant for r in rep.rows)
    d = rep.to_dict()
    assert d["rows"][0]["function-id"] == "gauss-0" and isinstance(d["rows"][0]["ratio"], str)


def test_fast_sampler_agrees_with_callable(plan6, family20):
    pf = family20[0]
    lo, hi, h = extension_window(plan6.family, pf, 2.0)
    assert lo < 0 < hi and h > 0
    x = -np.geomspace(1e-4, 1.0, 9) * pf.extent
    ref = extend_callable(ExtensionPlan(plan6.family, strict=False), pf.func, x)
    assert np.allclose(extension_samples(plan6, pf, x), ref, atol=1e-14)


def test_dilation_slope_l2():
    rep = dilation_growth_probe(NormSpec("lp", 0, 2), builtin("gaussian"))
    assert rep.slope == pytest.approx(-0.5, abs=1e-6)
    assert rep.to_dict()["slope"].startswith("-0.5")


def test_adjoint_duality(plan6):
    lhs, rhs = adjoint_duality(ExtensionPlan(plan6.family, strict=False), builtin("exp-decay"), builtin("gaussian"))
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_boundary_report_exact_for_cubic(family6):
    rep = boundary_smoothness_report(family6, builtin("poly:3"), K=3, stencil_points=4)
    assert rep.passed
    assert max(max(r.mismatch) for r in rep.rows) < 1e-40
