import numpy as np
import pytest
from sklearn.base import clone

from seeleyext.estimator import SeeleyExtension


def test_params_round_trip():
    est = SeeleyExtension(kind="seeley", kmax=3, h=0.05)
    twin = clone(est)
    assert twin.get_params() == est.get_params()


def test_fit_transform_reproduces_quadratic():
    # the finite family only reads nodes inside the sampled range
    h = 0.02
    X = np.vstack([(h * np.arange(200)) ** 2, 2 + (h * np.arange(200)) ** 2])
    est = SeeleyExtension(kind="finite-dyadic", kmax=2, h=h, n_negative=20, out_of_range="error")
    out = est.fit_transform(X)
    xn = h * np.arange(-20, 0)
    assert out.shape == (2, 220)
    assert np.allclose(out[0, :20], xn**2, atol=1e-8)
    assert np.allclose(out[1, :20], 2 + xn**2, atol=1e-8)
    assert np.array_equal(est.inverse_transform(out), X)
    names = est.get_feature_names_out()
    assert names[0] == "xn-20" and names[20] == "xn+0"
    assert "max_stencil_error" in est.report_


def test_shape_mismatch_and_unfitted():
    est = SeeleyExtension(kind="finite-dyadic", kmax=1)
    with pytest.raises(Exception):
        est.transform(np.zeros((1, 5)))
    est.fit(np.zeros((1, 5)))
    with pytest.raises(ValueError):
        est.transform(np.zeros((1, 6)))


def test_bad_kind():
    with pytest.raises(ValueError):
        SeeleyExtension(kind="other").fit()
