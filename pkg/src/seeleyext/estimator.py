"""scikit-learn style front end for grid extension.

``fit`` synthesizes a coefficient family; ``transform`` extends rows of
half-grid samples.  Each row is one tangential position ``x'``; its columns
are the normal nodes ``0, h, 2h, ...``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .coeffs import dyadic_finite_coefficients, fixed_point_coefficients, seeley_one_sided_coefficients
from .functions import GridFunction
from .operator import POLICIES, ExtensionPlan, extend_grid
from .precision import PrecisionContext

KINDS = ("two-sided", "seeley", "finite-dyadic")


class SeeleyExtension(TransformerMixin, BaseEstimator):
    """Reflection extension of half-grid samples across ``x_n = 0``.

    Parameters
    ----------
    kind : {"two-sided", "seeley", "finite-dyadic"}
    bits, jmax : int
        Precision settings for coefficient synthesis.
    kmax : int
        Moment range to validate (``m`` for ``finite-dyadic``).
    h : float
        Normal grid spacing.
    order : int
        Lagrange interpolation order for ray points.
    out_of_range : {"error", "zero-pad", "decay-model"}
    n_negative : int or None
        Number of nodes below the boundary; defaults to ``N - 1``.
    r : float
        Scale of the ``finite-dyadic`` family.

    Attributes
    ----------
    family_ : CoefficientFamily
    n_features_in_ : int
    report_ : dict
        Report of the last ``transform`` call.

    Examples
    --------
    >>> import numpy as np
    >>> est = SeeleyExtension(kind="finite-dyadic", kmax=2, h=0.1, n_negative=3)
    >>> X = (0.1 * np.arange(40)) ** 2
    >>> out = est.fit_transform(X[None, :])
    >>> bool(np.allclose(out[0, :3], [0.09, 0.04, 0.01], atol=1e-9))
    True
    """

    def __init__(self, kind="two-sided", bits=512, jmax=20, kmax=6, h=0.01, order=4,
                 out_of_range="zero-pad", n_negative=None, r=1.0):
        self.kind = kind
        self.bits = bits
        self.jmax = jmax
        self.kmax = kmax
        self.h = h
        self.order = order
        self.out_of_range = out_of_range
        self.n_negative = n_negative
        self.r = r

    def _validate_params(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.out_of_range not in POLICIES:
            raise ValueError(f"out_of_range must be one of {POLICIES}")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not 1 <= self.order <= 8:
            raise ValueError("order must be in 1..8")

    def fit(self, X=None, y=None):
        self._validate_params()
        ctx = PrecisionContext(bits=self.bits, jmax=self.jmax)
        if self.kind == "two-sided":
            self.family_ = fixed_point_coefficients(ctx, self.kmax)
        elif self.kind == "seeley":
            self.family_ = seeley_one_sided_coefficients(ctx, self.kmax)
        else:
            self.family_ = dyadic_finite_coefficients(self.kmax, self.r, ctx)
        if X is not None:
            X = check_array(X, ensure_min_features=2)
            self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Return ``(n_rows, n_negative + N)`` arrays, negative nodes first."""
        check_is_fitted(self, "family_")
        X = check_array(X, ensure_min_features=2)
        if hasattr(self, "n_features_in_") and X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} normal nodes, expected {self.n_features_in_}")
        plan = ExtensionPlan(self.family_, order=self.order, out_of_range=self.out_of_range)
        grid = GridFunction(X, (1.0, self.h), half=True)
        out = extend_grid(plan, grid, self.n_negative)
        self.report_ = out.meta["report"]
        return out.values

    def inverse_transform(self, X):
        """Drop the nodes below the boundary."""
        check_is_fitted(self, "family_")
        X = check_array(X)
        n = self.n_features_in_ if hasattr(self, "n_features_in_") else None
        if n is None:
            raise ValueError("inverse_transform needs fit(X) to know the half-grid width")
        return X[:, X.shape[1] - n :]

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "family_")
        n = self.n_features_in_
        m = n - 1 if self.n_negative is None else self.n_negative
        return np.array([f"xn{i:+d}" for i in range(-m, n)], dtype=object)
