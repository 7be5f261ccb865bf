"""scikit-learn style wrapper around operator assembly and the semigroup.

``fit`` takes a mesh (the "data" that fixes the discrete space) and computes
the spectrum; ``transform`` maps initial data, one nodal vector per row, to
``T(t) f``. Parameters are plain constructor arguments so ``get_params``,
``set_params`` and ``clone`` work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .coefficients import ProblemData
from .dynamics import semigroup_apply
from .geometry import Mesh
from .spectral import build_operator, kernel_classify, solve_spectrum


class WentzellBiLaplacian(TransformerMixin, BaseEstimator):
    """Fourth-order evolution with dynamic boundary conditions on a fixed mesh.

    Parameters
    ----------
    alpha, beta, gamma : number or field spec
    eta : float
        Lower bound required of alpha and beta.
    n_eigs : int or None
        Number of eigenpairs kept; None keeps the full discrete spectrum.
    t : float
        Evolution time used by ``transform``.
    """

    def __init__(self, alpha=1.0, beta=1.0, gamma=0.0, eta=1e-3, n_eigs=None, t=0.0):
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.eta = eta
        self.n_eigs = n_eigs
        self.t = t

    def fit(self, X, y=None):
        if not isinstance(X, Mesh):
            raise TypeError(f"fit expects a Mesh, got {type(X).__name__}")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        data = ProblemData(self.alpha, self.beta, self.gamma, self.eta)
        self.operator_ = build_operator(X, data)
        self.spectrum_ = solve_spectrum(self.operator_, self.n_eigs)
        self.eigenvalues_ = self.spectrum_.eigenvalues
        self.n_features_in_ = X.n_nodes
        return self

    def transform(self, X):
        check_is_fitted(self, "spectrum_")
        F = check_array(X, dtype=np.float64)
        if F.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} nodal values per row, got {F.shape[1]}")
        return semigroup_apply(self.spectrum_, F.T, self.t).T

    def kernel_class(self):
        check_is_fitted(self, "spectrum_")
        return kernel_classify(self.operator_, self.spectrum_)
