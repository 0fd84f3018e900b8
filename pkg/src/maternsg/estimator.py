"""Scikit-learn style front end for sparse-grid kernel interpolation.

A sparse-grid interpolant chooses its own sample locations, so ``fit(X, y)``
expects the design nodes (or a superset) among the rows of ``X``; use
:meth:`SparseGridInterpolator.design_points` to obtain them, or
:meth:`fit_function` to sample a callable directly.  Node matching is exact:
the design nodes are dyadic rationals, which IEEE doubles represent
without rounding.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .grids import DyadicPoint, make_spec, sparse_grid_nodes
from .solver import assemble, evaluate_many

__all__ = ["SparseGridInterpolator"]


class SparseGridInterpolator(BaseEstimator, RegressorMixin):
    """Interpolate a function on a sparse grid of separable Matern kernels.

    Parameters
    ----------
    level : int
        Resolution level of the design; the node count grows with it.
    family : str
        One of ``ISG``, ``ASG``, ``LISG``, ``DASG``.
    nu : float or sequence of float
        Per-dimension kernel regularity (1/2, 3/2, 5/2, 7/2 use closed
        forms; ``inf`` is the squared-exponential limit).
    penalty : int or sequence of int
        Per-dimension lengthscale exponents; kernel lengthscales are
        ``2**penalty``.  LISG/DASG designs also delay point growth by the
        same exponents.
    omega : float or sequence of float, optional
        Per-dimension level weights for ASG/DASG designs; defaults to 1.
    tuning : int or sequence of int
        Reduces the LISG/DASG growth delay to ``max(penalty - tuning, 0)``.
    sigma : float or sequence of float
        Kernel scale per dimension; predictions do not depend on it.

    Examples
    --------
    >>> est = SparseGridInterpolator(level=4, family="ISG", nu=1.5)
    >>> X = est.design_points(2)
    >>> est.fit(X, np.cos(X).prod(axis=1)).predict(X[:3]).shape
    (3,)
    """

    def __init__(
        self,
        level: int = 2,
        family: str = "ISG",
        nu=1.5,
        penalty=0,
        omega=None,
        tuning=0,
        sigma=1.0,
    ):
        self.level = level
        self.family = family
        self.nu = nu
        self.penalty = penalty
        self.omega = omega
        self.tuning = tuning
        self.sigma = sigma

    def _spec(self, d: int):
        return make_spec(
            self.family,
            d,
            self.level,
            self.nu,
            kernel_p=self.penalty,
            omega=self.omega,
            tuning=self.tuning,
            sigma=self.sigma,
        )

    def design_points(self, n_features: int) -> np.ndarray:
        """Coordinates of the design nodes this estimator must be fit on."""
        nodes = sparse_grid_nodes(self._spec(n_features))
        return np.array([[p.value for p in node] for node in nodes]).reshape(
            len(nodes), n_features
        )

    def fit(self, X, y):
        """Fit from values ``y`` observed at points ``X`` covering the design.

        Every design node must appear among the rows of ``X`` exactly;
        extra rows are ignored.
        """
        X = check_array(X, ensure_2d=True, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise ValueError(
                f"X and y length mismatch: {X.shape[0]} rows vs {y.shape[0]} values"
            )
        d = X.shape[1]
        spec = self._spec(d)
        table = {
            tuple(DyadicPoint.from_float(v) for v in row): val
            for row, val in zip(X, y)
        }
        design = sparse_grid_nodes(spec)
        missing = [node for node in design if node not in table]
        if missing:
            shown = " ".join(str(p) for p in missing[0])
            raise ValueError(
                f"{len(missing)} design nodes have no observed value, e.g. ({shown});"
                " sample X = design_points(d) or use fit_function"
            )

        def sampler(coords):
            keys = [tuple(DyadicPoint.from_float(v) for v in row) for row in coords]
            return np.array([table[k] for k in keys])

        self.interpolant_ = assemble(spec, sampler)
        self.spec_ = spec
        self.n_features_in_ = d
        self.n_nodes_ = len(design)
        return self

    def fit_function(self, func, n_features: int):
        """Fit by sampling ``func`` on the design directly.

        ``func`` receives an ``(m, d)`` array and must return ``m`` values.
        """
        spec = self._spec(n_features)
        self.interpolant_ = assemble(spec, func)
        self.spec_ = spec
        self.n_features_in_ = n_features
        self.n_nodes_ = self.interpolant_.n_nodes
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "interpolant_")
        X = check_array(X, ensure_2d=True, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, fit used {self.n_features_in_}"
            )
        return evaluate_many(self.interpolant_, X)
