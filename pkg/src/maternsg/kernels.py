"""One-dimensional and separable Matern kernels on the centred unit cube.

A one-dimensional Matern kernel with regularity ``nu``, lengthscale
``lengthscale`` and scale ``scale`` is

    phi(x, x') = scale^2 * c_nu(|x - x'| / lengthscale),

where ``c_nu`` is the Matern correlation function.  Regularities
1/2, 3/2, 5/2 and 7/2 use the exact closed forms (exponential times a
polynomial); ``nu = inf`` selects the squared-exponential limit
``exp(-rho^2 / 2)``; every other positive ``nu`` is evaluated through the
modified Bessel function of the second kind, switching to a large-order
uniform asymptotic where the Bessel factor overflows double precision.

Separable kernels in ``d`` dimensions are plain products of per-dimension
one-dimensional kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special as sc

__all__ = [
    "KernelEvaluationError",
    "Matern1D",
    "SeparableKernel",
    "matern_correlation",
    "eval_1d",
    "eval_separable",
    "cross_matrix",
]

_LN2 = math.log(2.0)

# Distances below this are treated as a coincident pair on the general-order
# path; the correlation deviates from 1 by at most O(t^(2*nu)) there.
_TINY_ARG = 1e-12


class KernelEvaluationError(ArithmeticError):
    """General-order Bessel evaluation produced a non-finite value."""


def _corr_exponential(rho):
    return np.exp(-rho)


def _corr_nu_3_2(rho):
    t = math.sqrt(3.0) * rho
    return (1.0 + t) * np.exp(-t)


def _corr_nu_5_2(rho):
    t = math.sqrt(5.0) * rho
    return (1.0 + t + t * t / 3.0) * np.exp(-t)


def _corr_nu_7_2(rho):
    t = math.sqrt(7.0) * rho
    return (1.0 + t + 2.0 * t * t / 5.0 + t * t * t / 15.0) * np.exp(-t)


def _corr_gaussian(rho):
    return np.exp(-0.5 * rho * rho)


_CLOSED_FORMS = {
    0.5: _corr_exponential,
    1.5: _corr_nu_3_2,
    2.5: _corr_nu_5_2,
    3.5: _corr_nu_7_2,
}


def _log_kv_large_order(nu, t):
    """log K_nu(t) by the leading term of the large-order uniform asymptotic."""
    z = t / nu
    s = np.sqrt(1.0 + z * z)
    eta = s + np.log(z / (1.0 + s))
    return 0.5 * np.log(np.pi / (2.0 * nu)) - nu * eta - 0.5 * np.log(s)


def _corr_general(nu, rho):
    # 2^(1-nu)/Gamma(nu) * t^nu * K_nu(t) with t = sqrt(2 nu) rho, assembled in
    # log space because t^nu and K_nu(t) over/underflow long before the product.
    t = math.sqrt(2.0 * nu) * np.asarray(rho, dtype=float)
    out = np.ones_like(t)
    m = t > _TINY_ARG
    if not np.any(m):
        return out
    tm = t[m]
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        kve = sc.kve(nu, tm)
        log_k = np.where(kve > 0.0, np.log(kve) - tm, np.inf)
    big = ~np.isfinite(log_k)
    if np.any(big):
        log_k[big] = _log_kv_large_order(nu, tm[big])
    log_c = (1.0 - nu) * _LN2 - sc.gammaln(nu) + nu * np.log(tm) + log_k
    vals = np.exp(log_c)
    if not np.all(np.isfinite(vals)) or np.any(vals == 0.0):
        raise KernelEvaluationError(
            f"Bessel evaluation over- or underflowed for nu={nu} at scaled "
            f"distance {float(np.max(tm)):g}"
        )
    out[m] = vals
    return out


def matern_correlation(nu: float, rho) -> np.ndarray:
    """Matern correlation c_nu at normalised distances rho = |x - x'|/lengthscale.

    ``rho`` may be a scalar or an array; the result has the same shape.
    ``c_nu(0) == 1`` exactly on every path.
    """
    rho = np.asarray(rho, dtype=float)
    closed = _CLOSED_FORMS.get(nu)
    if closed is not None:
        return closed(rho)
    if math.isinf(nu):
        return _corr_gaussian(rho)
    return _corr_general(nu, rho)


@dataclass(frozen=True)
class Matern1D:
    """Parameters of a one-dimensional Matern kernel.

    ``nu`` is the regularity (``math.inf`` selects the squared-exponential
    limit), ``lengthscale`` and ``scale`` must be positive.  The kernel value
    at coincident points is exactly ``scale**2``.  Interpolation weights do
    not depend on ``scale``; it is carried for completeness.
    """

    nu: float
    lengthscale: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.nu > 0.0:
            raise ValueError(f"regularity nu must be positive, got {self.nu}")
        if not self.lengthscale > 0.0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def at_distance(self, r) -> np.ndarray:
        """Kernel value at absolute distances ``r`` (scalar or array)."""
        rho = np.asarray(r, dtype=float) / self.lengthscale
        return (self.scale * self.scale) * matern_correlation(self.nu, rho)


def eval_1d(params: Matern1D, x: float, xp: float) -> float:
    """Evaluate the one-dimensional kernel at a single pair of points."""
    if x == xp:
        return params.scale * params.scale
    return float(params.at_distance(abs(x - xp)))


@dataclass(frozen=True)
class SeparableKernel:
    """Product of per-dimension one-dimensional Matern kernels."""

    dims: tuple[Matern1D, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise ValueError("separable kernel needs at least one dimension")

    @classmethod
    def from_params(
        cls,
        nu: Sequence[float],
        lengthscale: Sequence[float],
        scale: Sequence[float] | None = None,
    ) -> "SeparableKernel":
        if scale is None:
            scale = [1.0] * len(nu)
        if not (len(nu) == len(lengthscale) == len(scale)):
            raise ValueError("per-dimension parameter lists must share one length")
        return cls(tuple(Matern1D(n, l, s) for n, l, s in zip(nu, lengthscale, scale)))

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def diagonal_value(self) -> float:
        """Kernel value at coincident points: the product of the scale squares."""
        return math.prod(k.scale * k.scale for k in self.dims)


def eval_separable(kernel: SeparableKernel, x, xp) -> float:
    """Evaluate the separable kernel at one pair of d-dimensional points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    if x.shape != (kernel.d,) or xp.shape != (kernel.d,):
        raise ValueError(
            f"points must have shape ({kernel.d},), got {x.shape} and {xp.shape}"
        )
    out = 1.0
    for j, k in enumerate(kernel.dims):
        out *= eval_1d(k, float(x[j]), float(xp[j]))
    return out


def cross_matrix(kernel: SeparableKernel, X, Y) -> np.ndarray:
    """Kernel matrix between row-point sets X (m, d) and Y (n, d)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != kernel.d or Y.shape[1] != kernel.d:
        raise ValueError(
            f"expected {kernel.d} coordinates per point, got "
            f"{X.shape[1]} and {Y.shape[1]}"
        )
    out = np.ones((X.shape[0], Y.shape[0]))
    for j, k in enumerate(kernel.dims):
        r = np.abs(X[:, j, None] - Y[None, :, j])
        out *= k.at_distance(r)
    return out
