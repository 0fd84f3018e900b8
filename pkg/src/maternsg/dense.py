"""Brute-force reference interpolant on the full sparse-grid design.

Solves the dense N x N Gram system over the deduplicated node set with one
Cholesky factorisation.  Exists purely to verify the fast combination-
technique assembly; it is size-capped and deliberately unoptimised, with no
jitter or regularisation masking conditioning problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg as sla

from .grids import GridSpec, count_nodes, kernel_for, sparse_grid_nodes
from .kernels import SeparableKernel, cross_matrix
from .solver import PDFailure

__all__ = ["SizeGuard", "DenseInterpolant", "DenseSolver", "dense_fit", "dense_evaluate"]

DEFAULT_SIZE_CAP = 5000


class SizeGuard(Exception):
    """Design too large for the dense verification path."""


@dataclass
class DenseInterpolant:
    """Weights of the dense kernel interpolant over an ordered node list."""

    nodes: list
    node_array: np.ndarray
    weights: np.ndarray
    kernel: SeparableKernel


class DenseSolver:
    """Factorise the dense Gram matrix once, fit any number of targets."""

    def __init__(self, spec: GridSpec, size_cap: int = DEFAULT_SIZE_CAP):
        n = count_nodes(spec)
        if n > size_cap:
            raise SizeGuard(f"design has {n} nodes, dense path capped at {size_cap}")
        self.spec = spec
        self.kernel = kernel_for(spec)
        self.nodes = sparse_grid_nodes(spec)
        self.node_array = np.array(
            [[p.value for p in node] for node in self.nodes]
        ).reshape(len(self.nodes), spec.d)
        gram = cross_matrix(self.kernel, self.node_array, self.node_array)
        try:
            self._cho = sla.cho_factor(gram, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            raise PDFailure(-1, spec.level, len(self.nodes)) from None

    def fit(self, sampler: Callable) -> DenseInterpolant:
        values = np.asarray(sampler(self.node_array), dtype=float).reshape(-1)
        if values.shape[0] != len(self.nodes):
            raise ValueError("sampler must return one value per node")
        weights = sla.cho_solve(self._cho, values, check_finite=False)
        return DenseInterpolant(
            nodes=self.nodes,
            node_array=self.node_array,
            weights=weights,
            kernel=self.kernel,
        )


def dense_fit(
    spec: GridSpec, sampler: Callable, size_cap: int = DEFAULT_SIZE_CAP
) -> DenseInterpolant:
    """Fit the dense reference interpolant for one target function."""
    return DenseSolver(spec, size_cap=size_cap).fit(sampler)


def dense_evaluate(interp: DenseInterpolant, X) -> np.ndarray:
    """Dense interpolant values at the rows of ``X`` (m, d); scalar for (d,)."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != interp.kernel.d:
        raise ValueError(
            f"points must have {interp.kernel.d} coordinates, got {X.shape[1]}"
        )
    out = cross_matrix(interp.kernel, X, interp.node_array) @ interp.weights
    return float(out[0]) if single else out
