"""Sparse-grid interpolation with separable Matern kernels.

Builds kernel interpolants on isotropic (ISG), anisotropic (ASG),
lengthscale-informed (LISG) and doubly anisotropic (DASG) sparse-grid
designs via the combination technique, with a dense reference solver,
computable error-bound diagnostics, and a convergence-study harness.
"""

from .bounds import (
    BoundParams,
    BoundValue,
    dasg_bound,
    epsilon_aniso,
    epsilon_iso,
    lisg_bound,
)
from .dense import DenseInterpolant, SizeGuard, dense_evaluate, dense_fit
from .estimator import SparseGridInterpolator
from .experiments import (
    ExperimentRecord,
    TestFunction,
    level_sweep,
    make_test_function,
    relative_l2_error,
)
from .grids import (
    DyadicPoint,
    GridSpec,
    active_set,
    combination_coefficient,
    count_nodes,
    index_set,
    kernel_for,
    make_spec,
    point_set_1d,
    sparse_grid_nodes,
)
from .kernels import Matern1D, SeparableKernel, eval_1d, eval_separable
from .solver import (
    PDFailure,
    SparseInterpolant,
    assemble,
    assemble_telescoping,
    evaluate,
    evaluate_many,
)
from .textio import load_interpolant, save_interpolant

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "BoundValue",
    "DenseInterpolant",
    "DyadicPoint",
    "ExperimentRecord",
    "GridSpec",
    "Matern1D",
    "PDFailure",
    "SeparableKernel",
    "SizeGuard",
    "SparseGridInterpolator",
    "SparseInterpolant",
    "TestFunction",
    "active_set",
    "assemble",
    "assemble_telescoping",
    "combination_coefficient",
    "count_nodes",
    "dasg_bound",
    "dense_evaluate",
    "dense_fit",
    "epsilon_aniso",
    "epsilon_iso",
    "eval_1d",
    "eval_separable",
    "evaluate",
    "evaluate_many",
    "index_set",
    "kernel_for",
    "level_sweep",
    "lisg_bound",
    "load_interpolant",
    "make_spec",
    "make_test_function",
    "point_set_1d",
    "relative_l2_error",
    "save_interpolant",
    "sparse_grid_nodes",
]
