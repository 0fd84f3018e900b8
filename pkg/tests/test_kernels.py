import math

import numpy as np
import pytest

from maternsg.kernels import (
    KernelEvaluationError,
    Matern1D,
    SeparableKernel,
    cross_matrix,
    eval_1d,
    eval_separable,
    matern_correlation,
)
from oracles import matern_direct


def test_exponential_kernel_value():
    p = Matern1D(nu=0.5, lengthscale=1.0)
    assert eval_1d(p, 0.25, 0.0) == pytest.approx(math.exp(-0.25), rel=1e-14)


def test_diagonal_is_scale_squared_exactly():
    for nu in (0.5, 1.5, 2.5, 3.5, 1.9, math.inf):
        p = Matern1D(nu=nu, lengthscale=0.7, scale=1.3)
        assert eval_1d(p, 0.1, 0.1) == 1.3 * 1.3


def test_nu_3_2_closed_form():
    r = 0.3
    want = (1 + math.sqrt(3) * r) * math.exp(-math.sqrt(3) * r)
    assert eval_1d(Matern1D(1.5, 1.0), 0.3, 0.0) == pytest.approx(want, rel=1e-14)
    # and against direct arbitrary-precision Bessel evaluation
    assert eval_1d(Matern1D(1.5, 1.0), 0.3, 0.0) == pytest.approx(
        matern_direct(1.5, 1.0, r), rel=1e-12
    )


def test_half_integer_forms_match_bessel_oracle():
    rng = np.random.default_rng(5)
    dists = rng.uniform(1e-4, 0.99, 100)
    for nu in (0.5, 1.5, 2.5, 3.5):
        for lam in (1.0, 2.0):
            got = matern_correlation(nu, dists / lam)
            want = np.array([matern_direct(nu, lam, r) for r in dists])
            assert np.max(np.abs(got - want) / want) < 1e-10


def test_general_order_path_matches_bessel_oracle():
    rng = np.random.default_rng(6)
    dists = rng.uniform(1e-4, 0.99, 40)
    for nu in (0.7, 1.0, 2.0, 4.25):
        got = matern_correlation(nu, dists)
        want = np.array([matern_direct(nu, 1.0, r) for r in dists])
        assert np.max(np.abs(got - want) / want) < 1e-10


def test_symmetry_random_pairs():
    rng = np.random.default_rng(7)
    p = Matern1D(nu=2.5, lengthscale=1.5, scale=1.1)
    for x, y in rng.uniform(-0.5, 0.5, (1000, 2)):
        assert eval_1d(p, x, y) == eval_1d(p, y, x)


def test_positive_and_bounded_by_scale_squared():
    rng = np.random.default_rng(8)
    for nu in (0.5, 1.5, 2.5, 1.3, math.inf):
        p = Matern1D(nu=nu, lengthscale=1.0, scale=2.0)
        for x, y in rng.uniform(-0.5, 0.5, (200, 2)):
            v = eval_1d(p, x, y)
            assert 0.0 < v <= 4.0
            assert (v == 4.0) == (x == y)


def test_monotone_decay_in_distance():
    dists = np.sort(np.random.default_rng(9).uniform(0.0, 1.0, 300))
    for nu in (0.5, 1.5, 2.5, 3.5, 2.2, math.inf):
        vals = matern_correlation(nu, dists)
        assert np.all(np.diff(vals) <= 0.0)


def test_gaussian_limit_at_large_order():
    r = np.linspace(0.01, 0.5, 50)
    for lam in (1.0, 2.0):
        got = matern_correlation(1e4, r / lam)
        want = np.exp(-(r**2) / (2 * lam**2))
        assert np.max(np.abs(got - want) / want) < 1e-2


def test_infinite_order_is_squared_exponential():
    p = Matern1D(nu=math.inf, lengthscale=2.0)
    assert eval_1d(p, 0.4, 0.0) == pytest.approx(math.exp(-0.02), rel=1e-14)


def test_separable_is_product_of_dimensions():
    kern = SeparableKernel.from_params((0.5, 0.5), (1.0, 1.0))
    assert eval_separable(kern, (0.25, 0.25), (0.0, 0.0)) == pytest.approx(
        math.exp(-0.5), rel=1e-14
    )
    rng = np.random.default_rng(10)
    kern = SeparableKernel.from_params((0.5, 1.5, 2.5), (1.0, 2.0, 4.0), (1.0, 1.2, 0.9))
    for _ in range(50):
        x, y = rng.uniform(-0.5, 0.5, (2, 3))
        want = math.prod(eval_1d(k, x[j], y[j]) for j, k in enumerate(kern.dims))
        assert eval_separable(kern, x, y) == pytest.approx(want, rel=1e-14)


def test_separable_diagonal_and_1d_reduction():
    kern = SeparableKernel.from_params((1.5, 2.5), (1.0, 2.0), (1.5, 2.0))
    x = np.array([0.1, -0.2])
    assert eval_separable(kern, x, x) == pytest.approx((1.5 * 2.0) ** 2, rel=1e-15)
    one = SeparableKernel.from_params((1.5,), (1.0,))
    assert eval_separable(one, (0.3,), (0.1,)) == eval_1d(one.dims[0], 0.3, 0.1)


def test_cross_matrix_matches_pairwise_eval():
    kern = SeparableKernel.from_params((1.5, 0.5), (2.0, 1.0))
    rng = np.random.default_rng(11)
    X = rng.uniform(-0.5, 0.5, (4, 2))
    Y = rng.uniform(-0.5, 0.5, (3, 2))
    K = cross_matrix(kern, X, Y)
    for i in range(4):
        for j in range(3):
            assert K[i, j] == pytest.approx(eval_separable(kern, X[i], Y[j]), rel=1e-14)


def test_dimension_mismatch_raises():
    kern = SeparableKernel.from_params((1.5, 2.5), (1.0, 1.0))
    with pytest.raises(ValueError):
        eval_separable(kern, (0.1,), (0.0, 0.0))
    with pytest.raises(ValueError):
        cross_matrix(kern, np.zeros((2, 3)), np.zeros((2, 2)))


def test_invalid_parameters_raise():
    with pytest.raises(ValueError):
        Matern1D(nu=1.5, lengthscale=0.0)
    with pytest.raises(ValueError):
        Matern1D(nu=1.5, lengthscale=1.0, scale=-1.0)
    with pytest.raises(ValueError):
        Matern1D(nu=0.0)


def test_general_path_underflow_is_reported():
    # a microscopic lengthscale pushes the value below the smallest double
    p = Matern1D(nu=2.2, lengthscale=1e-9)
    with pytest.raises(KernelEvaluationError):
        p.at_distance(0.5)
