import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from maternsg.estimator import SparseGridInterpolator
from maternsg.grids import make_spec, sparse_grid_nodes
from maternsg.solver import assemble, evaluate_many


def target(X):
    X = np.atleast_2d(X)
    return np.cos(2.0 * X[:, 0]) * np.exp(X[:, 1])


def test_fit_predict_matches_direct_assembly():
    est = SparseGridInterpolator(level=4, family="LISG", nu=(1.5, 2.5), penalty=(0, 1))
    X = est.design_points(2)
    est.fit(X, target(X))
    spec = make_spec("LISG", 2, 4, (1.5, 2.5), kernel_p=(0, 1))
    direct = assemble(spec, target)
    Q = np.random.default_rng(41).uniform(-0.5, 0.5, (50, 2))
    assert np.array_equal(est.predict(Q), evaluate_many(direct, Q))


def test_fit_reproduces_observations():
    est = SparseGridInterpolator(level=3, family="ISG", nu=1.5)
    X = est.design_points(2)
    y = target(X)
    pred = est.fit(X, y).predict(X)
    assert np.max(np.abs(pred - y) / (1.0 + np.abs(y))) <= 1e-8


def test_extra_rows_are_ignored_and_order_is_free():
    est = SparseGridInterpolator(level=2, family="ISG", nu=1.5)
    X = est.design_points(2)
    rng = np.random.default_rng(42)
    perm = rng.permutation(len(X))
    extra = rng.uniform(-0.4, 0.4, (5, 2))
    X_all = np.vstack([extra, X[perm]])
    y_all = np.concatenate([np.zeros(5), target(X)[perm]])
    a = est.fit(X_all, y_all).predict(X)
    b = SparseGridInterpolator(level=2, family="ISG", nu=1.5).fit(X, target(X)).predict(X)
    assert np.array_equal(a, b)


def test_missing_design_node_raises():
    est = SparseGridInterpolator(level=3, family="ISG", nu=1.5)
    X = est.design_points(2)
    with pytest.raises(ValueError, match="design nodes"):
        est.fit(X[:-1], target(X[:-1]))


def test_fit_function_equivalent_to_fit():
    est1 = SparseGridInterpolator(level=3, family="DASG", nu=(1.5, 2.5),
                                  penalty=(1, 2), omega=(2.0, 1.0))
    est2 = clone(est1)
    X = est1.design_points(2)
    est1.fit(X, target(X))
    est2.fit_function(target, 2)
    Q = np.random.default_rng(43).uniform(-0.5, 0.5, (20, 2))
    assert np.array_equal(est1.predict(Q), est2.predict(Q))


def test_design_points_are_the_grid_nodes():
    est = SparseGridInterpolator(level=3, family="ISG", nu=1.5)
    X = est.design_points(2)
    nodes = sparse_grid_nodes(make_spec("ISG", 2, 3, 1.5))
    assert X.shape == (len(nodes), 2)
    assert [tuple(row) for row in X] == [tuple(p.value for p in n) for n in nodes]


def test_sklearn_protocol():
    est = SparseGridInterpolator(level=2, family="ASG", nu=1.5, omega=(2.0, 1.0))
    params = est.get_params()
    assert params["family"] == "ASG" and params["level"] == 2
    est2 = clone(est).set_params(level=3)
    assert est2.get_params()["level"] == 3
    with pytest.raises(NotFittedError):
        est.predict(np.zeros((1, 2)))


def test_predict_checks_feature_count():
    est = SparseGridInterpolator(level=2, family="ISG", nu=1.5)
    est.fit_function(target, 2)
    with pytest.raises(ValueError):
        est.predict(np.zeros((3, 4)))


def test_mismatched_lengths_rejected():
    est = SparseGridInterpolator(level=2, family="ISG", nu=1.5)
    X = est.design_points(2)
    with pytest.raises(ValueError):
        est.fit(X, np.zeros(len(X) - 1))


def test_score_is_high_on_design():
    est = SparseGridInterpolator(level=4, family="ISG", nu=1.5)
    X = est.design_points(1)
    y = target(np.column_stack([X[:, 0], np.zeros(len(X))]))
    est.fit(X, y)
    assert est.score(X, y) > 0.999999
