import numpy as np
import pytest
from scipy.optimize import minimize

from popgcn.errors import IllPosedError
from popgcn.features import (
    RidgeModel,
    apply_scaler,
    fit_scaler,
    ridge_fit,
    ridge_predict,
    select_features,
)


def iterative_ridge(X, y, alpha):
    """Reference minimizer of ||Xw + b - y||^2 + alpha ||w||^2 by BFGS with analytic gradients."""

    def f(params):
        w, b = params[:-1], params[-1]
        r = X @ w + b - y
        return r @ r + alpha * w @ w, np.append(2 * X.T @ r + 2 * alpha * w, 2 * r.sum())

    res = minimize(f, np.zeros(X.shape[1] + 1), jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 10000})
    return res.x[:-1], res.x[-1]


def test_identity_design_interpolates():
    y = np.array([1.0, -1.0, 1.0])
    model = ridge_fit(np.eye(3), y, alpha=0.0, fit_intercept=False)
    assert np.allclose(model.weights, y, atol=1e-14)
    assert model.bias == 0.0
    _, classes = ridge_predict(model, np.eye(3))
    assert np.array_equal(classes, [1, 0, 1])


def test_infinite_shrinkage_predicts_majority():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 4))
    y = np.where(np.arange(30) < 20, 1.0, -1.0)
    model = ridge_fit(X, y, alpha=1e12)
    assert np.max(np.abs(model.weights)) < 1e-9
    _, classes = ridge_predict(model, X)
    assert np.all(classes == 1)


@pytest.mark.parametrize("shape", [(20, 5), (8, 15)])
def test_closed_form_matches_iterative_minimizer(shape):
    rng = np.random.default_rng(shape[1])
    X = rng.standard_normal(shape)
    y = np.where(rng.random(shape[0]) < 0.5, 1.0, -1.0)
    model = ridge_fit(X, y, alpha=0.7)
    w, b = iterative_ridge(X, y, 0.7)
    assert np.allclose(model.weights, w, atol=1e-6)
    assert model.bias == pytest.approx(b, abs=1e-6)


def test_singular_unregularized_system():
    X = np.ones((5, 2))
    with pytest.raises(IllPosedError, match="increase alpha"):
        ridge_fit(X, np.array([1, -1, 1, -1, 1.0]), alpha=0.0)


def test_predict_constant_and_sign_invariance():
    model = RidgeModel(np.zeros(3), 0.5, 1.0)
    _, classes = ridge_predict(model, np.random.default_rng(1).standard_normal((4, 3)))
    assert np.all(classes == 1)
    rng = np.random.default_rng(2)
    X = rng.standard_normal((10, 3))
    m = RidgeModel(rng.standard_normal(3), 0.0, 1.0)
    s1, c1 = ridge_predict(m, X)
    s2, c2 = ridge_predict(m, 2 * X)
    assert np.allclose(s2, 2 * s1) and np.array_equal(c1, c2)


def test_scaler():
    X = np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
    sc = fit_scaler(X)
    Z = apply_scaler(sc, X)
    assert np.array_equal(Z[:, 1], [0.0, 0.0, 0.0])
    assert abs(Z[:, 0].mean()) < 1e-10 and abs(Z[:, 0].std() - 1) < 1e-10
    assert np.allclose(apply_scaler(fit_scaler(Z[:, :1]), Z[:, :1]), Z[:, :1], atol=1e-12)


def test_planted_feature_is_selected():
    successes = 0
    for trial in range(100):
        rng = np.random.default_rng(trial)
        y = rng.integers(0, 2, 60)
        X = rng.standard_normal((60, 20))
        planted = int(rng.integers(0, 20))
        X[:, planted] = y
        sel = select_features(X, y, alpha=1.0, C_out=1)
        successes += sel.kept_indices.tolist() == [planted]
    assert successes >= 99


def test_selection_edge_cases():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((30, 6))
    y = rng.integers(0, 2, 30)
    assert np.array_equal(select_features(X, y, C_out=6).kept_indices, np.arange(6))
    with pytest.raises(ValueError, match="cannot select more features"):
        select_features(X, y, C_out=7)
    # an exact duplicate column gets the same weight; the lower index wins the tie
    X[:, 4] = X[:, 1] + 3 * (2 * y - 1)
    X[:, 5] = X[:, 4]
    assert select_features(X, y, alpha=1.0, C_out=1).kept_indices.tolist() == [4]


def test_selection_ignores_held_out_rows():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((50, 12))
    y = rng.integers(0, 2, 50)
    a = select_features(X[:40], y[:40], C_out=4)
    X2 = X.copy()
    X2[40:] = np.nan
    b = select_features(X2[:40], y[:40], C_out=4)
    assert np.array_equal(a.kept_indices, b.kept_indices)


def test_rfe_selects_planted_features_deterministically():
    rng = np.random.default_rng(5)
    y = rng.integers(0, 2, 80)
    X = rng.standard_normal((80, 30))
    X[:, [3, 17]] += 2.5 * (2 * y[:, None] - 1)
    sel = select_features(X, y, C_out=2, method="rfe")
    assert sel.kept_indices.tolist() == [3, 17]
    again = select_features(X, y, C_out=2, method="rfe")
    assert np.array_equal(sel.kept_indices, again.kept_indices)
