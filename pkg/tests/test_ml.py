import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fockprint import jsonio
from fockprint.dataset import generate_dataset
from fockprint.errors import ConvergenceWarning, DegenerateDataError, DimensionMismatchError, EmptyDataError, LengthMismatchError
from fockprint.ml import (
    ErtModel,
    KernelSpec,
    LearnerConfig,
    Pipeline,
    SvrModel,
    ert_fit,
    ert_predict,
    multi_output_fit,
    multi_output_predict,
    pca_fit,
    regression_metrics,
    summarize,
    svr_fit,
    svr_predict,
)
from fockprint.ml.ert import Tree
from fockprint.ml.pipeline import column_seed
from fockprint.ml.scoring import r2_score


# PCA


def test_pca_line_keeps_one_component(rng):
    t = rng.normal(size=200)
    X = np.outer(t, [1.0, -2.0, 0.5]) + [3.0, 0.0, 1.0]
    model = pca_fit(X, 0.999)
    assert model.n_components == 1
    assert model.transform(X).shape == (200, 1)


def test_pca_full_basis_reconstructs(rng):
    X = rng.normal(size=(50, 6)) @ rng.normal(size=(6, 6))
    model = pca_fit(X, 1.0)
    np.testing.assert_allclose(model.inverse_transform(model.transform(X)), X, atol=1e-8)


def test_pca_isotropic_ratios():
    X = np.random.default_rng(3).normal(size=(20_000, 5))
    model = pca_fit(X, 1.0)
    np.testing.assert_allclose(model.explained_variance_ratio, 0.2, atol=0.01)


def test_pca_mean_maps_to_origin(rng):
    X = rng.normal(size=(30, 4))
    model = pca_fit(X, 0.9)
    np.testing.assert_allclose(model.transform(X.mean(axis=0)), 0.0, atol=1e-12)
    with pytest.raises(DimensionMismatchError):
        model.transform(np.zeros((2, 3)))


def test_pca_degenerate():
    with pytest.raises(DegenerateDataError):
        pca_fit(np.ones((5, 3)))
    with pytest.raises(DegenerateDataError):
        pca_fit(np.ones((1, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 7), st.floats(0.5, 1.0))
def test_pca_invariants(seed, d, target):
    X = np.random.default_rng(seed).normal(size=(40, d)) * np.arange(1, d + 1)
    model = pca_fit(X, target)
    C = model.components
    np.testing.assert_allclose(C @ C.T, np.eye(model.n_components), atol=1e-10)
    r = model.explained_variance_ratio
    assert np.all(np.diff(r) <= 1e-15) and r.sum() <= 1 + 1e-12
    assert r.sum() >= target - 1e-12


def test_pca_preserves_distances_on_patterns():
    X = generate_dataset("tomography", 1, 200, base_seed=21).X
    model = pca_fit(X, 0.999)
    Z = model.transform(X)
    i, j = np.triu_indices(len(X), 1)
    dx = np.linalg.norm(X[i] - X[j], axis=1)
    dz = np.linalg.norm(Z[i] - Z[j], axis=1)
    big = dx > 1e-3 * dx.max()
    assert np.max(np.abs(dz[big] / dx[big] - 1)) < 0.01


# SVR


def test_svr_linear_target():
    x = np.linspace(-1, 1, 21)[:, None]
    y = 3 * x[:, 0] + 1
    model = svr_fit(x, y, KernelSpec("linear"), C=100, epsilon=0.01, tol=1e-6, max_passes=1000)
    assert np.max(np.abs(model.predict(x) - y)) <= 0.01 + 1e-3


@pytest.mark.parametrize("kind", ["rbf", "linear", "polynomial"])
def test_svr_constant_target(kind, rng):
    X = rng.normal(size=(30, 2))
    model = svr_fit(X, np.full(30, 2.5), KernelSpec(kind), epsilon=0.1)
    assert np.all(np.abs(model.predict(rng.normal(size=(10, 2))) - 2.5) <= 0.1)


def test_svr_sine():
    x = np.linspace(0, 1, 200)[:, None]
    y = np.sin(2 * np.pi * x[:, 0])
    model = svr_fit(x, y, KernelSpec("rbf", gamma=10.0), C=10, epsilon=0.05, tol=1e-4, max_passes=1000)
    assert np.mean(np.abs(model.predict(x) - y)) < 0.05 + 0.02


def test_svr_box_and_tube(rng):
    X = rng.normal(size=(80, 3))
    y = np.sin(X[:, 0]) + 0.1 * rng.normal(size=80)
    C, eps = 0.7, 0.1
    model = svr_fit(X, y, KernelSpec("rbf"), C=C, epsilon=eps, tol=1e-6, max_passes=1000)
    assert model.converged
    assert np.all(np.abs(model.dual_coef) <= C + 1e-12)
    resid = np.abs(model.predict(X) - y)
    inside = resid < eps - 1e-3
    sv_rows = {tuple(r) for r in model.support_vectors}
    assert not any(tuple(X[k]) in sv_rows for k in np.flatnonzero(inside))


def test_svr_zero_support_vectors_gives_bias():
    model = SvrModel(KernelSpec("rbf", gamma=1.0), np.zeros((0, 2)), np.zeros(0), 1.25, 1.0, 0.1)
    np.testing.assert_array_equal(svr_predict(model, np.ones((3, 2))), 1.25)


def test_svr_hand_computed_two_vectors():
    sv = np.array([[0.0, 0.0], [1.0, 2.0]])
    model = SvrModel(KernelSpec("rbf", gamma=0.5), sv, np.array([0.75, -0.25]), 0.1, 1.0, 0.1)
    x = np.array([1.0, 0.0])
    want = 0.75 * np.exp(-0.5 * 1.0) - 0.25 * np.exp(-0.5 * 4.0) + 0.1
    assert svr_predict(model, x)[0] == pytest.approx(want, abs=1e-15)
    # at a support vector location the rbf term is exactly the coefficient
    assert svr_predict(model, sv[0])[0] == pytest.approx(0.75 - 0.25 * np.exp(-0.5 * 5.0) + 0.1, abs=1e-15)


def test_svr_polynomial_kernel_formula():
    sv = np.array([[1.0, -1.0]])
    model = SvrModel(KernelSpec("polynomial", gamma=0.5, coef0=2.0, degree=2), sv, np.array([1.5]), 0.0, 1.0, 0.1)
    x = np.array([2.0, 3.0])
    assert svr_predict(model, x)[0] == pytest.approx(1.5 * (0.5 * -1.0 + 2.0) ** 2)


def test_svr_nonconvergence_warns(rng):
    X = rng.normal(size=(50, 2))
    with pytest.warns(ConvergenceWarning):
        model = svr_fit(X, rng.normal(size=50), C=100, epsilon=0.0, tol=1e-12, max_passes=0)
    assert not model.converged and model.kkt_violation > 0


def test_svr_rejects_bad_input(rng):
    with pytest.raises(DimensionMismatchError):
        svr_fit(np.zeros((1, 2)), [1.0])
    with pytest.raises(ValueError):
        svr_fit(rng.normal(size=(5, 2)), np.zeros(5), C=0)
    with pytest.raises(ValueError):
        KernelSpec("sigmoid")
    model = svr_fit(rng.normal(size=(5, 2)), rng.normal(size=5))
    with pytest.raises(DimensionMismatchError):
        model.predict(np.zeros((1, 3)))


# ERT


def test_ert_constant_target(rng):
    model = ert_fit(rng.normal(size=(40, 3)), np.full(40, -1.5), n_trees=5)
    np.testing.assert_array_equal(model.predict(rng.normal(size=(7, 3))), -1.5)


def test_ert_single_sample():
    model = ert_fit(np.array([[0.3, 0.4]]), [2.0], n_trees=3)
    assert all(t.node_count == 1 for t in model.trees)
    np.testing.assert_array_equal(model.predict(np.zeros((2, 2))), 2.0)


def test_ert_step_function():
    rng = np.random.default_rng(4)
    X = rng.random((500, 3))
    y = (X[:, 1] > 0.4).astype(float)
    model = ert_fit(X, y, n_trees=100, seed=1)
    Xt = rng.random((500, 3))
    assert r2_score((Xt[:, 1] > 0.4).astype(float), model.predict(Xt)) > 0.95


def test_ert_interpolates_training_data(rng):
    X = rng.random((120, 4))
    y = X @ [1.0, -2.0, 0.5, 3.0]
    model = ert_fit(X, y, n_trees=10, min_samples_split=2, max_depth=None, seed=3)
    assert r2_score(y, model.predict(X)) == 1.0


def test_ert_determinism_and_averaging(rng):
    X = rng.random((60, 3))
    y = np.sin(4 * X[:, 0]) + X[:, 2]
    a = ert_fit(X, y, n_trees=8, max_features=2, seed=9)
    b = ert_fit(X, y, n_trees=8, max_features=2, seed=9, workers=4)
    Xt = rng.random((20, 3))
    np.testing.assert_array_equal(a.predict(Xt), b.predict(Xt))
    assert jsonio.dumps(a.to_dict()) == jsonio.dumps(b.to_dict())
    np.testing.assert_allclose(a.predict(Xt), np.mean([t.predict(Xt) for t in a.trees], axis=0), rtol=0, atol=0)
    one = ErtModel(a.trees[:1], 3, 1, 2, 2, None, 9)
    np.testing.assert_array_equal(one.predict(Xt), a.trees[0].predict(Xt))
    doubled = ErtModel(a.trees + a.trees, 3, 16, 2, 2, None, 9)
    np.testing.assert_allclose(doubled.predict(Xt), a.predict(Xt), atol=1e-15)


def _check_thresholds(tree: Tree, X, node=0, idx=None):
    idx = np.arange(len(X)) if idx is None else idx
    f = tree.feature[node]
    if f < 0:
        return
    col = X[idx, f]
    assert col.min() < tree.threshold[node] < col.max()
    go = col < tree.threshold[node]
    _check_thresholds(tree, X, tree.left[node], idx[go])
    _check_thresholds(tree, X, tree.right[node], idx[~go])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_ert_thresholds_strictly_inside(seed):
    r = np.random.default_rng(seed)
    X = np.round(r.random((40, 3)), 1)
    y = r.normal(size=40)
    model = ert_fit(X, y, n_trees=3, max_features=2, seed=seed)
    for tree in model.trees:
        _check_thresholds(tree, X)


def test_ert_errors():
    with pytest.raises(EmptyDataError):
        ert_fit(np.zeros((0, 2)), [])
    model = ert_fit(np.eye(3), [1.0, 2.0, 3.0], n_trees=2)
    with pytest.raises(DimensionMismatchError):
        ert_predict(model, np.zeros((1, 2)))


# multi-output and metrics


@pytest.mark.parametrize("kind", ["svr", "ert"])
def test_multi_output_matches_per_column(kind, rng):
    X = rng.random((60, 3))
    Y = np.column_stack([X[:, 0] ** 2, np.cos(3 * X[:, 1]), X.sum(axis=1)])
    config = LearnerConfig(kind, kernel=KernelSpec("rbf", gamma=1.0), n_trees=5, seed=4)
    P = multi_output_predict(multi_output_fit(X, Y, config), X)
    for c in range(3):
        if kind == "svr":
            single = svr_fit(X, Y[:, c], config.kernel, config.C, config.epsilon, config.tol, config.max_passes)
        else:
            single = ert_fit(X, Y[:, c], 5, seed=column_seed(4, c))
        np.testing.assert_allclose(P[:, c], single.predict(X), atol=1e-12)


def test_multi_output_column_permutation(rng):
    X = rng.random((40, 2))
    Y = np.column_stack([X[:, 0], -X[:, 1]])
    config = LearnerConfig("svr", kernel=KernelSpec("rbf", gamma=2.0))
    P = multi_output_predict(multi_output_fit(X, Y, config), X)
    Q = multi_output_predict(multi_output_fit(X, Y[:, ::-1], config), X)
    np.testing.assert_allclose(P[:, ::-1], Q, atol=1e-12)
    assert len(multi_output_fit(X, Y[:, 0], config)) == 1


def test_metrics_hand_example():
    s = regression_metrics([0, 1, 2], [0, 1, 5])
    assert s.mae == 1.0 and s.r2 == pytest.approx(-3.5)


def test_metrics_perfect_and_mean():
    y = np.array([1.0, 4.0, 2.0, 8.0])
    s = regression_metrics(y, y)
    assert s.mae == 0.0 and s.r2 == 1.0
    assert regression_metrics(y, np.full(4, y.mean())).r2 == pytest.approx(0.0, abs=1e-15)


def test_metrics_constant_truth_flagged():
    s = regression_metrics([1.0, 1.0], [1.0, 2.0])
    assert not s.r2_defined and np.isnan(s.r2)
    with pytest.raises(LengthMismatchError):
        regression_metrics([1.0], [1.0, 2.0])


def test_summary_statistics():
    s = summarize([1.0, 2.0, 3.0, 4.0])
    assert list(s) == ["mean", "std", "min", "25%", "50%", "75%", "max"]
    assert s["25%"] == 1.75 and s["50%"] == 2.5 and s["75%"] == 3.25
    assert s["std"] == pytest.approx(np.std([1, 2, 3, 4], ddof=1))


# serialisation


@pytest.mark.parametrize("kind,pca", [("svr", None), ("svr", 0.99), ("ert", None), ("ert", 0.99)])
def test_pipeline_json_round_trip(kind, pca, rng):
    X = rng.random((50, 4))
    Y = np.column_stack([X[:, 0], X[:, 1] * X[:, 2]])
    config = LearnerConfig(kind, n_trees=4, seed=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        model = Pipeline.fit(X, Y, config, pca_variance=pca, meta={"kind": "x"})
    text = jsonio.dumps(model.to_dict())
    back = Pipeline.from_dict(jsonio.loads(text))
    np.testing.assert_array_equal(back.predict(X), model.predict(X))
    assert jsonio.dumps(back.to_dict()) == text
