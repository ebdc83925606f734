import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyflam import forest
from polyflam.errors import DomainError, FitError
from polyflam.forest import (
    CLASSIFICATION,
    REGRESSION,
    Hyperparams,
    cross_validate,
    predict,
    predict_labels,
    predict_matrix,
    resolve_max_features,
)

SINGLE_TREE = Hyperparams(n_trees=1, bootstrap=False, max_features="all", seed=0)


def test_separable_single_feature():
    model = forest.fit([[0.0], [1.0]], [0.0, 1.0], REGRESSION, SINGLE_TREE)
    assert predict(model, [0.0]) == 0.0
    assert predict(model, [1.0]) == 1.0


def test_constant_target():
    X = np.random.default_rng(0).normal(size=(20, 3))
    model = forest.fit(X, np.full(20, 7.0), REGRESSION, Hyperparams(n_trees=5, seed=1))
    assert np.all(predict_matrix(model, X) == 7.0)
    assert np.array_equal(model.importance, np.zeros(3))


def test_planted_signal_importance():
    # smaller cousin of the acceptance-scale planted-signal run
    rng = np.random.default_rng(123)
    X = rng.uniform(size=(300, 10))
    y = X[:, 3].copy()
    model = forest.fit(X, y, REGRESSION, Hyperparams(seed=7))
    assert int(np.argmax(model.importance)) == 3
    assert model.importance[3] >= 0.7


def test_importance_normalized():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(50, 4))
    y = X @ [1.0, -2.0, 0.5, 0.0] + 0.01 * rng.normal(size=50)
    model = forest.fit(X, y, REGRESSION, Hyperparams(n_trees=10, seed=2))
    assert np.all(model.importance >= 0)
    assert model.importance.sum() == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_regression_predictions_within_target_range(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 3))
    y = rng.normal(scale=10, size=30)
    model = forest.fit(X, y, REGRESSION, Hyperparams(n_trees=5, max_depth=4, seed=seed))
    out = predict_matrix(model, rng.normal(size=(50, 3)))
    assert out.min() >= y.min() - 1e-12
    assert out.max() <= y.max() + 1e-12


def test_determinism_bit_for_bit():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(60, 5))
    y = rng.normal(size=60)
    hp = Hyperparams(n_trees=20, seed=31)
    a = predict_matrix(forest.fit(X, y, REGRESSION, hp), X)
    b = predict_matrix(forest.fit(X, y, REGRESSION, hp), X)
    assert np.array_equal(a, b)
    c = predict_matrix(forest.fit(X, y, REGRESSION, Hyperparams(n_trees=20, seed=32)), X)
    assert not np.array_equal(a, c)


def test_single_tree_memorizes_distinct_rows():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(40, 3))  # continuous draws: rows distinct
    y = rng.normal(size=40)
    model = forest.fit(X, y, REGRESSION, SINGLE_TREE)
    assert np.allclose(predict_matrix(model, X), y)


def test_constant_feature_is_inert():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(50, 4))
    y = rng.normal(size=50)
    hp = Hyperparams(n_trees=10, max_features="all", seed=3)
    base = predict_matrix(forest.fit(X, y, REGRESSION, hp), X)
    X_aug = np.hstack([X, np.full((50, 1), 2.5)])
    aug_model = forest.fit(X_aug, y, REGRESSION, hp)
    assert np.array_equal(predict_matrix(aug_model, X_aug), base)
    assert aug_model.importance[4] == 0.0


def test_classification_basics():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(0, 0.3, size=(30, 2)), rng.normal(3, 0.3, size=(30, 2))])
    y = ["a"] * 30 + ["b"] * 30
    model = forest.fit(X, y, CLASSIFICATION, Hyperparams(n_trees=15, seed=4))
    assert model.class_labels == ("a", "b")
    labels = predict_labels(model, X)
    assert np.mean([p == t for p, t in zip(labels, y)]) >= 0.95
    label, probs = predict(model, [0.0, 0.0])
    assert label == "a"
    assert probs.sum() == pytest.approx(1.0)


def test_classification_tie_breaks_to_lowest_label():
    # two identical feature vectors with different labels: the root cannot
    # split, leaving exactly 50/50 leaf probabilities
    model = forest.fit([[1.0], [1.0]], ["b", "a"], CLASSIFICATION, SINGLE_TREE)
    label, probs = predict(model, [1.0])
    assert probs[0] == probs[1] == pytest.approx(0.5)
    assert label == "a"


def test_fit_input_validation():
    with pytest.raises(FitError):
        forest.fit(np.empty((0, 2)), [], REGRESSION, SINGLE_TREE)
    with pytest.raises(FitError):
        forest.fit([[1.0], [2.0]], [1.0], REGRESSION, SINGLE_TREE)
    with pytest.raises(FitError):
        forest.fit([[1.0], [2.0]], [1.0, 2.0], "ranking", SINGLE_TREE)


def test_predict_dimension_mismatch():
    model = forest.fit([[0.0], [1.0]], [0.0, 1.0], REGRESSION, SINGLE_TREE)
    with pytest.raises(DomainError):
        predict(model, [0.0, 1.0])


def test_hyperparams_validation():
    with pytest.raises(DomainError):
        Hyperparams(n_trees=0)
    with pytest.raises(DomainError):
        Hyperparams(min_samples_split=1)
    with pytest.raises(DomainError):
        Hyperparams(max_features="log2")
    with pytest.raises(DomainError):
        Hyperparams(max_features=1.5)
    with pytest.raises(DomainError):
        Hyperparams(seed=-1)
    with pytest.raises(DomainError):
        Hyperparams(max_depth=0)


def test_resolve_max_features():
    assert resolve_max_features("all", 30, REGRESSION) == 30
    assert resolve_max_features("sqrt", 30, REGRESSION) == 5
    assert resolve_max_features(1 / 3, 30, REGRESSION) == 10
    assert resolve_max_features(None, 30, REGRESSION) == 10
    assert resolve_max_features(None, 30, CLASSIFICATION) == 5
    assert resolve_max_features(0.001, 30, REGRESSION) == 1


def test_cross_validate_single_entry_grid():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(30, 2))
    y = X[:, 0]
    hp = Hyperparams(n_trees=5, seed=1)
    best, scores = cross_validate(X, y, REGRESSION, [hp], k=3, seed=0)
    assert best is hp
    assert len(scores) == 1 and len(scores[0]) == 3


def test_cross_validate_prefers_capacity_on_linear_target():
    rng = np.random.default_rng(9)
    X = rng.uniform(size=(120, 1))
    y = 3.0 * X[:, 0]
    stump = Hyperparams(n_trees=10, max_depth=1, seed=5)
    deep = Hyperparams(n_trees=10, max_depth=None, seed=5)
    best, _ = cross_validate(X, y, REGRESSION, [stump, deep], k=4, seed=1)
    assert best is deep


def test_cross_validate_duplicate_grid_returns_first():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(20, 2))
    y = X[:, 0]
    a = Hyperparams(n_trees=3, seed=2)
    b = Hyperparams(n_trees=3, seed=2)
    best, _ = cross_validate(X, y, REGRESSION, [a, b], k=2, seed=0)
    assert best is a


def test_cross_validate_rejects_bad_input():
    X = np.random.default_rng(0).normal(size=(10, 2))
    y = X[:, 0]
    with pytest.raises(FitError):
        cross_validate(X, y, REGRESSION, [], k=2, seed=0)
    with pytest.raises(FitError):
        cross_validate(X, y, REGRESSION, [SINGLE_TREE], k=1, seed=0)
    with pytest.raises(FitError):
        cross_validate(X[:3], y[:3], REGRESSION, [SINGLE_TREE], k=5, seed=0)
