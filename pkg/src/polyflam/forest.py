"""CART random forest for regression and classification, built from scratch.

Splits are scanned at midpoints between consecutive distinct sorted feature
values and chosen to minimize weighted child impurity (variance for
regression, Gini for classification).  Feature importance is the total
impurity decrease per feature, weighted by node sample fraction, averaged
over trees and normalized to sum 1.

Determinism: tree ``t`` draws from ``np.random.default_rng(SeedSequence([seed, t]))``,
so results are bit-reproducible for identical data and hyperparameters and
independent of any scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, FitError

REGRESSION = "regression"
CLASSIFICATION = "classification"


@dataclass(frozen=True)
class Hyperparams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    # "all", "sqrt", a fraction in (0, 1], or None for the task default
    # (1/3 for regression, "sqrt" for classification).
    max_features: str | float | None = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise DomainError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise DomainError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise DomainError("min_samples_split must be >= 2")
        if isinstance(self.max_features, str):
            if self.max_features not in ("all", "sqrt"):
                raise DomainError(f"unknown max_features '{self.max_features}'")
        elif self.max_features is not None:
            f = float(self.max_features)
            if not 0 < f <= 1:
                raise DomainError("fractional max_features must be in (0, 1]")
        if self.seed < 0:
            raise DomainError("seed must be a non-negative integer")


def resolve_max_features(mf, n_features: int, task: str) -> int:
    if mf is None:
        mf = 1 / 3 if task == REGRESSION else "sqrt"
    if mf == "all":
        return n_features
    if mf == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    return max(1, int(float(mf) * n_features))


@dataclass
class _Tree:
    feature: np.ndarray  # int32, -1 for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes,) regression, (n_nodes, n_classes) classification


@dataclass
class ForestModel:
    trees: list[_Tree]
    task: str
    feature_count: int
    hyperparams: Hyperparams
    importance: np.ndarray
    class_labels: tuple | None = None


def _split_scores_regression(xs: np.ndarray, ys: np.ndarray):
    """Sum of child SSEs for every split position of every column.

    xs, ys: value and target matrices sorted per column, shape (n, m).
    Returns (scores, parent_sse); scores[i, j] is the SSE sum when column j
    splits between sorted positions i and i+1 (inf where values tie).
    """
    n = xs.shape[0]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    total_sum = csum[-1, 0]
    total_sq = csq[-1, 0]
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = float(n) - nl
    sl, ql = csum[:-1], csq[:-1]
    scores = (ql - sl * sl / nl) + ((total_sq - ql) - (total_sum - sl) ** 2 / nr)
    scores[xs[1:] <= xs[:-1]] = np.inf
    parent = total_sq - total_sum * total_sum / n
    return scores, parent


def _split_scores_gini(xs: np.ndarray, onehot: np.ndarray, order: np.ndarray):
    """n*Gini analog of the regression scores for classification."""
    n, m = xs.shape
    sorted_oh = onehot[order]  # (n, m, c)
    counts = np.cumsum(sorted_oh, axis=0)
    total = counts[-1, 0]  # class counts, shape (c,)
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = float(n) - nl
    cl = counts[:-1]
    cr = total[None, None, :] - cl
    scores = (nl - (cl * cl).sum(axis=2) / nl) + (nr - (cr * cr).sum(axis=2) / nr)
    scores[xs[1:] <= xs[:-1]] = np.inf
    parent = n - float((total * total).sum()) / n
    return scores, parent


def _build_tree(X, y, onehot, task, hp, m_feats, rng, importance, n_total):
    n, p = X.shape
    feature, threshold, left, right, values = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        values.append(None)
        return len(feature) - 1

    def leaf_value(rows):
        if task == REGRESSION:
            return float(y[rows].mean())
        counts = onehot[rows].sum(axis=0)
        return counts / counts.sum()

    root = new_node()
    stack = [(np.arange(n) if not hp.bootstrap else rng.integers(0, n, n), 0, root)]
    while stack:
        rows, depth, slot = stack.pop()
        n_node = len(rows)
        y_node = y[rows]
        pure = (y_node == y_node[0]).all()
        if (
            pure
            or n_node < hp.min_samples_split
            or (hp.max_depth is not None and depth >= hp.max_depth)
        ):
            values[slot] = leaf_value(rows)
            continue

        if m_feats < p:
            cand = np.sort(rng.choice(p, size=m_feats, replace=False))
        else:
            cand = np.arange(p)
        xs_unsorted = X[np.ix_(rows, cand)]
        order = np.argsort(xs_unsorted, axis=0, kind="stable")
        xs = np.take_along_axis(xs_unsorted, order, axis=0)
        if task == REGRESSION:
            ys = y_node[order]
            scores, parent = _split_scores_regression(xs, ys)
        else:
            scores, parent = _split_scores_gini(xs, onehot[rows], order)

        flat = int(np.argmin(scores))
        pos, j = divmod(flat, len(cand))
        best = scores[pos, j]
        decrease = parent - best
        if not np.isfinite(best) or decrease <= 0.0:
            values[slot] = leaf_value(rows)
            continue

        feat = int(cand[j])
        thresh = (xs[pos, j] + xs[pos + 1, j]) / 2.0
        if thresh >= xs[pos + 1, j]:
            # Adjacent floats: the midpoint rounded up to the higher value
            # and would not separate; the lower value always does.
            thresh = xs[pos, j]
        go_left = X[rows, feat] <= thresh
        importance[feat] += decrease / n_total

        feature[slot] = feat
        threshold[slot] = float(thresh)
        left[slot] = new_node()
        right[slot] = new_node()
        # Right pushed first so the left child is built next (preorder);
        # fixed order keeps the per-tree RNG stream reproducible.
        stack.append((rows[~go_left], depth + 1, right[slot]))
        stack.append((rows[go_left], depth + 1, left[slot]))

    if task == REGRESSION:
        value_arr = np.array([v if v is not None else 0.0 for v in values])
    else:
        c = onehot.shape[1]
        value_arr = np.vstack([v if v is not None else np.zeros(c) for v in values])
    return _Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=value_arr,
    )


def fit(X, y, task: str, hp: Hyperparams) -> ForestModel:
    """Train a forest; fully deterministic given (X, y, task, hp)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise FitError("fit requires a non-empty 2D feature matrix")
    n, p = X.shape
    if n < 2:
        raise FitError("fit requires at least 2 rows")
    y_raw = np.asarray(y)
    if y_raw.shape[0] != n:
        raise FitError(f"length mismatch: {n} rows vs {y_raw.shape[0]} targets")
    if task not in (REGRESSION, CLASSIFICATION):
        raise FitError(f"unknown task '{task}'")

    class_labels = None
    onehot = None
    if task == REGRESSION:
        y_fit = y_raw.astype(float)
        if not np.isfinite(y_fit).all():
            raise FitError("regression targets must be finite")
    else:
        labels, y_fit = np.unique(y_raw, return_inverse=True)
        class_labels = tuple(labels.tolist())
        onehot = np.eye(len(labels))[y_fit]

    m_feats = resolve_max_features(hp.max_features, p, task)
    importance = np.zeros(p)
    trees = []
    for t in range(hp.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([hp.seed, t]))
        trees.append(_build_tree(X, y_fit, onehot, task, hp, m_feats, rng, importance, n))

    importance /= hp.n_trees
    total = importance.sum()
    if total > 0:
        importance = importance / total
    return ForestModel(
        trees=trees,
        task=task,
        feature_count=p,
        hyperparams=hp,
        importance=importance,
        class_labels=class_labels,
    )


def _tree_predict(tree: _Tree, X: np.ndarray) -> np.ndarray:
    node = np.zeros(X.shape[0], dtype=np.int32)
    while True:
        f = tree.feature[node]
        active = np.flatnonzero(f >= 0)
        if active.size == 0:
            break
        cur = node[active]
        go_left = X[active, tree.feature[cur]] <= tree.threshold[cur]
        node[active] = np.where(go_left, tree.left[cur], tree.right[cur])
    return tree.value[node]


def predict_matrix(model: ForestModel, X) -> np.ndarray:
    """Bulk prediction: (n,) values for regression, (n, c) mean probabilities
    for classification."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.feature_count:
        raise DomainError(
            f"predict expects {model.feature_count} features, got shape {X.shape}"
        )
    acc = _tree_predict(model.trees[0], X).astype(float)
    for tree in model.trees[1:]:
        acc += _tree_predict(tree, X)
    return acc / len(model.trees)


def predict(model: ForestModel, x):
    """Predict one feature vector: a real for regression, (label, probability
    vector) for classification with ties broken toward the lowest label index."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    out = predict_matrix(model, x)
    if model.task == REGRESSION:
        return float(out[0])
    probs = out[0]
    return model.class_labels[int(np.argmax(probs))], probs


def predict_labels(model: ForestModel, X) -> list:
    probs = predict_matrix(model, X)
    return [model.class_labels[i] for i in np.argmax(probs, axis=1)]


def cross_validate(X, y, task: str, grid: list[Hyperparams], k: int, seed: int):
    """Mean held-out score over k contiguous folds of a seeded shuffle.

    Scores are R^2 for regression and accuracy for classification.  Returns
    (best hyperparams, per-grid-entry fold scores); ties go to the earliest
    grid position.
    """
    if not grid:
        raise FitError("cross_validate: empty hyperparameter grid")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n = X.shape[0]
    if k < 2:
        raise FitError("cross_validate needs k >= 2")
    if n < k:
        raise FitError(f"cross_validate needs at least k={k} rows, got {n}")

    perm = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(perm, k)

    from .pipeline import r2_score

    all_scores = []
    for hp in grid:
        fold_scores = []
        for fold in folds:
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            model = fit(X[mask], y[mask], task, hp)
            if task == REGRESSION:
                pred = predict_matrix(model, X[fold])
                fold_scores.append(r2_score(y[fold].astype(float), pred))
            else:
                pred = predict_labels(model, X[fold])
                fold_scores.append(float(np.mean([p == t for p, t in zip(pred, y[fold])])))
        all_scores.append(fold_scores)

    means = [float(np.mean(s)) for s in all_scores]
    best_idx = 0
    for i, m in enumerate(means):
        if m > means[best_idx]:
            best_idx = i
    return grid[best_idx], all_scores


def tree_to_nodes(tree: _Tree, task: str) -> list[dict]:
    nodes = []
    for i in range(len(tree.feature)):
        if tree.feature[i] >= 0:
            nodes.append(
                {
                    "f": int(tree.feature[i]),
                    "t": float(tree.threshold[i]),
                    "l": int(tree.left[i]),
                    "r": int(tree.right[i]),
                }
            )
        elif task == REGRESSION:
            nodes.append({"v": float(tree.value[i])})
        else:
            nodes.append({"v": [float(p) for p in tree.value[i]]})
    return nodes


def tree_from_nodes(nodes: list[dict], task: str, n_classes: int) -> _Tree:
    n = len(nodes)
    feature = np.full(n, -1, dtype=np.int32)
    threshold = np.zeros(n)
    left = np.full(n, -1, dtype=np.int32)
    right = np.full(n, -1, dtype=np.int32)
    value = np.zeros(n) if task == REGRESSION else np.zeros((n, n_classes))
    for i, node in enumerate(nodes):
        if "f" in node:
            feature[i] = node["f"]
            threshold[i] = node["t"]
            left[i] = node["l"]
            right[i] = node["r"]
        else:
            value[i] = node["v"]
    return _Tree(feature=feature, threshold=threshold, left=left, right=right, value=value)
