"""Decision tree with weighted Gini splits, and a bagged voting forest."""

from __future__ import annotations

import numpy as np

from .base import Classifier, LearnerConfig


class _TreeArrays:
    """Flat node arrays; feature < 0 marks a leaf."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.score: list[float] = []

    def add(self, feature=-1, threshold=0.0, score=0.5) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.score.append(score)
        return len(self.feature) - 1

    def freeze(self):
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.left = np.asarray(self.left, dtype=np.int64)
        self.right = np.asarray(self.right, dtype=np.int64)
        self.score = np.asarray(self.score, dtype=float)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        for _ in range(64):  # depth cap is far below this
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            rows = np.flatnonzero(internal)
            nd = node[rows]
            vals = X[rows, self.feature[nd]]
            go_left = vals < self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
        return self.score[node]


def _best_split(X, y, w, rows, feat_ids):
    """Minimum weighted-Gini split over the candidate features.

    Returns (cost, feature, threshold) or None when no valid boundary exists.
    Ties resolve to the first candidate feature, then the lowest threshold,
    so fits are deterministic.
    """
    yr = y[rows]
    wr = w[rows]
    w_tot = wr.sum()
    p_tot = (wr * yr).sum()
    best = None
    for f in feat_ids:
        v = X[rows, f]
        order = np.argsort(v, kind="mergesort")
        vs = v[order]
        cw = np.cumsum(wr[order])
        cp = np.cumsum((wr * yr)[order])
        cand = np.flatnonzero(vs[1:] != vs[:-1])
        if cand.size == 0:
            continue
        wl = cw[cand]
        pl = cp[cand]
        wr_side = w_tot - wl
        pr = p_tot - pl
        ok = (wl > 0) & (wr_side > 0)
        if not ok.any():
            continue
        wl, pl, wr_side, pr = wl[ok], pl[ok], wr_side[ok], pr[ok]
        cost = 2.0 * pl * (wl - pl) / wl + 2.0 * pr * (wr_side - pr) / wr_side
        k = int(np.argmin(cost))
        c = float(cost[k])
        if best is None or c < best[0] - 1e-15:
            pos = np.flatnonzero(ok)[k]
            i = cand[pos]
            thr = (vs[i] + vs[i + 1]) / 2.0
            best = (c, f, thr)
    return best


def _grow(tree, X, y, w, rows, depth, max_depth, max_features, min_leaf, rng):
    wr = w[rows]
    w_tot = wr.sum()
    pos = (wr * y[rows]).sum()
    score = pos / w_tot if w_tot > 0 else 0.5
    node = tree.add(score=score)
    if depth >= max_depth or rows.size < 2 * min_leaf or score in (0.0, 1.0):
        return node
    d = X.shape[1]
    if max_features < d:
        feat_ids = np.sort(rng.choice(d, size=max_features, replace=False))
    else:
        feat_ids = np.arange(d)
    parent_gini = 2.0 * pos * (w_tot - pos) / w_tot
    best = _best_split(X, y, w, rows, feat_ids)
    if best is None or best[0] >= parent_gini - 1e-12:
        return node
    _, f, thr = best
    go_left = X[rows, f] < thr
    left_rows = rows[go_left]
    right_rows = rows[~go_left]
    if left_rows.size < min_leaf or right_rows.size < min_leaf:
        return node
    tree.feature[node] = f
    tree.threshold[node] = thr
    tree.left[node] = _grow(
        tree, X, y, w, left_rows, depth + 1, max_depth, max_features, min_leaf, rng
    )
    tree.right[node] = _grow(
        tree, X, y, w, right_rows, depth + 1, max_depth, max_features, min_leaf, rng
    )
    return node


def _build_tree(X, y, w, max_depth, max_features, min_leaf, rng) -> _TreeArrays:
    tree = _TreeArrays()
    rows = np.flatnonzero(w > 0)
    if rows.size == 0:
        rows = np.arange(X.shape[0])
    _grow(tree, X, y, w, rows, 0, max_depth, max_features, min_leaf, rng)
    return tree.freeze()


def _resolve_max_features(setting, d: int) -> int:
    if setting == "sqrt":
        return max(1, int(round(np.sqrt(d))))
    if setting == "all" or setting is None:
        return d
    return max(1, min(int(setting), d))


class TreeModel(Classifier):
    """Single tree; score is the leaf's weighted positive fraction."""

    kind = "tree"

    def __init__(self, feature_names, config, tree: _TreeArrays):
        super().__init__(feature_names, config)
        self.tree = tree

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        return self.tree.predict(X)

    def params_dict(self) -> dict:
        return _tree_params(self.tree)


class ForestModel(Classifier):
    """Bagged trees; score is the mean of the trees' hard votes."""

    kind = "forest"

    def __init__(self, feature_names, config, trees: list[_TreeArrays]):
        super().__init__(feature_names, config)
        self.trees = trees

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros(X.shape[0])
        for t in self.trees:
            votes += (t.predict(X) >= 0.5).astype(float)
        return votes / len(self.trees)

    def params_dict(self) -> dict:
        return {"trees": [_tree_params(t) for t in self.trees]}


def _tree_params(t: _TreeArrays) -> dict:
    return {
        "feature": t.feature.tolist(),
        "threshold": t.threshold.tolist(),
        "left": t.left.tolist(),
        "right": t.right.tolist(),
        "score": t.score.tolist(),
    }


def tree_from_params(p: dict) -> _TreeArrays:
    t = _TreeArrays()
    t.feature = p["feature"]
    t.threshold = p["threshold"]
    t.left = p["left"]
    t.right = p["right"]
    t.score = p["score"]
    return t.freeze()


def fit_tree(X, y, w, names, config: LearnerConfig) -> TreeModel:
    rng = np.random.default_rng(config.seed)
    tree = _build_tree(X, y, w, config.max_depth, X.shape[1], config.min_leaf, rng)
    return TreeModel(names, config, tree)


def fit_forest(X, y, w, names, config: LearnerConfig) -> ForestModel:
    n, d = X.shape
    max_features = _resolve_max_features(config.max_features, d)
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_trees)
    trees = []
    for s in seeds:
        rng = np.random.default_rng(s)
        rows = rng.integers(0, n, size=n)
        tree = _build_tree(
            X[rows], y[rows], w[rows], config.max_depth, max_features, config.min_leaf, rng
        )
        trees.append(tree)
    return ForestModel(names, config, trees)
