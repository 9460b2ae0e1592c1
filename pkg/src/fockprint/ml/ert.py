"""Extremely randomized regression trees, grown on the full training set (no bootstrap)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatchError, EmptyDataError
from ..parallel import ordered_map

LEAF = -1


@dataclass
class Tree:
    """Flat binary tree; node t splits on ``feature[t] < threshold[t]`` (left) unless it is a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] < self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] != LEAF
        return self.value[node]

    @property
    def node_count(self) -> int:
        return self.value.size

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=float),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=float),
        )


def _draw_thresholds(rng: np.random.Generator, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """One uniform draw per feature, strictly inside (lo, hi)."""
    u = rng.random(lo.size)
    thr = lo + u * (hi - lo)
    # u may be 0, and lo + u*(hi-lo) may round onto hi
    thr = np.where(thr <= lo, np.nextafter(lo, hi), thr)
    return np.where(thr >= hi, np.nextafter(hi, lo), thr)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_features: int,
    min_samples_split: int = 2,
    max_depth: int | None = None,
) -> Tree:
    n_features = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(val: float) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(val)
        return len(value) - 1

    root = new_node(float(y.mean()))
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yn = y[idx]
        if idx.size < min_samples_split or (max_depth is not None and depth >= max_depth) or np.ptp(yn) == 0.0:
            continue
        cand = np.sort(rng.choice(n_features, size=max_features, replace=False))
        Xn = X[np.ix_(idx, cand)]
        lo = Xn.min(axis=0)
        hi = Xn.max(axis=0)
        varying = hi > lo
        if not varying.any():
            continue
        cand, Xn, lo, hi = cand[varying], Xn[:, varying], lo[varying], hi[varying]
        thr = _draw_thresholds(rng, lo, hi)

        mask = Xn < thr
        n_left = mask.sum(axis=0)
        n_right = idx.size - n_left
        s_left = yn @ mask
        q_left = (yn * yn) @ mask
        s_tot, q_tot = yn.sum(), (yn * yn).sum()
        sse_left = q_left - s_left**2 / n_left
        sse_right = (q_tot - q_left) - (s_tot - s_left) ** 2 / n_right
        reduction = (q_tot - s_tot**2 / idx.size) - sse_left - sse_right
        # argmax returns the first maximum, i.e. the lowest feature index on ties
        best = int(np.argmax(reduction))

        go_left = mask[:, best]
        li, ri = idx[go_left], idx[~go_left]
        lnode = new_node(float(y[li].mean()))
        rnode = new_node(float(y[ri].mean()))
        feature[node] = int(cand[best])
        threshold[node] = float(thr[best])
        left[node], right[node] = lnode, rnode
        stack.append((rnode, ri, depth + 1))
        stack.append((lnode, li, depth + 1))

    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=float),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=float),
    )


@dataclass
class ErtModel:
    trees: list[Tree]
    n_features: int
    n_trees: int
    max_features: int
    min_samples_split: int
    max_depth: int | None
    seed: int

    def predict(self, X) -> np.ndarray:
        return ert_predict(self, X)

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "n_trees": self.n_trees,
            "max_features": self.max_features,
            "min_samples_split": self.min_samples_split,
            "max_depth": self.max_depth,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ErtModel":
        return cls(
            [Tree.from_dict(t) for t in d["trees"]],
            int(d["n_features"]),
            int(d["n_trees"]),
            int(d["max_features"]),
            int(d["min_samples_split"]),
            None if d["max_depth"] is None else int(d["max_depth"]),
            int(d["seed"]),
        )


def ert_fit(
    X,
    y,
    n_trees: int = 100,
    max_features: int | None = None,
    min_samples_split: int = 2,
    max_depth: int | None = None,
    seed: int = 0,
    workers: int | None = 1,
) -> ErtModel:
    """Fit ``n_trees`` trees; tree t draws from its own child stream of ``seed``.

    ``max_features`` (K) defaults to all features.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] == 0 or y.size == 0:
        raise EmptyDataError("ERT needs at least one sample")
    if X.shape[0] != y.size:
        raise DimensionMismatchError(f"{X.shape[0]} rows but {y.size} targets")
    K = X.shape[1] if max_features is None else int(max_features)
    if not 1 <= K <= X.shape[1]:
        raise ValueError(f"max_features must lie in [1, {X.shape[1]}]")
    streams = np.random.SeedSequence(seed).spawn(n_trees)

    def one(ss):
        return grow_tree(X, y, np.random.default_rng(ss), K, min_samples_split, max_depth)

    trees = ordered_map(one, streams, workers)
    return ErtModel(trees, X.shape[1], n_trees, K, min_samples_split, max_depth, seed)


def ert_predict(model: ErtModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise DimensionMismatchError(f"expected {model.n_features} features, got {X.shape[1]}")
    return np.mean([t.predict(X) for t in model.trees], axis=0)
