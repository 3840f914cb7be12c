"""Reference classifiers: a gain-ratio decision tree and a one-hidden-layer MLP."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DataError, NumericError
from .ingest import NumericDataset


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, counts / n, 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def entropy(class_counts) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if np.any(counts < 0):
        raise DataError("counts must be nonnegative")
    if counts.sum() <= 0:
        raise DataError("entropy of an all-zero count vector is undefined")
    return float(_entropy_rows(counts))


def split_gain(parent_counts, children_counts):
    """Return ``(gain, split_info)`` for a partition of ``parent_counts``."""
    parent = np.asarray(parent_counts, dtype=np.int64)
    children = np.atleast_2d(np.asarray(children_counts, dtype=np.int64))
    if children.shape[1] != parent.shape[0] or not np.array_equal(children.sum(axis=0), parent):
        raise DataError("children counts do not partition the parent counts")
    n = parent.sum()
    sizes = children.sum(axis=1)
    nonempty = sizes > 0
    weights = sizes[nonempty] / n
    gain = entropy(parent) - float(weights @ _entropy_rows(children[nonempty]))
    return gain, entropy(sizes)


def gain_ratio(parent_counts, children_counts) -> float:
    """Information gain divided by split information; 0 when the split information is 0."""
    gain, info = split_gain(parent_counts, children_counts)
    if info <= 0:
        return 0.0
    return gain / info


# ---------------------------------------------------------------- decision tree


@dataclass
class Node:
    dist: list
    label: int
    feature: int = -1
    threshold: float | None = None
    columns: list | None = None       # one-hot group split: token column per branch
    children: list = field(default_factory=list)
    default: int = -1                 # child index used for all-zero / unseen tokens

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def to_dict(self) -> dict:
        d = {"dist": self.dist, "label": self.label}
        if self.threshold is not None:
            d.update(feature=self.feature, threshold=self.threshold, children=self.children)
        elif self.columns is not None:
            d.update(feature=self.feature, columns=self.columns, children=self.children,
                     default=self.default)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        return cls(dist=list(d["dist"]), label=int(d["label"]),
                   feature=int(d.get("feature", -1)), threshold=d.get("threshold"),
                   columns=d.get("columns"), children=list(d.get("children", [])),
                   default=int(d.get("default", -1)))


@dataclass(eq=False)
class TreeModel:
    """Nodes in depth-first preorder; node 0 is the root. A threshold node sends
    ``x[feature] <= threshold`` to ``children[0]``, the rest to ``children[1]``. A
    group node routes on which one-hot column of ``columns`` is set."""

    nodes: list
    n_features: int
    n_classes: int
    config: dict

    def to_json(self) -> str:
        return json.dumps({"n_features": self.n_features, "n_classes": self.n_classes,
                           "config": self.config,
                           "nodes": [n.to_dict() for n in self.nodes]},
                          sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "TreeModel":
        d = json.loads(text)
        return cls([Node.from_dict(n) for n in d["nodes"]], d["n_features"],
                   d["n_classes"], d["config"])

    @property
    def depth(self) -> int:
        def walk(i):
            node = self.nodes[i]
            return 0 if node.is_leaf else 1 + max(walk(c) for c in node.children)
        return walk(0)


def one_hot_groups(ds: NumericDataset) -> dict:
    """Map first column -> list of columns for each one-hot block in ``ds``."""
    groups = {}
    for j, (name, origin) in enumerate(zip(ds.feature_names, ds.feature_origins)):
        if name.startswith(origin + "="):
            groups.setdefault(origin, []).append(j)
    return {cols[0]: cols for cols in groups.values()}


class _TreeBuilder:
    def __init__(self, X, y, C, groups, min_leaf, max_depth, min_gain):
        self.X, self.y, self.C = X, y, C
        self.groups = groups
        grouped = {j for cols in groups.values() for j in cols}
        self.continuous = [j for j in range(X.shape[1]) if j not in grouped]
        self.min_leaf, self.max_depth, self.min_gain = min_leaf, max_depth, min_gain
        self.nodes: list[Node] = []

    def counts(self, idx):
        return np.bincount(self.y[idx], minlength=self.C)

    def build(self, idx, depth) -> int:
        counts = self.counts(idx)
        node = Node(dist=counts.tolist(), label=int(np.argmax(counts)))
        node_id = len(self.nodes)
        self.nodes.append(node)
        if (np.count_nonzero(counts) <= 1 or len(idx) < 2 * self.min_leaf
                or depth >= self.max_depth):
            return node_id
        best = self.best_split(idx, counts)
        if best is None or best[0] < self.min_gain:
            return node_id
        _, feature, kind, payload, parts = best
        node.feature = feature
        if kind == "threshold":
            node.threshold = float(payload)
        else:
            node.columns = [int(c) for c in payload]
            sizes = [len(p) for p in parts]
            node.default = int(np.argmax(sizes))
        node.children = [self.build(part, depth + 1) for part in parts]
        return node_id

    def best_split(self, idx, counts):
        parent_h = float(_entropy_rows(counts))
        n = len(idx)
        candidates = []
        for j in self.continuous:
            cand = self.threshold_split(idx, j, parent_h, n)
            if cand is not None:
                candidates.append(cand)
        for first, cols in self.groups.items():
            cand = self.group_split(idx, first, cols, parent_h, n)
            if cand is not None:
                candidates.append(cand)
        best = None
        # highest ratio; ties -> lowest feature index, then lowest threshold
        for cand in sorted(candidates, key=lambda c: (c[1], c[5])):
            if best is None or cand[0] > best[0]:
                best = cand
        if best is None:
            return None
        return best[:5]

    def threshold_split(self, idx, j, parent_h, n):
        x = self.X[idx, j]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = self.y[idx][order]
        onehot = np.zeros((n, self.C), dtype=np.int64)
        onehot[np.arange(n), ys] = 1
        left = np.cumsum(onehot, axis=0)[:-1]
        n_left = np.arange(1, n)
        valid = (xs[:-1] < xs[1:]) & (n_left >= self.min_leaf) & (n - n_left >= self.min_leaf)
        if not valid.any():
            return None
        pos = np.flatnonzero(valid)
        L = left[pos]
        R = left[-1] + onehot[-1] - L
        nl = n_left[pos].astype(np.float64)
        nr = n - nl
        gain = parent_h - (nl / n) * _entropy_rows(L) - (nr / n) * _entropy_rows(R)
        info = _entropy_rows(np.column_stack([nl, nr]))
        # zero-gain splits stay candidates; min_gain decides whether they are taken
        ratio = np.maximum(gain, 0.0) / info
        k = int(np.argmax(ratio))
        p = pos[k]
        thr = 0.5 * (xs[p] + xs[p + 1])
        go_left = x <= thr
        return (float(ratio[k]), j, "threshold", thr, [idx[go_left], idx[~go_left]], thr)

    def group_split(self, idx, first, cols, parent_h, n):
        block = self.X[np.ix_(idx, cols)]
        has = block.max(axis=1) > 0.5
        branch = np.where(has, np.argmax(block, axis=1), len(cols))
        present = np.unique(branch)
        if len(present) < 2:
            return None
        parts = [idx[branch == b] for b in present]
        sizes = np.array([len(p) for p in parts])
        if np.sum(sizes >= self.min_leaf) < 2:
            return None
        child_counts = np.stack([self.counts(p) for p in parts])
        weights = sizes / n
        gain = max(parent_h - float(weights @ _entropy_rows(child_counts)), 0.0)
        info = float(_entropy_rows(sizes))
        # branch len(cols) marks rows with no token set
        columns = [cols[b] if b < len(cols) else -1 for b in present]
        return (gain / info, first, "group", columns, parts, 0.0)


def train_tree(ds: NumericDataset, min_leaf: int = 2, max_depth: int = 30,
               min_gain: float = 1e-6, groups: dict | None = None) -> TreeModel:
    """Greedy top-down tree on gain ratio.

    Continuous columns split at midpoints between consecutive distinct values;
    one-hot blocks (detected from ``feature_names`` of the form ``name=token``)
    split multiway on the token. No pruning.
    """
    if ds.n_rows < 1:
        raise DataError("cannot train a tree on an empty dataset")
    if min_leaf < 1 or max_depth < 0:
        raise ConfigError("min_leaf must be >= 1 and max_depth >= 0")
    if groups is None:
        groups = one_hot_groups(ds)
    builder = _TreeBuilder(ds.X, ds.y, ds.class_count, groups, min_leaf, max_depth, min_gain)
    builder.build(np.arange(ds.n_rows), 0)
    config = {"min_leaf": min_leaf, "max_depth": max_depth, "min_gain": min_gain}
    return TreeModel(builder.nodes, ds.n_features, ds.class_count, config)


def predict_tree(model: TreeModel, X):
    """Return ``(class_ids, leaf_distributions)``; distributions are normalized."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise DataError(f"expected {model.n_features} columns, got {X.shape[1]}")
    n = X.shape[0]
    leaf_of = np.empty(n, dtype=np.int64)
    stack = [(0, np.arange(n))]
    while stack:
        node_id, rows = stack.pop()
        if rows.size == 0:
            continue
        node = model.nodes[node_id]
        if node.is_leaf:
            leaf_of[rows] = node_id
            continue
        if node.threshold is not None:
            left = X[rows, node.feature] <= node.threshold
            stack.append((node.children[0], rows[left]))
            stack.append((node.children[1], rows[~left]))
            continue
        routed = np.zeros(rows.size, dtype=bool)
        for col, child in zip(node.columns, node.children):
            if col < 0:
                continue
            hit = ~routed & (X[rows, col] > 0.5)
            stack.append((child, rows[hit]))
            routed |= hit
        fallback = node.default
        if -1 in node.columns:
            fallback = node.columns.index(-1)
        stack.append((node.children[fallback], rows[~routed]))
    labels = np.array([model.nodes[i].label for i in range(len(model.nodes))])
    dists = np.array([model.nodes[i].dist for i in range(len(model.nodes))], dtype=np.float64)
    dists /= dists.sum(axis=1, keepdims=True)
    return labels[leaf_of], dists[leaf_of]


# ---------------------------------------------------------------- MLP


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(eq=False)
class MlpModel:
    """Logistic hidden layer, softmax output. Weights map rows: ``h = sigmoid(X W1 + b1)``."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    config: dict = field(default_factory=dict)

    @property
    def layer_sizes(self) -> tuple:
        return (self.W1.shape[0], self.W1.shape[1], self.W2.shape[1])

    def params(self) -> list:
        return [self.W1, self.b1, self.W2, self.b2]

    def copy(self) -> "MlpModel":
        return MlpModel(*(p.copy() for p in self.params()), config=dict(self.config))


def _forward(model: MlpModel, X):
    H = expit(X @ model.W1 + model.b1)
    P = softmax(H @ model.W2 + model.b2)
    return H, P


def mlp_loss_and_grads(model: MlpModel, X, y):
    """Mean cross-entropy and its gradients w.r.t. (W1, b1, W2, b2)."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    H, P = _forward(model, X)
    loss = -np.mean(np.log(np.maximum(P[np.arange(n), y], 1e-300)))
    G = P.copy()
    G[np.arange(n), y] -= 1.0
    G /= n
    dW2 = H.T @ G
    db2 = G.sum(axis=0)
    dZ = (G @ model.W2.T) * H * (1.0 - H)
    dW1 = X.T @ dZ
    db1 = dZ.sum(axis=0)
    return float(loss), [dW1, db1, dW2, db2]


def init_mlp(d: int, hidden: int, C: int, rng, init: str = "uniform") -> MlpModel:
    if init == "zeros":
        return MlpModel(np.zeros((d, hidden)), np.zeros(hidden), np.zeros((hidden, C)),
                        np.zeros(C))
    if init != "uniform":
        raise ConfigError(f"unknown init {init!r}")
    a1 = 1.0 / np.sqrt(max(d, 1))
    a2 = 1.0 / np.sqrt(hidden)
    return MlpModel(rng.uniform(-a1, a1, (d, hidden)), rng.uniform(-a1, a1, hidden),
                    rng.uniform(-a2, a2, (hidden, C)), rng.uniform(-a2, a2, C))


def train_mlp(ds: NumericDataset, hidden: int = 20, epochs: int = 50, rate: float = 0.1,
              batch: int = 32, seed: int | None = None, init: str = "uniform") -> MlpModel:
    """Mini-batch gradient descent on mean cross-entropy.

    Rows are reshuffled each epoch unless one batch covers the whole set, in which
    case the update is plain full-batch descent.
    """
    if seed is None:
        raise ConfigError("train_mlp needs an explicit seed")
    if ds.n_rows < 1:
        raise DataError("cannot train on an empty dataset")
    if hidden < 1 or batch < 1 or epochs < 0:
        raise ConfigError("hidden and batch must be >= 1, epochs >= 0")
    rng = np.random.default_rng(seed)
    model = init_mlp(ds.n_features, hidden, ds.class_count, rng, init)
    model.config = {"hidden": hidden, "epochs": epochs, "rate": rate, "batch": batch,
                    "seed": seed, "init": init}
    X, y, n = ds.X, ds.y, ds.n_rows
    for epoch in range(epochs):
        order = np.arange(n) if batch >= n else rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            loss, grads = mlp_loss_and_grads(model, X[rows], y[rows])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}")
            for p, g in zip(model.params(), grads):
                p -= rate * g
    return model


def predict_mlp(model: MlpModel, X):
    """Return ``(class_ids, probabilities)``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.W1.shape[0]:
        raise DataError(f"expected {model.W1.shape[0]} columns, got {X.shape[1]}")
    _, P = _forward(model, X)
    return np.argmax(P, axis=1), P
