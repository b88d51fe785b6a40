"""Random forest of weighted CART trees.

Split search runs in compiled code. Every tree draws its bootstrap sample and
its feature subsets from a stream seeded by ``(seed, tree_index)``, so the
number of worker threads never changes the fitted forest.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from ..errors import SpecError, ValidationError
from .ridge import balanced_weights

MAX_FEATURES = ("all", "sqrt", "log2")
CRITERIA = ("gini", "entropy")
# minimum gain a later candidate needs to displace the current best split
_TIE_EPS = 1e-12


@dataclass(frozen=True)
class ForestSpec:
    n_estimators: int = 100
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    max_features: str = "sqrt"
    criterion: str = "gini"
    class_weight: str = "balanced"
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self):
        if int(self.n_estimators) < 1:
            raise SpecError("n_estimators must be at least 1")
        if int(self.min_samples_split) < 2:
            raise SpecError("min_samples_split must be at least 2")
        if self.max_depth is not None and int(self.max_depth) < 1:
            raise SpecError("max_depth must be at least 1 when given")
        if self.max_features not in MAX_FEATURES:
            raise SpecError(f"max_features must be one of {', '.join(MAX_FEATURES)}")
        if self.criterion not in CRITERIA:
            raise SpecError(f"criterion must be one of {', '.join(CRITERIA)}")
        if self.class_weight not in ("none", "balanced"):
            raise SpecError(f"class_weight must be 'none' or 'balanced', got {self.class_weight!r}")

    def n_candidate_features(self, n_features: int) -> int:
        if self.max_features == "all":
            return n_features
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        return max(1, int(math.log2(n_features)))


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray  # int32, -1 at leaves
    threshold: np.ndarray  # float64, go left when x <= threshold
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # (n_nodes, n_classes) class distribution

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())


def gini(counts) -> float:
    c = np.asarray(counts, dtype=float)
    t = c.sum()
    return 0.0 if t <= 0 else float(1.0 - np.sum((c / t) ** 2))


def entropy(counts) -> float:
    c = np.asarray(counts, dtype=float)
    t = c.sum()
    if t <= 0:
        return 0.0
    p = c[c > 0] / t
    return float(-np.sum(p * np.log2(p)))


@numba.njit(cache=True, nogil=True)
def _impurity(counts, total, criterion):
    if total <= 0.0:
        return 0.0
    out = 0.0
    if criterion == 0:
        s = 0.0
        for k in range(counts.shape[0]):
            p = counts[k] / total
            s += p * p
        out = 1.0 - s
    else:
        for k in range(counts.shape[0]):
            p = counts[k] / total
            if p > 0.0:
                out -= p * np.log2(p)
    return out


@numba.njit(cache=True, nogil=True)
def _next_random(state):
    # xorshift64*, state is a length-1 uint64 array
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return x * np.uint64(2685821657736338717)


@numba.njit(cache=True, nogil=True)
def _sample_features(n_features, mtry, state, pool):
    """Sorted draw of ``mtry`` distinct feature indices."""
    for i in range(n_features):
        pool[i] = i
    if mtry >= n_features:
        return pool[:n_features].copy()
    for i in range(mtry):
        j = i + np.int64(_next_random(state) % np.uint64(n_features - i))
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp
    return np.sort(pool[:mtry].copy())


@numba.njit(cache=True, nogil=True)
def _best_split(X, y, w, idx, start, end, features, n_classes, criterion, parent_counts, parent_total):
    """Best (feature, threshold, gain) over the candidate features.

    Features are scanned in ascending order and thresholds from low to high;
    a candidate replaces the incumbent only if it gains more by ``_TIE_EPS``.
    """
    parent_imp = _impurity(parent_counts, parent_total, criterion)
    best_f = -1
    best_t = 0.0
    best_gain = -np.inf
    m = end - start
    vals = np.empty(m)
    left = np.empty(n_classes)
    right = np.empty(n_classes)
    for fi in range(features.shape[0]):
        f = features[fi]
        for i in range(m):
            vals[i] = X[idx[start + i], f]
        order = np.argsort(vals, kind="mergesort")
        left[:] = 0.0
        left_total = 0.0
        for i in range(m - 1):
            r = idx[start + order[i]]
            left[y[r]] += w[r]
            left_total += w[r]
            a = vals[order[i]]
            b = vals[order[i + 1]]
            if b <= a:
                continue
            right_total = parent_total - left_total
            for k in range(n_classes):
                right[k] = parent_counts[k] - left[k]
            gain = parent_imp
            gain -= left_total / parent_total * _impurity(left, left_total, criterion)
            gain -= right_total / parent_total * _impurity(right, right_total, criterion)
            if gain > best_gain + _TIE_EPS:
                t = 0.5 * (a + b)
                if t >= b:
                    t = a
                best_f = f
                best_t = t
                best_gain = gain
    return best_f, best_t, best_gain


@numba.njit(cache=True, nogil=True)
def _build_tree(X, y, w, rows, n_classes, mtry, max_depth, min_samples_split, criterion, seed):
    n_rows = rows.shape[0]
    n_features = X.shape[1]
    cap = 2 * n_rows + 1
    feature = -np.ones(cap, dtype=np.int32)
    threshold = np.zeros(cap)
    left_child = -np.ones(cap, dtype=np.int32)
    right_child = -np.ones(cap, dtype=np.int32)
    value = np.zeros((cap, n_classes))
    idx = rows.copy()
    state = np.empty(1, dtype=np.uint64)
    state[0] = np.uint64(seed) | np.uint64(1)
    pool = np.empty(n_features, dtype=np.int64)

    # explicit depth-first stack of (node, start, end, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    top = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_rows
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    counts = np.empty(n_classes)
    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        counts[:] = 0.0
        for i in range(start, end):
            counts[y[idx[i]]] += w[idx[i]]
        total = counts.sum()
        for k in range(n_classes):
            value[node, k] = counts[k] / total if total > 0 else 0.0
        if end - start < min_samples_split or (max_depth >= 0 and depth >= max_depth):
            continue
        if _impurity(counts, total, criterion) <= 0.0:
            continue
        feats = _sample_features(n_features, mtry, state, pool)
        f, t, gain = _best_split(X, y, w, idx, start, end, feats, n_classes, criterion, counts, total)
        if f < 0:
            continue
        # partition rows so that x <= t come first, keeping relative order
        buf = idx[start:end].copy()
        lo = start
        for i in range(buf.shape[0]):
            if X[buf[i], f] <= t:
                idx[lo] = buf[i]
                lo += 1
        hi = lo
        for i in range(buf.shape[0]):
            if X[buf[i], f] > t:
                idx[hi] = buf[i]
                hi += 1
        feature[node] = f
        threshold[node] = t
        left_child[node] = n_nodes
        right_child[node] = n_nodes + 1
        # push right first so the left subtree is numbered and expanded first
        stack[top, 0] = n_nodes + 1
        stack[top, 1] = lo
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = n_nodes
        stack[top, 1] = start
        stack[top, 2] = lo
        stack[top, 3] = depth + 1
        top += 1
        n_nodes += 2
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left_child[:n_nodes].copy(),
        right_child[:n_nodes].copy(),
        value[:n_nodes].copy(),
    )


@numba.njit(cache=True, nogil=True)
def _tree_proba(X, feature, threshold, left, right, value, out):
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        for k in range(value.shape[1]):
            out[i, k] += value[node, k]


def _tree_seed(seed: int, tree_index: int) -> tuple:
    rng = np.random.default_rng([int(seed), int(tree_index)])
    return rng, int(rng.integers(0, 2**63 - 1))


def fit_tree(X, y_idx, weights, n_classes, spec: ForestSpec, tree_index: int = 0) -> Tree:
    """Grow one tree on a bootstrap resample drawn from ``(spec.seed, tree_index)``."""
    n = len(y_idx)
    rng, seed = _tree_seed(spec.seed, tree_index)
    if spec.bootstrap:
        multiplicity = np.bincount(rng.integers(0, n, n), minlength=n).astype(float)
    else:
        multiplicity = np.ones(n)
    w = weights * multiplicity
    rows = np.flatnonzero(w > 0).astype(np.int64)
    max_depth = -1 if spec.max_depth is None else int(spec.max_depth)
    parts = _build_tree(
        X, y_idx, w, rows, n_classes,
        spec.n_candidate_features(X.shape[1]), max_depth, int(spec.min_samples_split),
        CRITERIA.index(spec.criterion), seed,
    )
    return Tree(*parts)


def forest_fit_arrays(X, y_idx, n_classes, spec: ForestSpec = ForestSpec(), threads: int = 1) -> list:
    X = np.ascontiguousarray(X, dtype=float)
    y_idx = np.asarray(y_idx, dtype=np.int64)
    if not np.all(np.isfinite(X)):
        raise ValidationError("feature matrix contains NaN or infinite values")
    if len(np.unique(y_idx)) < 2:
        raise ValidationError("random forest needs at least two classes in the training data")
    if spec.class_weight == "balanced":
        weights = balanced_weights(y_idx, n_classes)
    else:
        weights = np.ones(len(y_idx))
    jobs = range(int(spec.n_estimators))
    if threads <= 1:
        return [fit_tree(X, y_idx, weights, n_classes, spec, t) for t in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: fit_tree(X, y_idx, weights, n_classes, spec, t), jobs))


def forest_proba(trees, X, n_classes: int) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=float)
    out = np.zeros((len(X), n_classes))
    for t in trees:
        _tree_proba(X, t.feature, t.threshold, t.left, t.right, t.value, out)
    return out / max(len(trees), 1)


def forest_predict_idx(trees, X, n_classes: int) -> np.ndarray:
    proba = forest_proba(trees, X, n_classes)
    return np.argmax(proba, axis=1) if len(proba) else np.zeros(0, dtype=np.int64)


def encode_trees(trees, n_classes: int) -> bytes:
    """Length-prefixed little-endian encoding of a list of trees."""
    chunks = [struct.pack("<II", len(trees), n_classes)]
    for t in trees:
        chunks.append(struct.pack("<I", t.n_nodes))
        chunks.append(t.feature.astype("<i4").tobytes())
        chunks.append(t.threshold.astype("<f8").tobytes())
        chunks.append(t.left.astype("<i4").tobytes())
        chunks.append(t.right.astype("<i4").tobytes())
        chunks.append(t.value.astype("<f8").tobytes())
    return b"".join(chunks)


def decode_trees(data: bytes):
    n_trees, n_classes = struct.unpack_from("<II", data, 0)
    pos = 8
    trees = []

    def take(dtype, count):
        nonlocal pos
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos).copy()
        pos += arr.nbytes
        return arr

    for _ in range(n_trees):
        (n_nodes,) = struct.unpack_from("<I", data, pos)
        pos += 4
        feature = take("<i4", n_nodes).astype(np.int32)
        threshold = take("<f8", n_nodes).astype(np.float64)
        left = take("<i4", n_nodes).astype(np.int32)
        right = take("<i4", n_nodes).astype(np.int32)
        value = take("<f8", n_nodes * n_classes).astype(np.float64).reshape(n_nodes, n_classes)
        trees.append(Tree(feature, threshold, left, right, value))
    if pos != len(data):
        raise ValidationError("trailing bytes after forest payload")
    return trees, n_classes
