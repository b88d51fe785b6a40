"""Slow, direct reference computations used as test oracles."""

from fractions import Fraction
from itertools import combinations

import numpy as np

from accelbeh.features.rocket import KERNEL_INDICES, NUM_KERNELS
from accelbeh.models.forest import entropy, gini
from accelbeh.models.ridge import _standardize, encode_targets, standardize_stats


def naive_rocket(model, X):
    """Evaluate a fitted transform with numpy zero padding, one feature at a time."""
    out = []
    for x in X:
        row = []
        combo = 0
        ch = 0
        for di, d in enumerate(model.dilations):
            pad = 4 * int(d)
            for ki in range(NUM_KERNELS):
                k = model.channel_counts[combo]
                series = x[model.channel_indices[ch:ch + k]].sum(axis=0)
                weights = np.full(9, -1.0)
                weights[list(KERNEL_INDICES[ki])] = 2.0
                padded = np.pad(series, pad)
                n = len(series)
                conv = sum(weights[j] * padded[j * d:j * d + n] for j in range(9))
                pooled = conv if (di + ki) % 2 == 0 else conv[pad:n - pad]
                for _ in range(model.features_per_dilation[di]):
                    row.append(np.count_nonzero(pooled > model.biases[len(row)]) / len(pooled))
                combo += 1
                ch += k
        out.append(row)
    return np.array(out)


def brute_loo(X, y, k, alpha, w):
    """Refit weighted ridge without each sample in turn; standardization fixed."""
    mean, scale = standardize_stats(X)
    Z = _standardize(X, mean, scale)
    Y = encode_targets(y, k)
    out = np.empty_like(Y)
    for i in range(len(y)):
        keep = np.arange(len(y)) != i
        A = np.hstack([np.ones((keep.sum(), 1)), Z[keep]])
        W = w[keep]
        P = alpha * np.eye(A.shape[1])
        P[0, 0] = 0.0
        beta = np.linalg.solve(A.T @ (W[:, None] * A) + P, A.T @ (W[:, None] * Y[keep]))
        out[i] = Y[i] - np.concatenate([[1.0], Z[i]]) @ beta
    return out


def split_gain(xcol, y, t, k, criterion):
    imp = gini if criterion == "gini" else entropy
    left, right = y[xcol <= t], y[xcol > t]
    counts = lambda v: np.bincount(v, minlength=k)
    n = len(y)
    return imp(counts(y)) - len(left) / n * imp(counts(left)) - len(right) / n * imp(counts(right))


def best_stump(X, y, k, criterion, tol=1e-12):
    """(gain, feature, threshold) of the best midpoint split.

    Ties within ``tol`` go to the lowest feature index, then the lowest
    threshold. ``feature`` is -1 when no split reduces impurity.
    """
    best = (0.0, -1, 0.0)
    for j in range(X.shape[1]):
        v = np.unique(X[:, j])
        for a, b in zip(v[:-1], v[1:]):
            t = (a + b) / 2
            g = split_gain(X[:, j], y, t, k, criterion)
            if g > best[0] + tol:
                best = (g, j, t)
    return best


def brute_split(animal_ids, labels, k):
    """First partition (in lexicographic order) with the smallest objective, in exact arithmetic."""
    animals = sorted(set(animal_ids))
    classes = sorted(set(labels))
    best, best_obj = None, None
    for train in combinations(animals, k):
        obj = Fraction(0)
        tr = [l for a, l in zip(animal_ids, labels) if a in train]
        te = [l for a, l in zip(animal_ids, labels) if a not in train]
        for c in classes:
            p_tr = Fraction(tr.count(c), len(tr)) if tr else Fraction(0)
            p_te = Fraction(te.count(c), len(te)) if te else Fraction(0)
            obj += abs(p_tr - p_te)
        obj /= len(classes)
        if best_obj is None or obj < best_obj:
            best, best_obj = train, obj
    return best, float(best_obj)


def hand_metrics(cm):
    """Per-class (sensitivity, specificity, precision) from one-vs-rest counts."""
    out = []
    n = cm.sum()
    for i in range(len(cm)):
        tp = cm[i, i]
        fn = cm[i].sum() - tp
        fp = cm[:, i].sum() - tp
        tn = n - tp - fn - fp
        out.append((tp / (tp + fn) if tp + fn else 0.0, tn / (tn + fp) if tn + fp else 0.0,
                    tp / (tp + fp) if tp + fp else 0.0))
    return out


def expand_confusion(cm, classes):
    actual, predicted = [], []
    for i, a in enumerate(classes):
        for j, p in enumerate(classes):
            actual += [a] * int(cm[i, j])
            predicted += [p] * int(cm[i, j])
    return actual, predicted
