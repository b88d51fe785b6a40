"""Animal-grouped splits that balance class proportions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from ..errors import ValidationError

log = logging.getLogger(__name__)

DEFAULT_CANDIDATES = 10_000


@dataclass(frozen=True)
class GroupedSplit:
    train_animals: tuple
    test_animals: tuple
    objective: float

    def __post_init__(self):
        if set(self.train_animals) & set(self.test_animals):
            raise ValidationError("an animal appears in both train and test")
        object.__setattr__(self, "train_animals", tuple(sorted(self.train_animals)))
        object.__setattr__(self, "test_animals", tuple(sorted(self.test_animals)))

    def train_mask(self, animal_ids: Sequence[str]) -> np.ndarray:
        keep = set(self.train_animals)
        return np.array([a in keep for a in animal_ids], dtype=bool)

    def test_mask(self, animal_ids: Sequence[str]) -> np.ndarray:
        keep = set(self.test_animals)
        return np.array([a in keep for a in animal_ids], dtype=bool)


def class_count_table(animal_ids: Sequence[str], labels: Sequence[str]):
    """Sorted animals, sorted classes and an (animals, classes) count matrix."""
    animals = sorted(set(animal_ids))
    classes = sorted(set(labels))
    a_index = {a: i for i, a in enumerate(animals)}
    c_index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(animals), len(classes)))
    for a, c in zip(animal_ids, labels):
        counts[a_index[a], c_index[c]] += 1
    return animals, classes, counts


def split_objective(counts: np.ndarray, train_rows) -> float:
    """Mean over classes of |p_train(c) - p_test(c)| for one partition."""
    mask = np.zeros(len(counts), dtype=bool)
    mask[list(train_rows)] = True
    tr = counts[mask].sum(axis=0)
    te = counts[~mask].sum(axis=0)
    p_tr = tr / tr.sum() if tr.sum() > 0 else np.zeros_like(tr)
    p_te = te / te.sum() if te.sum() > 0 else np.zeros_like(te)
    return float(np.mean(np.abs(p_tr - p_te)))


def _objectives(counts, members):
    """Vectorized objective for a (n_candidates, n_train) index array."""
    total = counts.sum(axis=0)
    tr = counts[members].sum(axis=1)
    te = total - tr
    tr_sum = tr.sum(axis=1, keepdims=True)
    te_sum = te.sum(axis=1, keepdims=True)
    p_tr = np.divide(tr, tr_sum, out=np.zeros_like(tr), where=tr_sum > 0)
    p_te = np.divide(te, te_sum, out=np.zeros_like(te), where=te_sum > 0)
    return np.mean(np.abs(p_tr - p_te), axis=1)


def n_train_animals(n_animals: int, ratio: float) -> int:
    if not 0 < ratio < 1:
        raise ValidationError(f"ratio must lie strictly between 0 and 1, got {ratio}")
    k = int(round(ratio * n_animals))
    return min(max(k, 1), n_animals - 1)


def grouped_stratified_split(
    animal_ids: Sequence[str],
    labels: Sequence[str],
    ratio: float = 0.7,
    candidates: int = DEFAULT_CANDIDATES,
    seed: int = 0,
) -> GroupedSplit:
    """Pick the animal partition whose class proportions agree best.

    All ``C(n, k)`` partitions are scored when there are at most
    ``candidates`` of them; otherwise ``candidates`` seeded random ones are.
    Ties go to the first partition in enumeration or draw order.
    """
    if len(animal_ids) != len(labels):
        raise ValidationError("animal_ids and labels differ in length")
    animals, classes, counts = class_count_table(animal_ids, labels)
    n = len(animals)
    if n < 2:
        raise ValidationError("at least two animals are needed to split")
    k = n_train_animals(n, ratio)
    if math.comb(n, k) <= candidates:
        members = np.array(list(combinations(range(n), k)), dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        members = np.sort(np.argsort(rng.random((candidates, n)), axis=1)[:, :k], axis=1)
    scores = _objectives(counts, members)
    best = int(np.argmin(scores))
    train_rows = set(members[best].tolist())
    test_counts = counts[[i for i in range(n) if i not in train_rows]].sum(axis=0)
    for c, cnt in zip(classes, test_counts):
        if cnt == 0:
            log.warning("class %r has no windows in the test animals", c)
    train = tuple(animals[i] for i in sorted(train_rows))
    test = tuple(animals[i] for i in range(n) if i not in train_rows)
    return GroupedSplit(train, test, float(scores[best]))


def split_windows(windows, ratio: float = 0.7, candidates: int = DEFAULT_CANDIDATES, seed: int = 0) -> GroupedSplit:
    return grouped_stratified_split([w.animal_id for w in windows], [w.label for w in windows], ratio, candidates, seed)
