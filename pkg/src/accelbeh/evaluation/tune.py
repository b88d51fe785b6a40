"""Grid search over repeated animal-grouped inner splits."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import AccelBehError, ValidationError
from ..features.base import FeatureMatrix
from ..models import fit_model, predict
from .metrics import balanced_accuracy
from .split import n_train_animals

log = logging.getLogger(__name__)

INNER_RATIO = 14 / 21
ITERATIONS = 10


@dataclass(frozen=True)
class GridResult:
    params: dict
    fold_ba: tuple
    errors: tuple = ()  # (fold, message) for folds whose fit failed

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_ba))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_ba))

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "fold_ba": list(self.fold_ba),
            "mean_ba": self.mean,
            "std_ba": self.std,
            "errors": [{"fold": f, "message": m} for f, m in self.errors],
        }


@dataclass(frozen=True)
class TuneResult:
    model_family: str
    best_params: dict
    results: tuple  # GridResult per grid point, in grid order
    folds: tuple = field(default=())  # (train animals, validation animals) per iteration

    @property
    def best(self) -> GridResult:
        return self.results[self.best_index]

    @property
    def best_index(self) -> int:
        return next(i for i, r in enumerate(self.results) if r.params == self.best_params)

    def to_dict(self) -> dict:
        return {
            "model_family": self.model_family,
            "best_params": self.best_params,
            "grid": [r.to_dict() for r in self.results],
            "folds": [{"train": list(t), "validation": list(v)} for t, v in self.folds],
        }


def expand_grid(grid) -> list:
    """A dict of value lists becomes the list of all combinations.

    Keys keep their given order and the last key varies fastest. A list of
    dicts is taken as an explicit grid and returned as is.
    """
    if isinstance(grid, (list, tuple)):
        points = [dict(p) for p in grid]
    else:
        keys = list(grid)
        values = [v if isinstance(v, (list, tuple)) else [v] for v in (grid[k] for k in keys)]
        points = [dict(zip(keys, combo)) for combo in itertools.product(*values)]
    if not points:
        raise ValidationError("the hyperparameter grid is empty")
    return points


def inner_splits(animals: Sequence[str], iterations: int = ITERATIONS, ratio: float = INNER_RATIO, seed: int = 0):
    """Independent seeded random animal partitions, one per iteration."""
    animals = sorted(set(animals))
    if len(animals) < 2:
        raise ValidationError("inner splits need at least two training animals")
    k = n_train_animals(len(animals), ratio)
    folds = []
    for i in range(iterations):
        order = np.random.default_rng([int(seed), i]).permutation(len(animals))
        train = tuple(sorted(animals[j] for j in order[:k]))
        val = tuple(sorted(animals[j] for j in order[k:]))
        folds.append((train, val))
    return folds


def _score(fm: FeatureMatrix, family, params, fold, seed):
    train, val = fold
    tr = np.flatnonzero(np.isin(fm.animal_ids, train))
    va = np.flatnonzero(np.isin(fm.animal_ids, val))
    try:
        model = fit_model(family, fm.subset(tr), params=params, seed=seed)
        sub = fm.subset(va)
        return balanced_accuracy(sub.labels, predict(model, sub)), None
    except (AccelBehError, ValueError, np.linalg.LinAlgError) as exc:
        return 0.0, f"{type(exc).__name__}: {exc}"


def tune(
    train: FeatureMatrix,
    model_family: str,
    grid,
    iterations: int = ITERATIONS,
    inner_ratio: float = INNER_RATIO,
    seed: int = 0,
    threads: int = 1,
) -> TuneResult:
    """Pick the grid point with the highest mean validation balanced accuracy.

    Every grid point is scored on the same ``iterations`` inner splits. Ties
    go to the earliest grid point. A failed fit scores 0 for that fold.
    """
    if not train.animal_ids or not train.labels:
        raise ValidationError("tuning needs animal ids and labels on every row")
    points = expand_grid(grid)
    folds = inner_splits(train.animal_ids, iterations, inner_ratio, seed)
    jobs = [(g, f) for g in range(len(points)) for f in range(len(folds))]

    def run(job):
        g, f = job
        return _score(train, model_family, points[g], folds[f], seed)

    if threads <= 1:
        scores = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(run, jobs))
    results = []
    for g, params in enumerate(points):
        own = scores[g * len(folds):(g + 1) * len(folds)]
        errors = tuple((f, msg) for f, (_, msg) in enumerate(own) if msg)
        for f, msg in errors:
            log.warning("%s %s fold %d failed: %s", model_family, params, f, msg)
        results.append(GridResult(params, tuple(float(ba) for ba, _ in own), errors))
    best = 0
    for g in range(1, len(results)):
        if results[g].mean > results[best].mean:
            best = g
    return TuneResult(model_family, results[best].params, tuple(results), tuple(folds))
