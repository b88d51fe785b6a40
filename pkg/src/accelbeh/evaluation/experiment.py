"""End-to-end experiment: split, extract, tune, refit and test."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..config import load_config, result_config
from ..errors import DataError, ValidationError
from ..features.matrix import extract
from ..features.rocket import rocket_fit, rocket_fit_per_channel
from ..ingest import align, parse_accel_csv, parse_annotations
from ..models import fit_model, predict
from ..models.base import order_classes
from ..signal import derive_channels
from ..synthgen import DEFAULT_ARCHETYPES, generate
from ..windowing import WindowingSpec, segment
from .metrics import compute_metrics
from .split import split_windows
from .tune import tune

log = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    report: dict
    timings: dict
    metrics: dict = field(default_factory=dict)  # (feature_set, model) -> MetricsReport
    # animals whose windows the rocket kernels were fitted on, for leakage checks
    rocket_fit_animals: tuple = ()


def load_dataset(config: dict):
    """(series, annotation track) pairs from synthesis or from CSV files."""
    data = config["data"]
    fs = float(data["sample_rate_hz"])
    if data["source"] == "synth":
        syn = config["synth"]
        return generate(DEFAULT_ARCHETYPES, int(syn["n_animals"]), int(config["seed"]), fs, int(syn["bouts_per_behaviour"]))
    accel_dir = Path(data["accel_dir"])
    ann_dir = Path(data["annotations_dir"])
    pairs = []
    for path in sorted(accel_dir.glob("*.csv")):
        series = parse_accel_csv(path, fs)
        ann = ann_dir / path.name
        if not ann.exists():
            raise ValidationError(f"no annotation file {ann} for {path.name}")
        pairs.append((series, parse_annotations(ann, series.animal_id)))
    if not pairs:
        raise ValidationError(f"no accelerometer CSV files in {accel_dir}")
    return pairs


def build_windows(dataset, config: dict) -> list:
    spec = WindowingSpec(**config["windowing"])
    windows = []
    for series, track in dataset:
        labelled = align(series, track, float(config["data"]["offset_s"]))
        windows.extend(segment(derive_channels(labelled, float(config["signal"]["cutoff_hz"])), spec))
    return windows


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except DataError as exc:
                raise type(exc)(f"[{name}] {exc}") from exc
        return inner
    return wrap


def run_experiment(config: dict = None, threads: int = 1) -> ExperimentResult:
    """Run every feature set and model family named in ``config``.

    ``threads`` sizes the worker pools only; results do not depend on it.
    """
    config = load_config() if config is None else config
    seed = int(config["seed"])
    timings = {"stages": {}, "combinations": []}

    t0 = time.perf_counter()
    dataset = _stage("ingest")(load_dataset)(config)
    windows = _stage("windowing")(build_windows)(dataset, config)
    timings["stages"]["prepare_windows"] = time.perf_counter() - t0
    if not windows:
        raise ValidationError("[windowing] no labelled windows were produced")
    classes = order_classes([w.label for w in windows])

    t0 = time.perf_counter()
    split = _stage("split")(split_windows)(
        windows, float(config["split"]["ratio"]), int(config["split"]["candidates"]), seed
    )
    timings["stages"]["split"] = time.perf_counter() - t0
    train_w = [w for w in windows if w.animal_id in set(split.train_animals)]
    test_w = [w for w in windows if w.animal_id in set(split.test_animals)]

    results = []
    metrics = {}
    rocket_animals = ()
    fs = float(config["data"]["sample_rate_hz"])
    for feature_set in config["features"]["sets"]:
        t0 = time.perf_counter()
        rocket_model = None
        if feature_set == "rocket":
            target = int(config["features"]["rocket_features"])
            fit = rocket_fit if config["features"]["rocket_mode"] == "multivariate" else rocket_fit_per_channel
            rocket_model = fit(train_w, target, seed)
            rocket_animals = tuple(sorted({w.animal_id for w in train_w}))
        segment_len = int(config["features"]["welch_segment"])
        fm_train = extract(train_w, feature_set, rocket_model, fs, segment_len)
        fm_test = extract(test_w, feature_set, rocket_model, fs, segment_len)
        t_features = time.perf_counter() - t0
        for family in config["models"]["families"]:
            t0 = time.perf_counter()
            tuned = _stage("tune")(tune)(
                fm_train, family, config["grids"][family],
                int(config["tuning"]["iterations"]), float(config["tuning"]["inner_ratio"]), seed, threads,
            )
            t_tune = time.perf_counter() - t0
            t0 = time.perf_counter()
            model = _stage("train")(fit_model)(family, fm_train, params=tuned.best_params, seed=seed, threads=threads)
            t_train = time.perf_counter() - t0
            t0 = time.perf_counter()
            predicted = predict(model, fm_test)
            t_test = time.perf_counter() - t0
            report = compute_metrics(fm_test.labels, predicted, classes)
            metrics[(feature_set, family)] = report
            extra = {}
            if family == "ridge_cv":
                extra["selected_alpha"] = model.parameters.alpha
            results.append(
                {
                    "feature_set": feature_set,
                    "model": family,
                    "n_features": len(fm_train.names),
                    "schema_hash": fm_train.hash,
                    "tuning": tuned.to_dict(),
                    "refit": extra,
                    "metrics": report.to_dict(),
                }
            )
            timings["combinations"].append(
                {
                    "feature_set": feature_set,
                    "model": family,
                    "feature_extraction_s": t_features,
                    "tuning_s": t_tune,
                    "training_s": t_train,
                    "testing_s": t_test,
                }
            )
            log.info("%s + %s: balanced accuracy %.3f", feature_set, family, report.balanced_accuracy)

    counts = {c: sum(1 for w in windows if w.label == c) for c in classes}
    report = {
        "format": "accelbeh-report",
        "version": __version__,
        "seed": seed,
        "config": result_config(config),
        "dataset": {
            "n_animals": len(dataset),
            "n_windows": len(windows),
            "class_counts": counts,
            "classes": list(classes),
        },
        "split": {
            "train_animals": list(split.train_animals),
            "test_animals": list(split.test_animals),
            "objective": split.objective,
            "n_train_windows": len(train_w),
            "n_test_windows": len(test_w),
        },
        "rocket_fit_animals": list(rocket_animals),
        "results": results,
    }
    return ExperimentResult(report, timings, metrics, rocket_animals)


def summary_table(result: ExperimentResult) -> np.ndarray:
    """Balanced accuracy as (feature sets, models) in config order."""
    rows = result.report["config"]["features"]["sets"]
    cols = result.report["config"]["models"]["families"]
    out = np.zeros((len(rows), len(cols)))
    for i, fs in enumerate(rows):
        for j, fam in enumerate(cols):
            out[i, j] = result.metrics[(fs, fam)].balanced_accuracy
    return out
