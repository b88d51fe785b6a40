import json
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from accelbeh.errors import ValidationError
from accelbeh.evaluation.metrics import cohens_kappa, compute_metrics, confusion_matrix
from accelbeh.evaluation.split import grouped_stratified_split
from accelbeh.evaluation.tune import expand_grid, inner_splits, tune
from accelbeh.evaluation.report import confusion_percent, dumps_report, render_text
from accelbeh.features.base import FeatureMatrix
from oracles import brute_split, expand_confusion, hand_metrics

CLASSES = ("lying", "running", "walking", "grooming", "drinking_milk", "other")


@given(st.integers(0, 10_000), st.integers(4, 8))
def test_exhaustive_split_matches_brute_force(seed, n_animals):
    rng = np.random.default_rng(seed)
    animals, labels = [], []
    for a in range(n_animals):
        for _ in range(int(rng.integers(1, 12))):
            animals.append(f"a{a}")
            labels.append(CLASSES[int(rng.integers(0, 3))])
    split = grouped_stratified_split(animals, labels, 0.7, candidates=10_000, seed=seed)
    k = int(round(0.7 * n_animals))
    train, obj = brute_split(animals, labels, k)
    assert split.train_animals == train
    assert split.objective == pytest.approx(obj, abs=1e-12)


def test_thirty_animals_give_21_and_9():
    animals = [f"calf{i:02d}" for i in range(30) for _ in range(6)]
    labels = [CLASSES[j] for _ in range(30) for j in range(6)]
    split = grouped_stratified_split(animals, labels, 0.7, candidates=500, seed=0)
    assert len(split.train_animals) == 21 and len(split.test_animals) == 9
    assert not set(split.train_animals) & set(split.test_animals)
    assert set(split.train_animals) | set(split.test_animals) == set(animals)
    again = grouped_stratified_split(animals, labels, 0.7, candidates=500, seed=0)
    assert again == split


def test_identical_animals_give_zero_objective():
    split = grouped_stratified_split(["a", "a", "b", "b"], ["lying", "running"] * 2, 0.5)
    assert split.objective == 0


def test_split_errors(caplog):
    with pytest.raises(ValidationError):
        grouped_stratified_split(["a", "a"], ["lying", "running"])
    with pytest.raises(ValidationError):
        grouped_stratified_split(["a", "b"], ["lying"])
    grouped_stratified_split(["a", "b", "c"], ["lying", "lying", "running"], 0.5)


def test_binary_example():
    actual = ["pos"] * 4 + ["neg"] * 6
    predicted = ["pos"] * 3 + ["neg"] + ["neg"] * 4 + ["pos"] * 2
    r = compute_metrics(actual, predicted, ("pos", "neg"))
    m = r.per_class["pos"]
    assert (m.sensitivity, m.specificity, m.precision) == pytest.approx((0.75, 2 / 3, 0.6))
    assert r.balanced_accuracy == pytest.approx((0.75 + 2 / 3) / 2)


@pytest.mark.parametrize("seed", range(10))
def test_randomized_confusion_fixtures(seed):
    rng = np.random.default_rng(seed)
    cm = rng.integers(0, 20, size=(6, 6))
    actual, predicted = expand_confusion(cm, CLASSES)
    r = compute_metrics(actual, predicted, CLASSES)
    np.testing.assert_array_equal(r.confusion, cm)
    for c, (sens, spec, prec) in zip(CLASSES, hand_metrics(cm)):
        m = r.per_class[c]
        assert (m.sensitivity, m.specificity, m.precision) == pytest.approx((sens, spec, prec), abs=1e-12)
    supported = [s for (s, _, _), row in zip(hand_metrics(cm), cm) if row.sum()]
    assert r.balanced_accuracy == pytest.approx(np.mean(supported), abs=1e-12)


def test_majority_predictor_and_perfect():
    actual = [c for c in CLASSES for _ in range(10)]
    r = compute_metrics(actual, ["lying"] * len(actual), CLASSES)
    assert abs(r.balanced_accuracy - 1 / 6) < 1e-12
    assert r.per_class["running"].precision_undefined and r.per_class["running"].precision == 0
    p = compute_metrics(actual, actual, CLASSES)
    assert p.balanced_accuracy == 1.0
    assert all(m.sensitivity == m.specificity == m.precision == 1.0 for m in p.per_class.values())
    with pytest.raises(ValidationError):
        compute_metrics(actual, actual[:-1], CLASSES)
    with pytest.raises(ValidationError):
        confusion_matrix(["x"], ["lying"], CLASSES)


def test_class_permutation_changes_no_values():
    rng = np.random.default_rng(3)
    actual = list(rng.choice(CLASSES, 200))
    predicted = list(rng.choice(CLASSES, 200))
    a = compute_metrics(actual, predicted, CLASSES)
    order = [5, 2, 0, 4, 1, 3]
    perm = tuple(CLASSES[i] for i in order)
    b = compute_metrics(actual, predicted, perm)
    assert a.balanced_accuracy == b.balanced_accuracy
    assert a.per_class == b.per_class
    np.testing.assert_array_equal(b.confusion, a.confusion[np.ix_(order, order)])
    np.testing.assert_allclose(a.confusion_percent().sum(axis=1), 100.0)


def test_kappa_examples():
    rng = np.random.default_rng(0)
    seq = list(rng.choice(CLASSES, 500))
    assert cohens_kappa(seq, seq) == 1.0
    assert cohens_kappa(["x"] * 5, ["x"] * 5) == 1.0
    a = np.array([0, 1] * 50)
    b = a.copy()
    b[:5] = 1 - b[:5]
    b[50:55] = 1 - b[50:55]
    assert cohens_kappa(a, b) == pytest.approx(0.8)
    r1 = rng.integers(0, 4, 100_000)
    r2 = rng.integers(0, 4, 100_000)
    assert abs(cohens_kappa(r1, r2)) < 0.05
    with pytest.raises(ValidationError):
        cohens_kappa([1, 2], [1])


def test_expand_grid_order():
    pts = expand_grid({"a": [1, 2], "b": ["x", "y"]})
    assert pts == [{"a": 1, "b": "x"}, {"a": 1, "b": "y"}, {"a": 2, "b": "x"}, {"a": 2, "b": "y"}]
    assert expand_grid({"a": 3}) == [{"a": 3}]
    with pytest.raises(ValidationError):
        expand_grid([])


def test_inner_splits_are_seeded_14_7():
    animals = [f"a{i:02d}" for i in range(21)]
    folds = inner_splits(animals, 10, 14 / 21, seed=2)
    assert len(folds) == 10
    assert all(len(t) == 14 and len(v) == 7 and not set(t) & set(v) for t, v in folds)
    assert folds == inner_splits(list(reversed(animals)), 10, 14 / 21, seed=2)
    assert len({f for f in folds}) > 1


def _toy_matrix(n_animals=6, per=12, noise=0.3, seed=0, p=3):
    rng = np.random.default_rng(seed)
    rows, labels, aids = [], [], []
    for a in range(n_animals):
        for i in range(per):
            c = i % 3
            rows.append(rng.normal(scale=noise, size=p) + 2 * np.eye(p)[c])
            labels.append(CLASSES[c])
            aids.append(f"a{a}")
    return FeatureMatrix(tuple(f"f{j}" for j in range(p)), np.array(rows), tuple(aids), tuple(range(len(rows))), tuple(labels))


def test_tune_single_point_and_dominated_point():
    fm = _toy_matrix()
    one = tune(fm, "random_forest", {"n_estimators": [5]}, iterations=4, inner_ratio=4 / 6, seed=1)
    assert one.best_params == {"n_estimators": 5}
    assert len(one.results) == 1 and len(one.best.fold_ba) == 4
    # an impossible grid point fails on every fold and scores 0
    two = tune(fm, "random_forest", [{"n_estimators": 0}, {"n_estimators": 5}], iterations=4, inner_ratio=4 / 6, seed=1)
    assert two.best_params == {"n_estimators": 5}
    assert two.results[0].fold_ba == (0.0,) * 4 and len(two.results[0].errors) == 4
    assert json.loads(json.dumps(two.to_dict()))["best_params"] == {"n_estimators": 5}


def test_tie_goes_to_first_point():
    fm = _toy_matrix(noise=0.01)
    res = tune(fm, "ridge_cv", [{"alphas": [1.0]}, {"alphas": [2.0]}], iterations=3, inner_ratio=4 / 6)
    assert res.results[0].mean == res.results[1].mean == 1.0
    assert res.best_params == {"alphas": [1.0]}


def test_ridge_alpha_lands_inside_grid():
    # many noisy features with a weak shared signal need moderate shrinkage
    rng = np.random.default_rng(0)
    n, p = 60, 40
    y = np.arange(n) % 2
    X = rng.normal(size=(n, p)) + 0.6 * (2 * y[:, None] - 1) * (rng.random(p) < 0.5)
    from accelbeh.models.ridge import RidgeCVSpec, ridge_fit_arrays
    spec = RidgeCVSpec()
    p_ = ridge_fit_arrays(X, y, 2, spec)
    assert min(spec.alphas) < p_.alpha < max(spec.alphas)


@pytest.fixture(scope="module")
def small_experiment():
    from accelbeh.config import load_config
    from accelbeh.evaluation.experiment import run_experiment

    config = load_config(overrides=[
        "synth.n_animals=5", "synth.bouts_per_behaviour=1", "features.sets=['hc', 'rocket']",
        "features.rocket_features=840", "tuning.iterations=2", "grids.random_forest.n_estimators=[5]",
        "grids.random_forest.max_features=['sqrt']", "grids.random_forest.criterion=['gini']",
    ])
    return run_experiment(config)


def test_experiment_report_structure(small_experiment, tmp_path):
    from accelbeh.evaluation.report import load_report, write_bundle

    rep = small_experiment.report
    combos = [(r["feature_set"], r["model"]) for r in rep["results"]]
    assert combos == [(f, m) for f in ("hc", "rocket") for m in ("ridge_cv", "random_forest")]
    assert not set(rep["split"]["train_animals"]) & set(rep["split"]["test_animals"])
    assert small_experiment.rocket_fit_animals == tuple(rep["split"]["train_animals"])
    for r in rep["results"]:
        m = r["metrics"]
        cm = np.array(m["confusion"])
        assert cm.sum() == m["n_test_windows"] == rep["split"]["n_test_windows"]
        recalls = [m["per_class"][c]["sensitivity"] for c, row in zip(m["classes"], cm) if row.sum()]
        assert m["balanced_accuracy"] == pytest.approx(np.mean(recalls))
    for t in small_experiment.timings["combinations"]:
        assert {"feature_extraction_s", "training_s", "testing_s"} <= set(t)
    path = write_bundle(rep, small_experiment.timings, tmp_path)
    assert load_report(path) == json.loads(dumps_report(rep))
    assert (tmp_path / "confusion_hc_ridge_cv.csv").exists()
    assert "hc" in render_text(rep) and "output" not in rep["config"]
    np.testing.assert_allclose(confusion_percent([[1, 1], [0, 0]]), [[50, 50], [0, 0]])
