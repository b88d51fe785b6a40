"""Writing experiment results: JSON, aligned text tables and confusion CSVs.

``report.json`` holds only results, so it is byte-identical for a fixed seed.
Wall-clock timings go to ``timings.json`` and ``timings.txt``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _table(header, rows) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = []
    for k, r in enumerate(cells):
        lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def summary_text(report: dict) -> str:
    """Balanced accuracy of every feature set and model pair."""
    sets = list(dict.fromkeys(r["feature_set"] for r in report["results"]))
    models = list(dict.fromkeys(r["model"] for r in report["results"]))
    lookup = {(r["feature_set"], r["model"]): r["metrics"]["balanced_accuracy"] for r in report["results"]}
    rows = [[fs] + [f"{lookup[(fs, m)]:.3f}" if (fs, m) in lookup else "-" for m in models] for fs in sets]
    return _table(["feature set"] + models, rows)


def per_class_text(result: dict) -> str:
    m = result["metrics"]
    rows = []
    for c in m["classes"]:
        pc = m["per_class"][c]
        prec = f"{pc['precision']:.3f}" + ("*" if pc["precision_undefined"] else "")
        rows.append([c, f"{pc['sensitivity']:.3f}", f"{pc['specificity']:.3f}", prec, pc["support"]])
    return _table(["behaviour", "sensitivity", "specificity", "precision", "support"], rows)


def tuning_text(result: dict) -> str:
    rows = []
    for g in result["tuning"]["grid"]:
        params = ", ".join(f"{k}={v}" for k, v in g["params"].items())
        rows.append([params, f"{g['mean_ba']:.3f}", f"{g['std_ba']:.3f}", len(g["errors"])])
    return _table(["hyperparameters", "mean BA", "std BA", "failed folds"], rows)


def confusion_percent(confusion) -> np.ndarray:
    cm = np.asarray(confusion, dtype=float)
    rows = cm.sum(axis=1, keepdims=True)
    return np.divide(100.0 * cm, rows, out=np.zeros_like(cm), where=rows > 0)


def confusion_text(result: dict) -> str:
    classes = result["metrics"]["classes"]
    pct = confusion_percent(result["metrics"]["confusion"])
    rows = [[c] + [f"{v:.1f}" for v in row] for c, row in zip(classes, pct)]
    return _table(["actual \\ predicted (%)"] + list(classes), rows)


def render_text(report: dict) -> str:
    parts = [
        f"seed {report['seed']}, {report['dataset']['n_animals']} animals, {report['dataset']['n_windows']} windows",
        f"train animals: {', '.join(report['split']['train_animals'])}",
        f"test animals: {', '.join(report['split']['test_animals'])}",
        "",
        "Balanced accuracy on the test animals",
        summary_text(report),
    ]
    for r in report["results"]:
        title = f"{r['feature_set']} + {r['model']} ({r['n_features']} features)"
        parts += ["", "=" * len(title), title, "=" * len(title), "", tuning_text(r), "", per_class_text(r), "", confusion_text(r)]
    if any(pc["precision_undefined"] for r in report["results"] for pc in r["metrics"]["per_class"].values()):
        parts += ["", "* class never predicted; precision reported as 0"]
    return "\n".join(parts) + "\n"


def timings_text(timings: dict) -> str:
    rows = [
        [t["feature_set"], t["model"], f"{t['feature_extraction_s']:.2f}", f"{t['tuning_s']:.2f}",
         f"{t['training_s']:.2f}", f"{t['testing_s']:.3f}"]
        for t in timings["combinations"]
    ]
    return _table(["feature set", "model", "features (s)", "tuning (s)", "training (s)", "testing (s)"], rows) + "\n"


def write_confusion_csvs(report: dict, out_dir) -> list:
    paths = []
    for r in report["results"]:
        path = Path(out_dir) / f"confusion_{r['feature_set']}_{r['model']}.csv"
        classes = r["metrics"]["classes"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["actual"] + list(classes))
            for c, row in zip(classes, confusion_percent(r["metrics"]["confusion"])):
                w.writerow([c] + [f"{v:.4f}" for v in row])
        paths.append(path)
    return paths


def write_bundle(report: dict, timings: dict, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps_report(report))
    (out / "report.txt").write_text(render_text(report))
    (out / "timings.json").write_text(json.dumps(timings, indent=2) + "\n")
    (out / "timings.txt").write_text(timings_text(timings))
    write_confusion_csvs(report, out)
    return out / "report.json"


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())
