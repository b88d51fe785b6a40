"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import DataError, InvariantError, ValidationError

log = logging.getLogger("accelbeh")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INVARIANT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_json(path):
    return json.loads(Path(path).read_text())


def _out(path) -> Path:
    """Output path with its parent directory created."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(obj, path):
    _out(path).write_text(json.dumps(obj, indent=2) + "\n")


def _load_windows(paths):
    from .windowing import load_windows

    windows = []
    for p in paths:
        windows.extend(load_windows(p))
    return windows


def _restrict(fm, split_path, part):
    """Rows of ``fm`` that belong to the ``part`` animals of a split file."""
    if split_path is None:
        return fm
    animals = set(_read_json(split_path)[f"{part}_animals"])
    rows = [i for i, a in enumerate(fm.animal_ids) if a in animals]
    return fm.subset(rows)


def cmd_synth(args):
    from .synthgen import generate, write_dataset

    dataset = generate(n_animals=args.animals, seed=args.seed, sample_rate_hz=args.sample_rate,
                       bouts_per_behaviour=args.bouts)
    accel, ann = write_dataset(dataset, args.out)
    log.info("wrote %d animals to %s and %s (seed %d)", len(dataset), accel, ann, args.seed)


def cmd_derive(args):
    from .ingest import align, parse_accel_csv, parse_annotations
    from .signal import derive_channels, write_channels_csv

    series = parse_accel_csv(args.accel, args.sample_rate, args.animal_id)
    if args.annotations:
        series = align(series, parse_annotations(args.annotations, series.animal_id), args.offset)
    write_channels_csv(derive_channels(series, args.cutoff), _out(args.out))
    log.info("wrote derived channels for %s to %s", series.animal_id, args.out)


def cmd_segment(args):
    from .signal import read_channels_csv
    from .windowing import WindowingSpec, save_windows, segment

    spec = WindowingSpec(args.duration, args.overlap, args.purity)
    windows = []
    for path in args.channels:
        animal = Path(path).name.split(".")[0]
        cs = read_channels_csv(path, animal, args.sample_rate)
        if cs.labels is None:
            raise ValidationError(f"{path} has no labels; run derive with --annotations")
        windows.extend(segment(cs, spec))
    save_windows(windows, _out(args.out))
    log.info("wrote %d windows to %s", len(windows), args.out)


def cmd_extract(args):
    from .features.matrix import extract, save_matrix
    from .features.rocket import model_from_dict, rocket_fit, rocket_fit_per_channel

    windows = _load_windows(args.windows)
    rocket_model = None
    if args.set == "rocket":
        if args.rocket_model and Path(args.rocket_model).exists() and not args.refit:
            rocket_model = model_from_dict(_read_json(args.rocket_model))
        else:
            fit_windows = windows
            if args.split:
                train = set(_read_json(args.split)["train_animals"])
                fit_windows = [w for w in windows if w.animal_id in train]
            else:
                log.warning("fitting rocket kernels on every window given; pass --split to keep test animals out")
            fit = rocket_fit_per_channel if args.per_channel else rocket_fit
            rocket_model = fit(fit_windows, args.rocket_features, args.seed)
            if args.rocket_model:
                _write_json(rocket_model.to_dict(), args.rocket_model)
    fm = extract(windows, args.set, rocket_model, args.sample_rate, args.welch_segment)
    save_matrix(fm, _out(args.out))
    log.info("wrote %d x %d %s matrix to %s", fm.n_rows, len(fm.names), args.set, args.out)


def cmd_split(args):
    from .evaluation.split import split_windows

    split = split_windows(_load_windows(args.windows), args.ratio, args.candidates, args.seed)
    _write_json({"train_animals": list(split.train_animals), "test_animals": list(split.test_animals),
                 "objective": split.objective, "ratio": args.ratio, "seed": args.seed}, args.out)
    log.info("train %d animals, test %d animals, objective %.4f",
             len(split.train_animals), len(split.test_animals), split.objective)


def _grid_for(args):
    from .config import DEFAULT_CONFIG, tomllib

    if args.grid:
        with open(args.grid, "rb") as fh:
            loaded = tomllib.load(fh)
        return loaded.get(args.model, loaded)
    return DEFAULT_CONFIG["grids"][args.model]


def cmd_tune(args):
    from .evaluation.tune import tune
    from .features.matrix import load_matrix

    fm = _restrict(load_matrix(args.matrix), args.split, "train")
    result = tune(fm, args.model, _grid_for(args), args.iterations, args.inner_ratio, args.seed, args.threads)
    _write_json(result.to_dict(), args.out)
    log.info("best %s parameters: %s (mean BA %.3f)", args.model, result.best_params, result.best.mean)


def cmd_train(args):
    from .features.matrix import load_matrix
    from .models import fit_model, save_model

    fm = _restrict(load_matrix(args.matrix), args.split, "train")
    params = {}
    if args.tuned:
        tuned = _read_json(args.tuned)
        if tuned["model_family"] != args.model:
            raise ValidationError(f"{args.tuned} was tuned for {tuned['model_family']}, not {args.model}")
        params = tuned["best_params"]
    if args.params:
        params.update(json.loads(args.params))
    model = fit_model(args.model, fm, params=params, seed=args.seed, threads=args.threads)
    save_model(model, _out(args.out))
    log.info("trained %s on %d windows, wrote %s", args.model, fm.n_rows, args.out)


def cmd_evaluate(args):
    from .evaluation.metrics import compute_metrics
    from .features.matrix import load_matrix
    from .models import load_model, predict

    model = load_model(args.model_file)
    fm = _restrict(load_matrix(args.matrix), args.split, "test")
    if not fm.labels:
        raise ValidationError("the feature matrix has no labels to evaluate against")
    unknown = sorted(set(fm.labels) - set(model.classes))
    classes = tuple(model.classes) + tuple(unknown)
    report = compute_metrics(fm.labels, predict(model, fm), classes)
    out = report.to_dict()
    if args.out:
        _write_json(out, args.out)
    print(f"balanced accuracy {report.balanced_accuracy:.4f} on {report.n_test_windows} windows")


def cmd_experiment(args):
    from .config import dumps_config, load_config
    from .evaluation.experiment import run_experiment
    from .evaluation.report import summary_text, write_bundle

    config = load_config(args.config, args.set or (), args.seed)
    if args.out:
        config["output"]["dir"] = args.out
    if args.print_config:
        sys.stdout.write(dumps_config(config))
        return
    log.info("seed %d, threads %d", config["seed"], args.threads)
    result = run_experiment(config, threads=args.threads)
    if set(result.rocket_fit_animals) - set(result.report["split"]["train_animals"]):
        raise InvariantError("rocket kernels were fitted on windows from test animals")
    path = write_bundle(result.report, result.timings, config["output"]["dir"])
    print(summary_text(result.report))
    log.info("wrote %s", path)


def cmd_report(args):
    from .evaluation.report import load_report, render_text, write_confusion_csvs

    report = load_report(args.report)
    text = render_text(report)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "report.txt").write_text(text)
        write_confusion_csvs(report, args.out)
    sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="accelbeh", description="Behaviour classification from collar accelerometers.")
    p.add_argument("--version", action="version", version=f"accelbeh {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic labelled dataset")
    s.add_argument("--out", required=True, help="output directory (accel/ and annotations/ are created)")
    s.add_argument("--animals", type=int, default=12)
    s.add_argument("--bouts", type=int, default=2, help="bouts per behaviour per animal")
    s.add_argument("--sample-rate", type=float, default=25.0)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("derive", help="derive the 8 channels from one accelerometer CSV")
    s.add_argument("--accel", required=True)
    s.add_argument("--annotations", help="annotation CSV used to label samples")
    s.add_argument("--animal-id", help="defaults to the file name stem")
    s.add_argument("--sample-rate", type=float, default=25.0)
    s.add_argument("--offset", type=float, default=0.0, help="seconds added to annotation times")
    s.add_argument("--cutoff", type=float, default=0.3, help="gravity low-pass cutoff in Hz")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_derive)

    s = sub.add_parser("segment", help="cut labelled channel files into windows")
    s.add_argument("--channels", nargs="+", required=True, help="channel CSVs; animal id is the file stem")
    s.add_argument("--sample-rate", type=float, default=25.0)
    s.add_argument("--duration", type=float, default=3.0)
    s.add_argument("--overlap", type=float, default=0.5)
    s.add_argument("--purity", type=float, default=1.0)
    s.add_argument("--out", required=True, help="windows .npz")
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("extract", help="compute a feature matrix")
    s.add_argument("--windows", nargs="+", required=True)
    s.add_argument("--set", required=True, choices=("hc", "catch24", "rocket"))
    s.add_argument("--sample-rate", type=float, default=25.0)
    s.add_argument("--rocket-model", help="JSON kernel file; read if present, else written after fitting")
    s.add_argument("--refit", action="store_true", help="fit rocket kernels even if --rocket-model exists")
    s.add_argument("--split", help="split JSON; rocket kernels are fitted on its training animals only")
    s.add_argument("--rocket-features", type=int, default=10000)
    s.add_argument("--per-channel", action="store_true", help="one univariate rocket per channel")
    s.add_argument("--welch-segment", type=int, default=64, help="PSD segment length for spectral entropy (hc)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help=".csv or .npz")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("split", help="animal-grouped train/test split")
    s.add_argument("--windows", nargs="+", required=True)
    s.add_argument("--ratio", type=float, default=0.7)
    s.add_argument("--candidates", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("tune", help="grid search over repeated inner animal splits")
    s.add_argument("--matrix", required=True)
    s.add_argument("--model", required=True, choices=("ridge_cv", "random_forest"))
    s.add_argument("--grid", help="TOML grid; a [ridge_cv] or [random_forest] table or top-level keys")
    s.add_argument("--split", help="split JSON; tuning uses its training animals")
    s.add_argument("--iterations", type=int, default=10)
    s.add_argument("--inner-ratio", type=float, default=14 / 21)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("train", help="fit one model")
    s.add_argument("--matrix", required=True)
    s.add_argument("--model", required=True, choices=("ridge_cv", "random_forest"))
    s.add_argument("--tuned", help="tune output whose best parameters are used")
    s.add_argument("--params", help="JSON object of hyperparameters (applied after --tuned)")
    s.add_argument("--split", help="split JSON; training uses its training animals")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", help="score a model on labelled windows")
    s.add_argument("--matrix", required=True)
    s.add_argument("--model-file", required=True)
    s.add_argument("--split", help="split JSON; evaluation uses its test animals")
    s.add_argument("--out", help="metrics JSON")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("experiment", help="run the full pipeline from a config file")
    s.add_argument("--config", help="TOML config; defaults are used for missing keys")
    s.add_argument("--seed", type=int, help="overrides the config seed")
    s.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config value, e.g. split.ratio=0.7")
    s.add_argument("--out", help="output directory (overrides output.dir)")
    s.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("report", help="render text tables from a report JSON")
    s.add_argument("--report", required=True)
    s.add_argument("--out", help="directory for report.txt and confusion CSVs")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        if getattr(args, "threads", 1) < 1:
            parser.error("--threads must be at least 1")
        args.func(args)
    except DataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except InvariantError as exc:
        log.error("invariant violated: %s", exc)
        return EXIT_INVARIANT
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
