"""Experiment configuration: TOML file, defaults and ``section.key=value`` overrides."""

from __future__ import annotations

import copy
import sys
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import SpecError

DEFAULT_CONFIG = {
    "seed": 0,
    "data": {
        # "synth" generates animals in memory; "files" reads accel_dir and annotations_dir
        "source": "synth",
        "accel_dir": "",
        "annotations_dir": "",
        "sample_rate_hz": 25.0,
        "offset_s": 0.0,
    },
    "synth": {"n_animals": 12, "bouts_per_behaviour": 2},
    "signal": {"cutoff_hz": 0.3},
    "windowing": {"duration_s": 3.0, "overlap_fraction": 0.5, "purity_threshold": 1.0},
    "split": {"ratio": 0.7, "candidates": 10000},
    "tuning": {"iterations": 10, "inner_ratio": 14 / 21},
    "features": {
        "sets": ["hc", "catch24", "rocket"],
        "rocket_features": 10000,
        "rocket_mode": "multivariate",
        # samples per Welch segment for the spectral entropy feature
        "welch_segment": 64,
    },
    "models": {"families": ["ridge_cv", "random_forest"]},
    "grids": {
        "ridge_cv": {"alpha_range": [[-3, 3], [-1, 10]]},
        "random_forest": {
            "n_estimators": [100],
            "max_features": ["sqrt", "log2"],
            "criterion": ["gini", "entropy"],
        },
    },
    "output": {"dir": "results"},
}

# keys that may change without changing any result
RESULT_NEUTRAL = ("output",)


def _merge(base: dict, extra: dict, path: str = "") -> dict:
    for key, value in extra.items():
        where = f"{path}{key}"
        if key not in base and path != "grids.":
            raise SpecError(f"unknown config key {where!r}")
        if isinstance(value, dict) and isinstance(base.get(key), dict) and path != "grids.":
            _merge(base[key], value, where + ".")
        else:
            base[key] = value
    return base


def parse_value(text: str):
    """Read an override value as TOML, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_override(config: dict, assignment: str) -> dict:
    if "=" not in assignment:
        raise SpecError(f"override {assignment!r} must look like section.key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = config
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            if node is config.get("grids"):
                node[part] = {}
            else:
                raise SpecError(f"unknown config section in {key!r}")
        node = node[part]
    if parts[-1] not in node and not (len(parts) > 1 and parts[0] == "grids"):
        raise SpecError(f"unknown config key {key!r}")
    node[parts[-1]] = parse_value(text.strip())
    return config


def load_config(path=None, overrides=(), seed=None) -> dict:
    """Defaults, then the file at ``path``, then overrides, then ``seed``."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                loaded = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise SpecError(f"{path}: {exc}") from None
        _merge(config, loaded)
    for item in overrides:
        apply_override(config, item)
    if seed is not None:
        config["seed"] = int(seed)
    validate_config(config)
    return config


def validate_config(config: dict) -> None:
    from .features.matrix import FEATURE_SETS
    from .models import MODEL_KINDS

    if config["data"]["source"] not in ("synth", "files"):
        raise SpecError("data.source must be 'synth' or 'files'")
    for fs in config["features"]["sets"]:
        if fs not in FEATURE_SETS:
            raise SpecError(f"unknown feature set {fs!r}")
    for fam in config["models"]["families"]:
        if fam not in MODEL_KINDS:
            raise SpecError(f"unknown model family {fam!r}")
        if fam not in config["grids"]:
            raise SpecError(f"no grid given for model family {fam!r}")
    if config["features"]["rocket_mode"] not in ("multivariate", "per_channel"):
        raise SpecError("features.rocket_mode must be 'multivariate' or 'per_channel'")
    if int(config["features"]["welch_segment"]) < 2:
        raise SpecError("features.welch_segment must be at least 2")
    if int(config["tuning"]["iterations"]) < 1:
        raise SpecError("tuning.iterations must be at least 1")
    if config["data"]["source"] == "files":
        for key in ("accel_dir", "annotations_dir"):
            if not Path(config["data"][key]).is_dir():
                raise SpecError(f"data.{key} {config['data'][key]!r} is not a directory")


def dumps_config(config: dict) -> str:
    return tomli_w.dumps(config)


def result_config(config: dict) -> dict:
    """The part of the config that can influence results."""
    return {k: copy.deepcopy(v) for k, v in config.items() if k not in RESULT_NEUTRAL}
