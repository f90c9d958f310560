"""JSON experiment configuration: schema validation, overrides, snapshots.

A config is one JSON document with top-level keys {dataset, scenarios, sizes,
repeats, methods, seed, cv_folds, output}; unknown keys are rejected so typos
fail fast. ``--set key=value`` overrides accept the same keys (``n_repeats``
is an accepted alias for ``repeats``).
"""

from __future__ import annotations

import json
from pathlib import Path

from .augment import AugmentationParams
from .harness import DEFAULT_TRAIN_SIZES, ExperimentConfig
from .ksvm import KernelParams
from .lasso import LassoParams
from .pipeline import METHOD_NAMES, MethodConfig
from .stability import StabilityParams


class ConfigError(ValueError):
    """Invalid or unusable experiment configuration."""


_TOP_KEYS = {"dataset", "scenarios", "sizes", "repeats", "methods", "seed",
             "cv_folds", "output"}
_ALIASES = {"n_repeats": "repeats", "train_sizes": "sizes", "master_seed": "seed"}

_METHOD_KEYS = {
    "method", "lasso_c", "lasso_max_iters", "lasso_tolerance",
    "n_runs", "occurrence_threshold", "n_synthetic_per_class", "noise_fraction",
    "degree", "gamma", "coef0", "box_c", "baseline_c",
}


def _method_from_entry(entry) -> MethodConfig:
    if isinstance(entry, str):
        entry = {"method": entry}
    if not isinstance(entry, dict):
        raise ConfigError(f"method entry must be a name or object, got {type(entry).__name__}")
    unknown = set(entry) - _METHOD_KEYS
    if unknown:
        raise ConfigError(f"unknown method keys {sorted(unknown)}")
    name = entry.get("method")
    if name not in METHOD_NAMES:
        raise ConfigError(f"unknown method {name!r}; expected one of {METHOD_NAMES}")
    try:
        lasso = LassoParams(
            inverse_reg_c=float(entry.get("lasso_c", 0.01)),
            max_iters=int(entry.get("lasso_max_iters", 3000)),
            tolerance=float(entry.get("lasso_tolerance", 1e-6)),
        )
        stab = StabilityParams(
            n_runs=int(entry.get("n_runs", 20)),
            occurrence_threshold=float(entry.get("occurrence_threshold", 0.5)),
            augment=(name == "l1ksvm_aug"),
            aug_params=AugmentationParams(
                n_synthetic_per_class=int(entry.get("n_synthetic_per_class", 200)),
                noise_fraction=float(entry.get("noise_fraction", 0.10)),
            ),
        )
        gamma = entry.get("gamma")
        kernel = KernelParams(
            degree=int(entry.get("degree", 3)),
            gamma=float(gamma) if gamma is not None else None,
            coef0=float(entry.get("coef0", 1.0)),
        )
        return MethodConfig(
            method=name,
            lasso_params=lasso,
            stab_params=stab,
            kernel=kernel,
            box_c=float(entry.get("box_c", 1.0)),
            baseline_c=float(entry.get("baseline_c", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad method entry for {name!r}: {exc}") from exc


def _parse_scenarios(raw) -> tuple[tuple[str, str], ...] | None:
    if raw is None:
        return None
    scenarios = []
    for pair in raw:
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise ConfigError(f"scenario entries must be [class_a, class_b], got {pair!r}")
        scenarios.append((str(pair[0]), str(pair[1])))
    return tuple(scenarios)


def config_from_dict(doc: dict) -> ExperimentConfig:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if "dataset" not in doc:
        raise ConfigError("config requires a 'dataset' path")
    methods_raw = doc.get("methods", list(METHOD_NAMES))
    try:
        return ExperimentConfig(
            dataset=str(doc["dataset"]),
            scenarios=_parse_scenarios(doc.get("scenarios")),
            train_sizes_per_class=tuple(int(s) for s in doc.get("sizes", DEFAULT_TRAIN_SIZES)),
            n_repeats=int(doc.get("repeats", 10)),
            methods=tuple(_method_from_entry(e) for e in methods_raw),
            master_seed=int(doc.get("seed", 7)),
            cv_folds=int(doc.get("cv_folds", 5)),
            output=str(doc.get("output", "runs")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply key=value pairs; values parse as JSON, falling back to strings."""
    doc = dict(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        key = _ALIASES.get(key.strip(), key.strip())
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown override key {key!r}")
        try:
            doc[key] = json.loads(value)
        except json.JSONDecodeError:
            doc[key] = value
    return doc


def load_config(path: str | Path, overrides: list[str] | None = None) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    if overrides:
        doc = apply_overrides(doc, overrides)
    return config_from_dict(doc)


def snapshot_dict(cfg: ExperimentConfig) -> dict:
    """Fully resolved config (defaults materialized) for the run directory."""
    return {
        "dataset": cfg.dataset,
        "scenarios": [list(p) for p in cfg.scenarios] if cfg.scenarios is not None else None,
        "sizes": list(cfg.train_sizes_per_class),
        "repeats": cfg.n_repeats,
        "methods": [m.to_json() for m in cfg.methods],
        "seed": cfg.master_seed,
        "cv_folds": cfg.cv_folds,
        "output": cfg.output,
        "records_format": 1,
    }


def write_snapshot(cfg: ExperimentConfig, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(snapshot_dict(cfg), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
