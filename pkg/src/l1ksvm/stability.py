"""Occurrence-thresholded feature selection over repeated sparse fits.

Each run fits the L1 logistic model on the training set, optionally enlarged
with a fresh synthetic draw; a feature is retained when it carries a nonzero
weight in strictly more than ``occurrence_threshold`` of the runs. The real
training rows are identical in every run; only the synthetic portion is
redrawn, so without augmentation all runs collapse onto one deterministic fit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .augment import AugmentationParams, generate_synthetic
from .dataio import DataError, ExpressionMatrix, concat_samples
from .lasso import LassoParams, fit_lasso, nonzero_features
from .seeds import mix_seed


@dataclass(frozen=True)
class StabilityParams:
    n_runs: int = 20
    occurrence_threshold: float = 0.5
    augment: bool = True
    aug_params: AugmentationParams = field(default_factory=AugmentationParams)

    def __post_init__(self) -> None:
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if not (0.0 < self.occurrence_threshold < 1.0):
            raise ValueError("occurrence_threshold must be in (0, 1)")


@dataclass(frozen=True)
class StabilitySelection:
    counts: np.ndarray
    retained: np.ndarray
    n_runs: int
    occurrence_threshold: float
    feature_names: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "format": "l1ksvm.stability_selection",
            "version": 1,
            "n_runs": self.n_runs,
            "occurrence_threshold": self.occurrence_threshold,
            "counts": {name: int(c) for name, c in zip(self.feature_names, self.counts)},
            "retained": [self.feature_names[j] for j in self.retained],
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def retained_indices(counts: np.ndarray, n_runs: int, occurrence_threshold: float) -> np.ndarray:
    """Strict majority rule: keep j with counts[j] > threshold * n_runs."""
    counts = np.asarray(counts)
    return np.flatnonzero(counts > occurrence_threshold * n_runs)


def run_stability_selection(
    train: ExpressionMatrix,
    lasso_params: LassoParams,
    stab_params: StabilityParams,
    seed: int,
    classes: tuple[str, str] | None = None,
) -> StabilitySelection:
    """Aggregate nonzero-weight occurrences over n_runs fits.

    Per-run seeds derive from (seed, run index), so runs are reproducible
    and order-independent. Fit errors propagate annotated with the run index.
    """
    present = train.classes()
    if len(present) != 2:
        raise DataError(f"stability selection needs a binary training set, got {present}")
    counts = np.zeros(train.n_features, dtype=int)
    if stab_params.augment:
        for r in range(stab_params.n_runs):
            run_seed = mix_seed(seed, "stability-run", r)
            synthetic = generate_synthetic(train, stab_params.aug_params, run_seed)
            data = concat_samples(train, synthetic) if synthetic.n_samples else train
            try:
                model = fit_lasso(data, lasso_params, classes)
            except Exception as exc:
                raise RuntimeError(f"stability run {r} failed: {exc}") from exc
            counts[nonzero_features(model)] += 1
    else:
        # identical data + deterministic solver: one fit stands for all runs
        model = fit_lasso(train, lasso_params, classes)
        counts[nonzero_features(model)] += stab_params.n_runs
    retained = retained_indices(counts, stab_params.n_runs, stab_params.occurrence_threshold)
    return StabilitySelection(
        counts=counts,
        retained=retained,
        n_runs=stab_params.n_runs,
        occurrence_threshold=stab_params.occurrence_threshold,
        feature_names=train.feature_names,
    )
