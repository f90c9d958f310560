"""The three end-to-end classification methods and their evaluation.

* ``l1ksvm_aug``    stability selection over augmented fits, then a kernel
                    SVM trained on one fresh augmented draw restricted to
                    the retained features.
* ``l1ksvm_noaug``  the same selection and classifier without synthetic data.
* ``baseline_lasso`` one weakly regularized sparse logistic fit; its nonzero
                    coefficients double as the selected features.

Confusion bookkeeping fixes the second scenario class as "positive".
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .augment import generate_synthetic
from .dataio import DataError, ExpressionMatrix, concat_samples
from .ksvm import KernelParams, KsvmModel, fit_ksvm, ksvm_to_json, predict_ksvm
from .lasso import LassoModel, LassoParams, fit_lasso, lasso_to_json, nonzero_features, predict_lasso
from .seeds import mix_seed
from .stability import StabilityParams, run_stability_selection

METHOD_NAMES = ("l1ksvm_aug", "l1ksvm_noaug", "baseline_lasso")


class PipelineError(RuntimeError):
    """Training could not produce a usable classifier (e.g. empty selection)."""

    def __init__(self, message: str, n_selected: int | None = None):
        super().__init__(message)
        self.n_selected = n_selected


@dataclass(frozen=True)
class MethodConfig:
    method: str = "l1ksvm_aug"
    lasso_params: LassoParams = field(default_factory=LassoParams)
    stab_params: StabilityParams = field(default_factory=StabilityParams)
    kernel: KernelParams = field(default_factory=KernelParams)
    box_c: float = 1.0
    baseline_c: float = 1.0

    def __post_init__(self) -> None:
        if self.method not in METHOD_NAMES:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHOD_NAMES}")
        if self.box_c <= 0 or self.baseline_c <= 0:
            raise ValueError("box_c and baseline_c must be > 0")

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "lasso_c": self.lasso_params.inverse_reg_c,
            "lasso_max_iters": self.lasso_params.max_iters,
            "lasso_tolerance": self.lasso_params.tolerance,
            "n_runs": self.stab_params.n_runs,
            "occurrence_threshold": self.stab_params.occurrence_threshold,
            "n_synthetic_per_class": self.stab_params.aug_params.n_synthetic_per_class,
            "noise_fraction": self.stab_params.aug_params.noise_fraction,
            "degree": self.kernel.degree,
            "gamma": self.kernel.gamma,
            "coef0": self.kernel.coef0,
            "box_c": self.box_c,
            "baseline_c": self.baseline_c,
        }


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def n_test(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n_test

    @classmethod
    def from_predictions(
        cls, truth: list[str], predicted: list[str], positive: str
    ) -> "ConfusionCounts":
        tp = tn = fp = fn = 0
        for t, p in zip(truth, predicted):
            if p == positive:
                if t == positive:
                    tp += 1
                else:
                    fp += 1
            else:
                if t == positive:
                    fn += 1
                else:
                    tn += 1
        return cls(tp=tp, tn=tn, fp=fp, fn=fn)


@dataclass(frozen=True)
class TrainedPipeline:
    method: str
    selected_features: tuple[str, ...]
    classifier: LassoModel | KsvmModel
    classes: tuple[str, str]
    provenance: dict
    flags: tuple[str, ...] = ()

    def predict(self, X: ExpressionMatrix) -> list[str]:
        if isinstance(self.classifier, LassoModel):
            return predict_lasso(self.classifier, X)
        return predict_ksvm(self.classifier, X)

    def to_json(self) -> dict:
        if isinstance(self.classifier, LassoModel):
            classifier = lasso_to_json(self.classifier)
        else:
            classifier = ksvm_to_json(self.classifier, list(self.selected_features))
        return {
            "format": "l1ksvm.pipeline",
            "version": 1,
            "method": self.method,
            "selected_features": list(self.selected_features),
            "classes": list(self.classes),
            "provenance": self.provenance,
            "flags": list(self.flags),
            "classifier": classifier,
        }


def train_pipeline(
    train: ExpressionMatrix,
    cfg: MethodConfig,
    seed: int,
    classes: tuple[str, str] | None = None,
) -> TrainedPipeline:
    """Run feature selection and classifier training for one method.

    Deterministic given (train, cfg, seed). Raises PipelineError when the
    retained feature set is empty; harness callers record that as a failed
    iteration rather than crashing the sweep.
    """
    present = train.classes()
    if len(present) != 2:
        raise DataError(f"training set must be binary, got classes {present}")
    if classes is None:
        classes = (present[0], present[1])
    counts = train.class_counts()
    if min(counts.values()) < 2:
        raise DataError("need at least 2 samples per class to train")

    flags: list[str] = []
    if cfg.method == "baseline_lasso":
        params = replace(cfg.lasso_params, inverse_reg_c=cfg.baseline_c)
        model = fit_lasso(train, params, classes)
        if not model.converged:
            flags.append("lasso_not_converged")
        selected = nonzero_features(model)
        if selected.size == 0:
            raise PipelineError("no features selected", n_selected=0)
        names = tuple(train.feature_names[j] for j in selected)
        classifier: LassoModel | KsvmModel = model
    else:
        augment = cfg.method == "l1ksvm_aug"
        stab = replace(cfg.stab_params, augment=augment)
        selection = run_stability_selection(
            train, cfg.lasso_params, stab, mix_seed(seed, "stability"), classes
        )
        retained = selection.retained
        if retained.size == 0:
            raise PipelineError("no features selected", n_selected=0)
        names = tuple(train.feature_names[j] for j in retained)
        if augment:
            synthetic = generate_synthetic(
                train, cfg.stab_params.aug_params, mix_seed(seed, "final-augment")
            )
            classifier_input = concat_samples(train, synthetic) if synthetic.n_samples else train
        else:
            classifier_input = train
        svm = fit_ksvm(
            classifier_input.select_features(retained),
            cfg.kernel,
            box_c=cfg.box_c,
            classes=classes,
            feature_subset=retained,
            n_features_original=train.n_features,
        )
        if not svm.converged:
            flags.append("ksvm_not_converged")
        classifier = svm

    return TrainedPipeline(
        method=cfg.method,
        selected_features=names,
        classifier=classifier,
        classes=classes,
        provenance={"seed": seed, "config_digest": cfg.digest()},
        flags=tuple(flags),
    )


def evaluate_pipeline(p: TrainedPipeline, test: ExpressionMatrix) -> ConfusionCounts:
    """Predict every test sample and tally the confusion counts.

    The positive class is p.classes[1] (the second-listed scenario class).
    Never mutates the pipeline; repeated evaluation returns identical counts.
    """
    if test.n_samples == 0:
        raise DataError("test set is empty")
    unknown = set(test.labels) - set(p.classes)
    if unknown:
        raise DataError(f"test labels {sorted(unknown)} unseen during training")
    predicted = p.predict(test)
    return ConfusionCounts.from_predictions(list(test.labels), predicted, positive=p.classes[1])
