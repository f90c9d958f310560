import numpy as np
import pytest

from l1ksvm.augment import AugmentationParams
from l1ksvm.dataio import DataError
from l1ksvm.ksvm import KsvmModel
from l1ksvm.lasso import LassoModel, LassoParams, fit_lasso, lasso_from_json, lasso_to_json, nonzero_features
from l1ksvm.pipeline import (
    ConfusionCounts,
    MethodConfig,
    PipelineError,
    TrainedPipeline,
    evaluate_pipeline,
    train_pipeline,
)
from l1ksvm.stability import StabilityParams

from conftest import make_matrix, separable_matrix

# small-data method configs: a milder penalty so selection works at toy scale
_LASSO = LassoParams(inverse_reg_c=0.5)
_STAB = StabilityParams(n_runs=6, aug_params=AugmentationParams(n_synthetic_per_class=25))


def _cfg(method: str) -> MethodConfig:
    return MethodConfig(method=method, lasso_params=_LASSO, stab_params=_STAB)


@pytest.fixture(scope="module")
def train():
    return separable_matrix(n_per_class=20, p=8, gap=1.8, seed=50)


@pytest.fixture(scope="module")
def test_set():
    return separable_matrix(n_per_class=15, p=8, gap=1.8, seed=51)


class TestTrain:
    def test_baseline_selected_equals_nonzeros(self, train):
        tp = train_pipeline(train, _cfg("baseline_lasso"), seed=1)
        direct = fit_lasso(train, LassoParams(inverse_reg_c=1.0))
        expected = [train.feature_names[j] for j in nonzero_features(direct)]
        assert list(tp.selected_features) == expected
        assert isinstance(tp.classifier, LassoModel)

    def test_noaug_matches_single_lasso_run(self, train):
        tp = train_pipeline(train, _cfg("l1ksvm_noaug"), seed=2)
        direct = fit_lasso(train, _LASSO)
        expected = [train.feature_names[j] for j in nonzero_features(direct)]
        assert list(tp.selected_features) == expected
        assert isinstance(tp.classifier, KsvmModel)
        subset_names = [train.feature_names[j] for j in tp.classifier.feature_subset]
        assert subset_names == list(tp.selected_features)

    def test_aug_trains_svm_on_retained_subset(self, train):
        tp = train_pipeline(train, _cfg("l1ksvm_aug"), seed=3)
        assert isinstance(tp.classifier, KsvmModel)
        assert len(tp.selected_features) > 0
        assert tp.classifier.n_features_original == train.n_features

    def test_determinism(self, train, test_set):
        a = train_pipeline(train, _cfg("l1ksvm_aug"), seed=9)
        b = train_pipeline(train, _cfg("l1ksvm_aug"), seed=9)
        assert a.selected_features == b.selected_features
        assert a.predict(test_set) == b.predict(test_set)

    def test_empty_selection_raises_pipeline_error(self, train):
        starved = MethodConfig(
            method="l1ksvm_noaug",
            lasso_params=LassoParams(inverse_reg_c=1e-9),
            stab_params=_STAB,
        )
        with pytest.raises(PipelineError, match="no features selected"):
            train_pipeline(train, starved, seed=4)

    def test_selected_features_subset_of_columns(self, train):
        for method in ("baseline_lasso", "l1ksvm_aug", "l1ksvm_noaug"):
            tp = train_pipeline(train, _cfg(method), seed=11)
            assert set(tp.selected_features) <= set(train.feature_names)
            assert len(tp.selected_features) == len(set(tp.selected_features))

    def test_multiclass_rejected(self):
        m = make_matrix(np.random.default_rng(0).normal(size=(9, 3)), ["a", "b", "c"] * 3)
        with pytest.raises(DataError, match="binary"):
            train_pipeline(m, _cfg("baseline_lasso"), seed=0)


class TestEvaluate:
    def _constant_positive(self, train) -> TrainedPipeline:
        model = fit_lasso(train, LassoParams(inverse_reg_c=1e-9))
        doc = lasso_to_json(model)
        doc["intercept"] = 0.7
        return TrainedPipeline(
            method="baseline_lasso",
            selected_features=("g0",),
            classifier=lasso_from_json(doc),
            classes=model.classes,
            provenance={},
        )

    def test_constant_classifier_arithmetic(self, train):
        test = separable_matrix(n_per_class=50, p=8, gap=1.8, seed=77)
        counts = evaluate_pipeline(self._constant_positive(train), test)
        assert (counts.tp, counts.fp, counts.tn, counts.fn) == (50, 50, 0, 0)
        assert counts.accuracy == 0.5

    def test_perfect_classifier(self):
        wide_train = separable_matrix(n_per_class=20, p=8, gap=8.0, seed=60)
        wide_test = separable_matrix(n_per_class=15, p=8, gap=8.0, seed=61)
        tp = train_pipeline(wide_train, _cfg("baseline_lasso"), seed=5)
        counts = evaluate_pipeline(tp, wide_test)
        assert counts.fp == 0 and counts.fn == 0
        assert counts.accuracy == 1.0

    def test_partition_identity(self, train, test_set):
        for method in ("baseline_lasso", "l1ksvm_aug"):
            tp = train_pipeline(train, _cfg(method), seed=6)
            counts = evaluate_pipeline(tp, test_set)
            assert counts.tp + counts.tn + counts.fp + counts.fn == test_set.n_samples

    def test_idempotent(self, train, test_set):
        tp = train_pipeline(train, _cfg("l1ksvm_noaug"), seed=7)
        assert evaluate_pipeline(tp, test_set) == evaluate_pipeline(tp, test_set)

    def test_unknown_test_label(self, train):
        tp = train_pipeline(train, _cfg("baseline_lasso"), seed=8)
        alien = make_matrix(np.zeros((2, 8)), ["zz", "a"])
        with pytest.raises(DataError, match="unseen"):
            evaluate_pipeline(tp, alien)

    def test_positive_class_is_second_listed(self):
        wide_train = separable_matrix(n_per_class=20, p=8, gap=8.0, seed=62)
        wide_test = separable_matrix(n_per_class=15, p=8, gap=8.0, seed=63)
        tp = train_pipeline(wide_train, _cfg("baseline_lasso"), seed=9, classes=("b", "a"))
        counts = evaluate_pipeline(tp, wide_test)
        # positive class is "a"; the perfect classifier marks the 15 "a"
        # test rows as true positives
        assert counts.tp == 15 and counts.tn == 15


def test_confusion_counts_from_predictions():
    counts = ConfusionCounts.from_predictions(
        ["p", "p", "n", "n"], ["p", "n", "p", "n"], positive="p"
    )
    assert (counts.tp, counts.fn, counts.fp, counts.tn) == (1, 1, 1, 1)
    assert counts.n_test == 4


def test_pipeline_serialization(train):
    tp = train_pipeline(train, _cfg("l1ksvm_aug"), seed=10)
    doc = tp.to_json()
    assert doc["classifier"]["format"] == "l1ksvm.ksvm_model"
    assert doc["selected_features"] == list(tp.selected_features)
    assert doc["provenance"]["seed"] == 10


def test_method_config_validation():
    with pytest.raises(ValueError, match="unknown method"):
        MethodConfig(method="nope")
    with pytest.raises(ValueError):
        MethodConfig(box_c=0.0)
