"""Sparse stability-selected feature screening with a polynomial-kernel SVM,
plus the bootstrap/cross-validation harness that compares the augmented and
non-augmented variants against a plain sparse-logistic baseline."""

from .augment import AugmentationParams, class_feature_std, generate_synthetic
from .dataio import (
    DataError,
    ExpressionMatrix,
    ScenarioSplit,
    balance_classes,
    concat_samples,
    filter_features,
    load_expression_table,
    make_scenario,
    split_train_test,
    write_expression_table,
)
from .harness import (
    ExperimentConfig,
    RunRecord,
    aggregate_records,
    run_bootstrap_experiment,
    run_cross_validation,
)
from .ksvm import (
    KernelParams,
    KsvmModel,
    decision_function,
    fit_ksvm,
    gram_matrix,
    kernel_eval,
    predict_ksvm,
)
from .lasso import (
    LassoModel,
    LassoParams,
    OptimalityCertificate,
    check_optimality,
    fit_lasso,
    nonzero_features,
    predict_lasso,
)
from .pipeline import (
    ConfusionCounts,
    MethodConfig,
    PipelineError,
    TrainedPipeline,
    evaluate_pipeline,
    train_pipeline,
)
from .stability import StabilityParams, StabilitySelection, run_stability_selection
from .synthbench import BenchmarkSpec, benchmark_truth, generate_benchmark

__version__ = "0.1.0"

__all__ = [
    "AugmentationParams",
    "BenchmarkSpec",
    "ConfusionCounts",
    "DataError",
    "ExperimentConfig",
    "ExpressionMatrix",
    "KernelParams",
    "KsvmModel",
    "LassoModel",
    "LassoParams",
    "MethodConfig",
    "OptimalityCertificate",
    "PipelineError",
    "RunRecord",
    "ScenarioSplit",
    "StabilityParams",
    "StabilitySelection",
    "TrainedPipeline",
    "aggregate_records",
    "balance_classes",
    "benchmark_truth",
    "check_optimality",
    "class_feature_std",
    "concat_samples",
    "decision_function",
    "evaluate_pipeline",
    "filter_features",
    "fit_ksvm",
    "fit_lasso",
    "generate_benchmark",
    "generate_synthetic",
    "gram_matrix",
    "kernel_eval",
    "load_expression_table",
    "make_scenario",
    "nonzero_features",
    "predict_ksvm",
    "predict_lasso",
    "run_bootstrap_experiment",
    "run_cross_validation",
    "run_stability_selection",
    "split_train_test",
    "train_pipeline",
    "write_expression_table",
]
