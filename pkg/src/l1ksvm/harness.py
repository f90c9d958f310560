"""Bootstrap and cross-validation sweeps over scenarios, sizes and methods.

One iteration = (scenario, training size, repeat). Its seed derives from the
master seed and those coordinates, every method inside the iteration shares
the same train/test split, and failures become tagged records instead of
crashes, so a sweep always runs to completion. Iterations are independent
and can execute on a joblib worker pool; emitted records are ordered by the
iteration plan, not by completion time.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from joblib import Parallel, delayed

from .dataio import DataError, ExpressionMatrix, load_expression_table
from .pipeline import (
    ConfusionCounts,
    MethodConfig,
    PipelineError,
    evaluate_pipeline,
    train_pipeline,
)
from .seeds import make_rng, mix_seed

log = logging.getLogger(__name__)

RECORDS_COLUMNS = (
    "scenario",
    "method",
    "size",
    "repeat",
    "seed",
    "tp",
    "tn",
    "fp",
    "fn",
    "n_test",
    "accuracy",
    "n_features",
    "flags",
)

SUMMARY_COLUMNS = (
    "scenario",
    "method",
    "size",
    "n_records",
    "n_ok",
    "n_failed",
    "n_degenerate",
    "mean_accuracy",
    "std_accuracy",
    "tp_pct",
    "tn_pct",
    "fp_pct",
    "fn_pct",
    "mean_n_features",
)

POOLED_SCENARIO = "(pooled)"

DEFAULT_TRAIN_SIZES = (10, 25, 100, 150, 250, 300, 350)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    scenarios: tuple[tuple[str, str], ...] | None = None  # None: all label pairs
    train_sizes_per_class: tuple[int, ...] = DEFAULT_TRAIN_SIZES
    n_repeats: int = 10
    methods: tuple[MethodConfig, ...] = ()
    master_seed: int = 7
    cv_folds: int = 5
    output: str = "runs"

    def __post_init__(self) -> None:
        if self.n_repeats < 1:
            raise ValueError("n_repeats must be >= 1")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")
        if not self.train_sizes_per_class:
            raise ValueError("train_sizes_per_class must be non-empty")
        if any(s < 1 for s in self.train_sizes_per_class):
            raise ValueError("train sizes must be >= 1")
        if not self.methods:
            object.__setattr__(
                self, "methods", tuple(MethodConfig(method=m) for m in
                                       ("l1ksvm_aug", "l1ksvm_noaug", "baseline_lasso"))
            )


@dataclass(frozen=True)
class RunRecord:
    scenario: str
    method: str
    train_size: int
    repeat_index: int
    seed: int
    confusion: ConfusionCounts | None
    n_selected_features: float | None
    flags: tuple[str, ...] = ()
    wall_time: float = 0.0
    split_digest: str = ""

    @property
    def accuracy(self) -> float | None:
        return self.confusion.accuracy if self.confusion is not None else None

    @property
    def failed(self) -> bool:
        return any(f.startswith("failed") or f.startswith("error") for f in self.flags)

    @property
    def degenerate(self) -> bool:
        return any(f.startswith("degenerate") for f in self.flags)


def scenario_name(pair: tuple[str, str]) -> str:
    return f"{pair[0]}_vs_{pair[1]}"


def resolve_scenarios(
    cfg: ExperimentConfig, pool: ExpressionMatrix
) -> tuple[tuple[str, str], ...]:
    if cfg.scenarios is not None:
        present = set(pool.labels)
        for a, b in cfg.scenarios:
            if a not in present or b not in present:
                raise DataError(f"scenario ({a}, {b}) names a class missing from the dataset")
            if a == b:
                raise DataError(f"degenerate scenario ({a}, {b})")
        return tuple((a, b) for a, b in cfg.scenarios)
    return tuple(itertools.combinations(pool.classes(), 2))


def iteration_plan(
    cfg: ExperimentConfig, scenarios: Sequence[tuple[str, str]]
) -> list[tuple[tuple[str, str], int, int]]:
    """Deterministic (scenario, size, repeat) order for a sweep."""
    return [
        (pair, size, rep)
        for pair in scenarios
        for size in cfg.train_sizes_per_class
        for rep in range(cfg.n_repeats)
    ]


def iteration_seed(master_seed: int, kind: str, pair: tuple[str, str], size: int, rep: int) -> int:
    return mix_seed(master_seed, kind, pair[0], pair[1], size, rep)


def _load_pool(cfg: ExperimentConfig) -> ExpressionMatrix:
    pool = load_expression_table(cfg.dataset)
    if not pool.is_finite():
        raise DataError(
            f"dataset {cfg.dataset} contains invalid values; run `prepare` first"
        )
    return pool


def _validate_sizes(cfg: ExperimentConfig, pool: ExpressionMatrix,
                    scenarios: Sequence[tuple[str, str]]) -> None:
    counts = pool.class_counts()
    involved = {lab for pair in scenarios for lab in pair}
    for lab in sorted(involved):
        limit = counts[lab]
        for size in cfg.train_sizes_per_class:
            if size >= limit:
                raise DataError(
                    f"train size {size} is not below the pool size {limit} of class {lab!r}"
                )


def _split_digest(train_ids: Sequence[str], test_ids: Sequence[str]) -> str:
    h = hashlib.blake2b(digest_size=8)
    h.update("|".join(train_ids).encode())
    h.update(b"::")
    h.update("|".join(test_ids).encode())
    return h.hexdigest()


def _failed_record(
    pair, size, rep, seed, method, exc, elapsed, digest
) -> RunRecord:
    if isinstance(exc, PipelineError):
        flag = "failed:no_features_selected"
        n_sel: float | None = float(exc.n_selected) if exc.n_selected is not None else None
    else:
        flag = f"error:{type(exc).__name__}"
        n_sel = None
        log.warning("iteration %s size=%d rep=%d method=%s failed: %s",
                    scenario_name(pair), size, rep, method, exc)
    return RunRecord(
        scenario=scenario_name(pair),
        method=method,
        train_size=size,
        repeat_index=rep,
        seed=seed,
        confusion=None,
        n_selected_features=n_sel,
        flags=(flag,),
        wall_time=elapsed,
        split_digest=digest,
    )


def _bootstrap_iteration(
    pool: ExpressionMatrix,
    pair: tuple[str, str],
    size: int,
    rep: int,
    methods: Sequence[MethodConfig],
    master_seed: int,
) -> list[RunRecord]:
    from .dataio import make_scenario, split_train_test

    seed = iteration_seed(master_seed, "bootstrap", pair, size, rep)
    scenario = make_scenario(pool, pair[0], pair[1])
    split = split_train_test(scenario, size, seed, classes=pair)
    digest = _split_digest(split.train.sample_ids, split.test.sample_ids)
    records: list[RunRecord] = []
    for mcfg in methods:
        started = time.perf_counter()
        method_seed = mix_seed(seed, mcfg.method)
        try:
            trained = train_pipeline(split.train, mcfg, method_seed, classes=pair)
            confusion = evaluate_pipeline(trained, split.test)
            records.append(
                RunRecord(
                    scenario=scenario_name(pair),
                    method=mcfg.method,
                    train_size=size,
                    repeat_index=rep,
                    seed=seed,
                    confusion=confusion,
                    n_selected_features=float(len(trained.selected_features)),
                    flags=trained.flags,
                    wall_time=time.perf_counter() - started,
                    split_digest=digest,
                )
            )
        except Exception as exc:  # failures are data, not crashes
            records.append(
                _failed_record(pair, size, rep, seed, mcfg.method, exc,
                               time.perf_counter() - started, digest)
            )
    return records


def _stratified_folds(
    m: ExpressionMatrix, k: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """k validation index sets, stratified by class, sizes within 1 per class."""
    folds: list[list[int]] = [[] for _ in range(k)]
    for label in m.classes():
        idx = m.class_indices(label)
        perm = rng.permutation(idx)
        for pos, sample in enumerate(perm):
            folds[pos % k].append(int(sample))
    return [np.array(sorted(f), dtype=int) for f in folds]


def _cv_iteration(
    pool: ExpressionMatrix,
    pair: tuple[str, str],
    size: int,
    rep: int,
    methods: Sequence[MethodConfig],
    master_seed: int,
    cv_folds: int,
) -> list[RunRecord]:
    from .dataio import make_scenario, split_train_test

    seed = iteration_seed(master_seed, "cv", pair, size, rep)
    scenario = make_scenario(pool, pair[0], pair[1])
    split = split_train_test(scenario, size, seed, classes=pair)
    train = split.train
    digest = _split_digest(train.sample_ids, ())
    folds = _stratified_folds(train, cv_folds, make_rng(mix_seed(seed, "folds")))

    # a fold is degenerate when validation or the remaining training part
    # does not keep both classes trainable
    degenerate = False
    all_idx = np.arange(train.n_samples)
    for fold in folds:
        val_labels = {train.labels[i] for i in fold}
        rest = np.setdiff1d(all_idx, fold)
        rest_counts: dict[str, int] = {}
        for i in rest:
            rest_counts[train.labels[i]] = rest_counts.get(train.labels[i], 0) + 1
        if len(val_labels) < 2 or len(rest_counts) < 2 or min(rest_counts.values()) < 2:
            degenerate = True
            break

    records: list[RunRecord] = []
    for mcfg in methods:
        started = time.perf_counter()
        if degenerate:
            records.append(
                RunRecord(
                    scenario=scenario_name(pair),
                    method=mcfg.method,
                    train_size=size,
                    repeat_index=rep,
                    seed=seed,
                    confusion=None,
                    n_selected_features=None,
                    flags=("degenerate:fold_missing_class",),
                    wall_time=time.perf_counter() - started,
                    split_digest=digest,
                )
            )
            continue
        try:
            tp = tn = fp = fn = 0
            n_selected: list[int] = []
            flags: set[str] = set()
            for fold_no, fold in enumerate(folds):
                rest = np.setdiff1d(all_idx, fold)
                trained = train_pipeline(
                    train.select_samples(rest),
                    mcfg,
                    mix_seed(seed, mcfg.method, "fold", fold_no),
                    classes=pair,
                )
                confusion = evaluate_pipeline(trained, train.select_samples(fold))
                tp += confusion.tp
                tn += confusion.tn
                fp += confusion.fp
                fn += confusion.fn
                n_selected.append(len(trained.selected_features))
                flags.update(trained.flags)
            records.append(
                RunRecord(
                    scenario=scenario_name(pair),
                    method=mcfg.method,
                    train_size=size,
                    repeat_index=rep,
                    seed=seed,
                    confusion=ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn),
                    n_selected_features=float(np.mean(n_selected)),
                    flags=tuple(sorted(flags)),
                    wall_time=time.perf_counter() - started,
                    split_digest=digest,
                )
            )
        except Exception as exc:
            records.append(
                _failed_record(pair, size, rep, seed, mcfg.method, exc,
                               time.perf_counter() - started, digest)
            )
    return records


def _run_sweep(
    cfg: ExperimentConfig,
    pool: ExpressionMatrix | None,
    n_workers: int,
    iteration,
    extra_args: tuple = (),
) -> list[RunRecord]:
    if pool is None:
        pool = _load_pool(cfg)
    scenarios = resolve_scenarios(cfg, pool)
    _validate_sizes(cfg, pool, scenarios)
    plan = iteration_plan(cfg, scenarios)
    if n_workers > 1:
        batches = Parallel(n_jobs=n_workers)(
            delayed(iteration)(pool, pair, size, rep, cfg.methods, cfg.master_seed, *extra_args)
            for pair, size, rep in plan
        )
    else:
        batches = [
            iteration(pool, pair, size, rep, cfg.methods, cfg.master_seed, *extra_args)
            for pair, size, rep in plan
        ]
    return [record for batch in batches for record in batch]


def run_bootstrap_experiment(
    cfg: ExperimentConfig, pool: ExpressionMatrix | None = None, n_workers: int = 1
) -> list[RunRecord]:
    """Train/test sweep: one shared split per iteration, one record per method."""
    return _run_sweep(cfg, pool, n_workers, _bootstrap_iteration)


def run_cross_validation(
    cfg: ExperimentConfig, pool: ExpressionMatrix | None = None, n_workers: int = 1
) -> list[RunRecord]:
    """Stratified k-fold CV inside freshly drawn training sets; no test samples."""
    return _run_sweep(cfg, pool, n_workers, _cv_iteration, extra_args=(cfg.cv_folds,))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_records_csv(records: Iterable[RunRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORDS_COLUMNS)
        for r in records:
            conf = r.confusion
            writer.writerow(
                [
                    r.scenario,
                    r.method,
                    r.train_size,
                    r.repeat_index,
                    r.seed,
                    conf.tp if conf else "",
                    conf.tn if conf else "",
                    conf.fp if conf else "",
                    conf.fn if conf else "",
                    conf.n_test if conf else "",
                    _fmt(conf.accuracy) if conf else "",
                    _fmt(r.n_selected_features),
                    ";".join(r.flags),
                ]
            )


def read_records_csv(path: str | Path) -> list[RunRecord]:
    records: list[RunRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(RECORDS_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing record columns {sorted(missing)}")
        for row in reader:
            confusion = None
            if row["n_test"]:
                confusion = ConfusionCounts(
                    tp=int(row["tp"]), tn=int(row["tn"]),
                    fp=int(row["fp"]), fn=int(row["fn"]),
                )
            records.append(
                RunRecord(
                    scenario=row["scenario"],
                    method=row["method"],
                    train_size=int(row["size"]),
                    repeat_index=int(row["repeat"]),
                    seed=int(row["seed"]),
                    confusion=confusion,
                    n_selected_features=float(row["n_features"]) if row["n_features"] else None,
                    flags=tuple(f for f in row["flags"].split(";") if f),
                )
            )
    return records


def _summarize_group(rows: list[RunRecord]) -> dict:
    # fixed reduction order makes aggregation invariant to record ordering
    rows = sorted(rows, key=lambda r: (r.scenario, r.train_size, r.repeat_index, r.seed))
    ok = [r for r in rows if r.confusion is not None and not r.degenerate]
    failed = [r for r in rows if r.failed]
    degenerate = [r for r in rows if r.degenerate]
    out: dict = {
        "n_records": len(rows),
        "n_ok": len(ok),
        "n_failed": len(failed),
        "n_degenerate": len(degenerate),
    }
    if ok:
        acc = np.array([r.confusion.accuracy for r in ok])
        out["mean_accuracy"] = float(acc.mean())
        out["std_accuracy"] = float(acc.std(ddof=1)) if acc.size > 1 else 0.0
        for key, attr in (("tp_pct", "tp"), ("tn_pct", "tn"), ("fp_pct", "fp"), ("fn_pct", "fn")):
            pct = np.array(
                [100.0 * getattr(r.confusion, attr) / r.confusion.n_test for r in ok]
            )
            out[key] = float(pct.mean())
    else:
        out.update(
            mean_accuracy=None, std_accuracy=None,
            tp_pct=None, tn_pct=None, fp_pct=None, fn_pct=None,
        )
    with_counts = [r for r in rows if r.n_selected_features is not None and not r.degenerate]
    out["mean_n_features"] = (
        float(np.mean([r.n_selected_features for r in with_counts])) if with_counts else None
    )
    return out


def aggregate_records(records: Sequence[RunRecord]) -> list[dict]:
    """Summary rows per (scenario, method, size) plus pooled rows per (method, size).

    Accuracy statistics cover successful iterations; selection-size means also
    include iterations whose selection completed but retained nothing (count 0).
    Degenerate iterations are excluded from both and only counted.
    """
    if not records:
        raise DataError("no records to aggregate")
    by_group: dict[tuple[str, str, int], list[RunRecord]] = {}
    by_pooled: dict[tuple[str, int], list[RunRecord]] = {}
    for r in records:
        by_group.setdefault((r.scenario, r.method, r.train_size), []).append(r)
        by_pooled.setdefault((r.method, r.train_size), []).append(r)

    rows: list[dict] = []
    for scenario, method, size in sorted(by_group):
        group = by_group[(scenario, method, size)]
        row = {"scenario": scenario, "method": method, "size": size}
        row.update(_summarize_group(group))
        if row["n_ok"] == 0:
            log.warning("group %s/%s/size=%d has no successful iterations",
                        scenario, method, size)
        rows.append(row)
    for method, size in sorted(by_pooled):
        row = {"scenario": POOLED_SCENARIO, "method": method, "size": size}
        row.update(_summarize_group(by_pooled[(method, size)]))
        rows.append(row)
    return rows


def write_summary_csv(rows: Sequence[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[col]) for col in SUMMARY_COLUMNS])


def read_summary_csv(path: str | Path) -> list[dict]:
    rows: list[dict] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(SUMMARY_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"{path}: missing summary columns {sorted(missing)}")
        for raw in reader:
            row: dict = {"scenario": raw["scenario"], "method": raw["method"]}
            for col in ("size", "n_records", "n_ok", "n_failed", "n_degenerate"):
                row[col] = int(raw[col])
            for col in ("mean_accuracy", "std_accuracy", "tp_pct", "tn_pct",
                        "fp_pct", "fn_pct", "mean_n_features"):
                row[col] = float(raw[col]) if raw[col] else None
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty summary")
    return rows


def records_arithmetic_ok(rows: Sequence[dict], tol: float = 1e-9) -> bool:
    """Internal identity: TP%+TN% == Acc% and the four percentages sum to 100."""
    for row in rows:
        if row["mean_accuracy"] is None:
            continue
        total = row["tp_pct"] + row["tn_pct"] + row["fp_pct"] + row["fn_pct"]
        if not math.isclose(total, 100.0, abs_tol=tol):
            return False
        if not math.isclose(
            row["tp_pct"] + row["tn_pct"], 100.0 * row["mean_accuracy"], abs_tol=tol
        ):
            return False
    return True
