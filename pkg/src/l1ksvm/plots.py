"""Static SVG charts rendered from a sweep summary.

One accuracy-vs-size chart per scenario (one line per method, shaded +-1 std
band) plus one selected-feature-count chart built from the pooled rows.
"""

from __future__ import annotations

import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .dataio import DataError  # noqa: E402
from .harness import POOLED_SCENARIO  # noqa: E402

_METHOD_STYLE = {
    "l1ksvm_aug": dict(color="tab:blue", marker="o", linestyle="-"),
    "l1ksvm_noaug": dict(color="tab:red", marker="s", linestyle="-"),
    "baseline_lasso": dict(color="tab:green", marker="^", linestyle="--"),
}
_FALLBACK_STYLES = [dict(color=f"C{i}", marker="D", linestyle="-") for i in range(10)]

_SAVE_OPTS = dict(format="svg", metadata={"Date": None})  # reproducible output


def _style_for(method: str, index: int) -> dict:
    return _METHOD_STYLE.get(method, _FALLBACK_STYLES[index % len(_FALLBACK_STYLES)])


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text)


def _series(rows: list[dict], value_key: str):
    """(sizes, values, stds) for rows of one (scenario, method), defined points only."""
    pts = sorted(
        (r["size"], r[value_key], r.get("std_accuracy") or 0.0)
        for r in rows
        if r[value_key] is not None
    )
    sizes = [p[0] for p in pts]
    vals = [p[1] for p in pts]
    stds = [p[2] for p in pts]
    return sizes, vals, stds


def render_plots(summary_rows: list[dict], out_dir: str | Path) -> list[Path]:
    """Write the accuracy and feature-count SVGs; returns the created paths."""
    if not summary_rows:
        raise DataError("summary is empty; nothing to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    scenario_rows = [r for r in summary_rows if r["scenario"] != POOLED_SCENARIO]
    pooled_rows = [r for r in summary_rows if r["scenario"] == POOLED_SCENARIO]
    scenarios = sorted({r["scenario"] for r in scenario_rows})
    methods = sorted({r["method"] for r in summary_rows})
    created: list[Path] = []

    for scenario in scenarios:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for k, method in enumerate(methods):
            rows = [r for r in scenario_rows
                    if r["scenario"] == scenario and r["method"] == method]
            sizes, means, stds = _series(rows, "mean_accuracy")
            if not sizes:
                continue
            style = _style_for(method, k)
            ax.plot(sizes, means, label=method, **style)
            lo = [m - s for m, s in zip(means, stds)]
            hi = [m + s for m, s in zip(means, stds)]
            ax.fill_between(sizes, lo, hi, color=style["color"], alpha=0.15, linewidth=0)
        ax.set_xlabel("training samples per class")
        ax.set_ylabel("accuracy")
        ax.set_title(scenario.replace("_", " "))
        ax.grid(True, alpha=0.3)
        ax.legend(loc="lower right", fontsize=8)
        path = out_dir / f"accuracy_{_safe_name(scenario)}.svg"
        fig.savefig(path, **_SAVE_OPTS)
        plt.close(fig)
        created.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for k, method in enumerate(methods):
        rows = [r for r in pooled_rows if r["method"] == method]
        sizes, means, _ = _series(rows, "mean_n_features")
        if not sizes:
            continue
        ax.plot(sizes, means, label=method, **_style_for(method, k))
    ax.set_xlabel("training samples per class")
    ax.set_ylabel("mean selected features")
    ax.set_title("selected feature counts (all scenarios)")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="center right", fontsize=8)
    path = out_dir / "feature_counts.svg"
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)
    created.append(path)
    return created
