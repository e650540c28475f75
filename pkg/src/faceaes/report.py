"""Rendering of evaluation results: aligned tables, CSV, and figures.

The sweep table mirrors the block-combination layout used throughout the
docs: one checkmark column per block, a #features column (mean popcount for
GA rows), a GA flag and the metric with its across-round spread. Figures
are rendered headless (Agg backend) to files next to the delimited output.
"""

from __future__ import annotations

import csv

import numpy as np

CHECK = "x"


def _metric_label(report) -> str:
    return "GCR" if report.metric_name == "gcr" else "LCC"


def _metric_cell(report) -> str:
    return f"{report.metric_mean:.4f} +- {report.metric_std:.4f}"


def _features_cell(row) -> str:
    if row.predictor == "ga" and row.report.mean_selected is not None:
        return str(int(round(row.report.mean_selected)))
    return str(row.n_features)


def render_sweep_table(rows) -> str:
    """Aligned text table, one line per sweep row."""
    if not rows:
        raise ValueError("no sweep rows to render")
    block_names = []
    for r in rows:
        for n in r.blocks:
            if n not in block_names:
                block_names.append(n)
    header = list(block_names) + ["#features", "GA", _metric_label(rows[0].report)]
    table = [header]
    for r in rows:
        line = [CHECK if n in r.blocks else "" for n in block_names]
        line.append(_features_cell(r))
        line.append(CHECK if r.predictor == "ga" else "")
        line.append(_metric_cell(r.report))
        table.append(line)
    widths = [max(len(row[c]) for row in table) for c in range(len(header))]
    out = []
    for i, row in enumerate(table):
        out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def write_sweep_csv(rows, path) -> None:
    """One CSV row per sweep row; block membership as 0/1 flags."""
    if not rows:
        raise ValueError("no sweep rows to write")
    block_names = [n for n in rows[-1].blocks]
    for r in rows:
        for n in r.blocks:
            if n not in block_names:
                block_names.append(n)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(block_names + ["n_features", "ga", "mean_selected",
                                  "metric_name", "metric_mean", "metric_std"])
        for r in rows:
            w.writerow(
                [1 if n in r.blocks else 0 for n in block_names]
                + [r.n_features,
                   1 if r.predictor == "ga" else 0,
                   "" if r.report.mean_selected is None else repr(r.report.mean_selected),
                   r.report.metric_name,
                   repr(r.report.metric_mean),
                   repr(r.report.metric_std)]
            )


def render_eval_summary(report) -> str:
    """Short human-readable recap of one protocol run."""
    lines = [
        f"task:       {report.task}",
        f"predictor:  {report.predictor}",
        f"samples:    {report.n_samples} x {report.dim} features",
        f"protocol:   {report.rounds} rounds x {report.n_folds} folds, seed {report.master_seed}",
        f"{_metric_label(report)}:        {report.metric_mean:.4f} +- {report.metric_std:.4f}",
    ]
    if report.mean_selected is not None:
        lines.append(f"selected:   {report.mean_selected:.1f} features on average")
    return "\n".join(lines) + "\n"


def _axes(path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.0), dpi=120)
    return plt, fig, ax


def _save(plt, fig, path) -> None:
    # strip the writer's metadata so reruns produce bit-identical PNGs
    kw = {"metadata": {"Software": None}} if str(path).endswith(".png") else {}
    fig.savefig(path, **kw)
    plt.close(fig)


def save_sweep_figure(rows, path) -> None:
    """Bar chart of the sweep: metric mean per combination, std as error bars."""
    plt, fig, ax = _axes(path)
    labels = ["+".join(r.blocks) + (" (GA)" if r.predictor == "ga" else "") for r in rows]
    means = [r.report.metric_mean for r in rows]
    stds = [r.report.metric_std for r in rows]
    x = np.arange(len(rows))
    ax.bar(x, means, yerr=stds, capsize=3, color="#4878a8")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(_metric_label(rows[0].report))
    ax.set_title("feature combinations")
    fig.tight_layout()
    _save(plt, fig, path)


def save_rounds_figure(report, path) -> None:
    """Per-round metric means with the overall mean as a reference line."""
    plt, fig, ax = _axes(path)
    x = np.arange(len(report.round_means))
    ax.plot(x, report.round_means, marker="o", color="#4878a8")
    ax.axhline(report.metric_mean, color="#a84848", linestyle="--", linewidth=1,
               label=f"mean {report.metric_mean:.4f}")
    ax.set_xlabel("round")
    ax.set_ylabel(_metric_label(report))
    ax.set_title(f"{report.predictor} / {report.task}")
    ax.legend()
    fig.tight_layout()
    _save(plt, fig, path)


def save_trace_figure(trace, path) -> None:
    """Best and mean fitness per generation of one genetic search."""
    plt, fig, ax = _axes(path)
    x = np.arange(len(trace.best_fitness))
    ax.plot(x, trace.best_fitness, label="best", color="#4878a8")
    ax.plot(x, trace.mean_fitness, label="population mean", color="#a88448", alpha=0.8)
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness (training loss)")
    if np.min(trace.best_fitness) > 0 and np.min(trace.mean_fitness) > 0:
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    _save(plt, fig, path)
