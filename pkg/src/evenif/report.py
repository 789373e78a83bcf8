"""Benchmark artifacts: delimited output, JSON summary, and rendered figures.

The CSV writer pins column order and float formatting so identical runs
produce byte-identical files; figures are rendered to PNG next to them.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .evaluation import EXTRA_COLUMNS, REQUIRED_COLUMNS, BenchmarkReport

_COLUMNS = REQUIRED_COLUMNS + EXTRA_COLUMNS

_METHOD_STYLE = {
    "sgen": {"color": "#2B6CB0", "marker": "o"},
    "sgen_causal": {"color": "#2B6CB0", "marker": "o"},
    "dice_star": {"color": "#C05621", "marker": "s"},
    "piece_star": {"color": "#2F855A", "marker": "^"},
    "dser_star": {"color": "#805AD5", "marker": "D"},
    "karimi_star": {"color": "#975A16", "marker": "v"},
    "dominguez_star": {"color": "#B83280", "marker": "P"},
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_rows_csv(path, rows: list[dict]) -> None:
    lines = [",".join(_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in _COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_json(path, report: BenchmarkReport, plan: dict | None = None) -> None:
    doc = {
        "plan": plan or {},
        "aggregates": report.aggregates,
        "warnings": report.warnings,
        "failures": report.failures,
        "n_rows": len(report.rows),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def render_metric_figures(report: BenchmarkReport, out_dir, prefix: str = "benchmark") -> list[str]:
    """One line chart per metric (mean +- standard error vs m, per method)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    metrics = sorted({a["metric"] for a in report.aggregates})
    for metric in metrics:
        sub = [a for a in report.aggregates if a["metric"] == metric]
        methods = sorted({a["method"] for a in sub})
        fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
        for method in methods:
            pts = sorted(
                (a for a in sub if a["method"] == method),
                key=lambda a: (isinstance(a["m"], str), a["m"]),
            )
            xs = [p["m"] for p in pts]
            ys = [p["mean"] for p in pts]
            es = [p["stderr"] for p in pts]
            style = _METHOD_STYLE.get(method, {})
            ax.errorbar(xs, ys, yerr=es, label=method, capsize=3, **style)
        ax.set_xlabel("m (suggestions requested)")
        ax.set_ylabel(metric)
        ax.set_title(f"{metric} (normalized)" if metric != "robustness" else "robustness (raw 0-1)")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        path = out_dir / f"{prefix}_{metric}.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(str(path))
    return written


def render_causal_gain_figure(report: BenchmarkReport, out_dir, prefix: str = "causal") -> str | None:
    """Action gain vs causal gain bars per method (causal lane only)."""
    rows = [r for r in report.rows if r.get("action_gain") is not None]
    if not rows:
        return None
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    methods = sorted({r["method"] for r in rows})
    action, causal, action_se, causal_se = [], [], [], []
    for method in methods:
        a = [r["action_gain"] for r in rows if r["method"] == method]
        c = [r["gain"] for r in rows if r["method"] == method]
        action.append(float(sum(a) / len(a)))
        causal.append(float(sum(c) / len(c)))
        action_se.append(_stderr(a))
        causal_se.append(_stderr(c))
    x = range(len(methods))
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    width = 0.38
    ax.bar([i - width / 2 for i in x], action, width, yerr=action_se, capsize=3,
           label="action gain", color="#A0AEC0")
    ax.bar([i + width / 2 for i in x], causal, width, yerr=causal_se, capsize=3,
           label="causal gain", color="#2B6CB0")
    ax.set_xticks(list(x))
    ax.set_xticklabels(methods, rotation=15)
    ax.set_ylabel("mean gain")
    ax.set_title("gain before and after structural propagation")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, axis="y")
    path = out_dir / f"{prefix}_gain.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path)


def _stderr(values) -> float:
    import numpy as np

    arr = np.asarray(values, dtype=float)
    return float(arr.std(ddof=1) / len(arr) ** 0.5) if len(arr) > 1 else 0.0


def emit_artifacts(report: BenchmarkReport, out_dir, plan: dict | None = None) -> dict:
    """Write CSV + JSON + figures; returns the artifact paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    summary_path = out_dir / "summary.json"
    write_rows_csv(csv_path, report.rows)
    write_summary_json(summary_path, report, plan)
    figures = render_metric_figures(report, out_dir)
    causal_fig = render_causal_gain_figure(report, out_dir)
    if causal_fig:
        figures.append(causal_fig)
    return {"csv": str(csv_path), "summary": str(summary_path), "figures": figures}
