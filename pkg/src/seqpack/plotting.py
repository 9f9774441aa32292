"""Matplotlib figures for benchmark reports, written straight to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import BenchmarkReport  # noqa: E402


def plot_mean_plates(report: BenchmarkReport, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    counts = report.counts()
    for setup in report.setups:
        ys = [report.mean_plates(n, setup) for n in counts]
        pts = [(n, y) for n, y in zip(counts, ys) if y is not None]
        if pts:
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", markersize=3, label=setup)
    ax.set_xlabel("number of objects")
    ax.set_ylabel("mean plates used")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_histogram(report: BenchmarkReport, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    hists = {s: report.histogram(s) for s in report.setups}
    ks = sorted({k for h in hists.values() for k in h})
    width = 0.8 / max(1, len(report.setups))
    for j, setup in enumerate(report.setups):
        xs = [k + (j - (len(report.setups) - 1) / 2) * width for k in ks]
        ax.bar(xs, [hists[setup][k] for k in ks], width=width, label=setup)
    ax.set_xlabel("objects on plate")
    ax.set_ylabel("plates")
    if ks:
        ax.set_xticks(ks)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_runtimes(report: BenchmarkReport, path: str | Path) -> Path:
    """Sorted per-instance wall times, one curve per setup."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for setup in report.setups:
        times = sorted(r.wall_s for r in report.records if r.setup == setup and r.solved)
        ax.plot(range(1, len(times) + 1), times, label=setup)
    ax.set_xlabel("instances solved")
    ax.set_ylabel("wall time [s]")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def write_figures(report: BenchmarkReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        plot_mean_plates(report, out / "mean_plates.png"),
        plot_histogram(report, out / "objects_per_plate.png"),
        plot_runtimes(report, out / "runtimes.png"),
    ]
