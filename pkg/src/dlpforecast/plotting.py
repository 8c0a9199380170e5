"""Forecast charts written next to the CSV reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .report import ReportRow  # noqa: E402
from .store import safe_filename  # noqa: E402

STYLE = {
    "figure.figsize": (7.0, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 8,
    "font.size": 9,
}


def _split(rows: list[ReportRow], horizon_start: int):
    fit = [r for r in rows if r.period_index < horizon_start]
    fut = [r for r in rows if r.period_index >= horizon_start]
    return fit, fut


def plot_user(rows: list[ReportRow], horizon_start: int, ceiling: float, path: Path) -> Path:
    """Actuals, fitted trend, band and forecast for one user."""
    fit, fut = _split(rows, horizon_start)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = [r.period_label for r in rows]
        ax.fill_between(x, [r.lower for r in rows], [r.upper for r in rows],
                        color="tab:blue", alpha=0.15, label="band")
        ax.plot([r.period_label for r in fit], [r.yhat for r in fit], color="tab:blue", label="trend")
        if fut:
            seam = fit[-1:] + fut
            ax.plot([r.period_label for r in seam], [r.yhat for r in seam], color="tab:blue",
                    linestyle="--", label="forecast")
            ax.hlines(ceiling, seam[0].period_label, fut[-1].period_label, colors="tab:red",
                      linestyles=":", label="training ceiling")
        obs = [r for r in rows if r.y is not None]
        ax.plot([r.period_label for r in obs], [r.y for r in obs], "o", color="black", ms=4, label="actual")
        hits = [r for r in rows if r.breach]
        if hits:
            ax.plot([r.period_label for r in hits],
                    [r.y if r.y is not None else r.yhat for r in hits],
                    "x", color="tab:red", ms=9, mew=2, label="breach")
        ax.set_title(f"{rows[0].user_id}: access forecast")
        ax.set_ylabel("access minutes per period")
        ax.legend(loc="upper left")
        fig.autofmt_xdate()
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_overall(rows: list[ReportRow], path: Path) -> Path:
    """All users summed per period: total actuals and total trend."""
    totals: dict = {}
    for r in rows:
        y, yhat = totals.get(r.period_label, (None, 0.0))
        if r.y is not None:
            y = (y or 0.0) + r.y
        totals[r.period_label] = (y, yhat + r.yhat)
    labels = sorted(totals)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(labels, [totals[d][1] for d in labels], color="tab:blue", label="trend (all users)")
        obs = [d for d in labels if totals[d][0] is not None]
        ax.plot(obs, [totals[d][0] for d in obs], "o", color="black", ms=4, label="actual (all users)")
        ax.set_title("overall access forecast")
        ax.set_ylabel("access minutes per period")
        ax.legend(loc="upper left")
        fig.autofmt_xdate()
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def figure_path(plot_dir: Path, user_id: str) -> Path:
    return Path(plot_dir) / f"{safe_filename(user_id)}.png"
