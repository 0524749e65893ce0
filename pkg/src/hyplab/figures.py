"""Figure rendering for the report path.

Renders the plot-data series to PNG files next to the CSV artifacts.
Purely presentational: figures are regenerated from the delimited data and
are not part of the determinism hash manifest.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _series_groups(plot_rows, prefix):
    groups = {}
    for row in plot_rows:
        name = row["series"]
        if name.startswith(prefix):
            groups.setdefault(name, []).append((row["x"], row["y"]))
    return {k: sorted(v) for k, v in groups.items()}


def render_figures(plot_rows, out_dir) -> list:
    """Write one PNG per report family present in the plot data."""
    out_dir = Path(out_dir)
    written = []

    heat = _series_groups(plot_rows, "heat:")
    if heat:
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for name, pts in sorted(heat.items()):
            xs, ys = zip(*pts)
            label = name.split("heat:", 1)[1]
            style = "--" if label.endswith(":bound") else "-"
            ax.loglog(xs, ys, style, label=label)
        ax.set_xlabel("t")
        ax.set_ylabel("heat-trace statistic")
        ax.legend(fontsize=7)
        ax.set_title("Heat-trace decay vs fitted bound")
        fig.tight_layout()
        path = out_dir / "heat_trace.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)

    thm11 = _series_groups(plot_rows, "thm11:")
    if thm11:
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for name, pts in sorted(thm11.items()):
            xs, ys = zip(*pts)
            ax.semilogy(xs, ys, "o-", label=name.split("thm11:", 1)[1])
        ax.set_xlabel("k")
        ax.set_ylabel("lambda_k I g^2 / k^2")
        ax.legend(fontsize=7)
        ax.set_title("Eigenvalue lower-bound ratios")
        fig.tight_layout()
        path = out_dir / "thm11_ratios.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)

    scatter = _series_groups(plot_rows, "thm14:")
    if scatter:
        fig, ax = plt.subplots(figsize=(5.2, 5.2))
        for name, pts in sorted(scatter.items()):
            xs, ys = zip(*pts)
            ax.plot(xs, ys, ".", alpha=0.7, label=name.split("thm14:", 1)[1])
        lim = max((max(x for x, _ in pts) for pts in scatter.values()), default=1.0)
        ax.plot([0, lim], [0, lim], "k--", lw=0.8, label="EL = bound")
        ax.set_xlabel("d_w + log terms")
        ax.set_ylabel("extremal length")
        ax.legend(fontsize=7)
        ax.set_title("Extremal length vs weighted-distance bound")
        fig.tight_layout()
        path = out_dir / "el_vs_bound.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)

    minimax = _series_groups(plot_rows, "minimax:")
    if minimax:
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for name, pts in sorted(minimax.items()):
            xs, ys = zip(*pts)
            ax.semilogy(xs, ys, "s-", label=name.split("minimax:", 1)[1])
        ax.set_xlabel("k")
        ax.set_ylabel("certified upper bound R_k")
        ax.legend(fontsize=7)
        ax.set_title("Minimax upper bounds")
        fig.tight_layout()
        path = out_dir / "minimax_bounds.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written
