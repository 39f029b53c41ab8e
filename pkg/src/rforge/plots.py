"""Matplotlib renderings of corpus statistics, written next to the
delimited reports: a conditional-degree histogram, a derivation-depth
histogram, and per-rule production counts."""

from __future__ import annotations

from pathlib import Path

from .corpus import CorpusStats


def render_stats_figures(stats: CorpusStats, outdir: str | Path) -> list[Path]:
    """Write PNG figures for ``stats`` into ``outdir``; returns the paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def bar_figure(
        data: dict, title: str, xlabel: str, filename: str, horizontal: bool = False
    ) -> None:
        if not data:
            return
        keys = [str(k) for k in sorted(data)]
        values = [data[k] for k in sorted(data)]
        fig, ax = plt.subplots(figsize=(7, 4.5))
        if horizontal:
            ax.barh(keys, values, color="#4878a8")
            ax.set_xlabel("records")
            ax.set_ylabel(xlabel)
        else:
            ax.bar(keys, values, color="#4878a8")
            ax.set_xlabel(xlabel)
            ax.set_ylabel("records")
        ax.set_title(title)
        ax.grid(axis="x" if horizontal else "y", alpha=0.3)
        fig.tight_layout()
        path = outdir / filename
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)

    bar_figure(
        stats.degree_histogram,
        "Conditional-degree distribution",
        "degree of =>",
        "degree_histogram.png",
    )
    bar_figure(
        stats.depth_histogram,
        "Derivation-depth distribution",
        "depth",
        "depth_histogram.png",
    )
    bar_figure(
        stats.rule_counts,
        "Records per rule",
        "rule",
        "rule_counts.png",
        horizontal=True,
    )
    return written
