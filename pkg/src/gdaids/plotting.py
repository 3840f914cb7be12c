"""Grouped per-class bar charts comparing pipeline runs."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "gdaids",
    "svg.fonttype": "none",
}


def grouped_bars(classes, series: dict, ylabel: str, title: str) -> str:
    """Render one bar group per class, one bar per series; returns SVG text.

    ``series`` maps a run label to per-class values (``None`` draws nothing). Bar
    elements carry the SVG id ``bar_<series>_<class>``.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, 4))
        n = max(len(series), 1)
        width = 0.8 / n
        x = np.arange(len(classes))
        for k, (label, values) in enumerate(series.items()):
            vals = [np.nan if v is None else v for v in values]
            bars = ax.bar(x + (k - (n - 1) / 2) * width, vals, width, label=label)
            for i, patch in enumerate(bars.patches):
                patch.set_gid(f"bar_{k}_{i}")
        ax.set_xticks(x)
        ax.set_xticklabels(classes)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend(frameon=False, loc="upper center", bbox_to_anchor=(0.5, -0.12), ncol=n)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()
