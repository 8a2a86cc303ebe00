"""Grouped bar charts written as SVG with stable bytes across runs."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "svg.hashsalt": "tweetlens",
    "svg.fonttype": "none",
    "font.size": 9,
}


def grouped_bars(
    path: str | Path,
    categories: Sequence[str],
    series: Mapping[str, Sequence[float]],
    title: str = "",
    ylabel: str = "",
    horizontal: bool = False,
) -> Path:
    """One group per category, one bar per series. Returns the written path."""
    path = Path(path)
    n_series = max(len(series), 1)
    width = 0.8 / n_series
    pos = np.arange(len(categories))
    with plt.rc_context(_STYLE):
        height = max(3.0, 0.3 * len(categories) + 1.0) if horizontal else 3.5
        fig, ax = plt.subplots(figsize=(6.4, height))
        for i, (name, values) in enumerate(series.items()):
            offset = pos - 0.4 + width * (i + 0.5)
            if horizontal:
                ax.barh(offset, values, height=width, label=name)
            else:
                ax.bar(offset, values, width=width, label=name)
        if horizontal:
            ax.set_yticks(pos, list(categories))
            ax.invert_yaxis()
            ax.set_xlabel(ylabel)
        else:
            ax.set_xticks(pos, list(categories), rotation=30 if len(categories) > 6 else 0, ha="right"
                          if len(categories) > 6 else "center")
            ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
