"""Text, JSON and figure output for evaluation results."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .io import atomic_write

__all__ = ["COLUMNS", "format_table", "evaluation_to_dict", "plot_evaluation"]

COLUMNS = ("method", "mean", "median", "95%", "max")


def format_table(results) -> str:
    """Aligned plain-text table, one row per method, columns as in COLUMNS."""
    rows = [COLUMNS]
    for method, ev in results.items():
        rows.append((method, *(f"{v:.2f}" for v in ev.stats.as_tuple())))
    widths = [max(len(r[i]) for r in rows) for i in range(len(COLUMNS))]
    lines = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def evaluation_to_dict(results) -> dict:
    out = {}
    for method, ev in results.items():
        out[method] = {
            **ev.stats.to_dict(),
            "clamped": ev.clamped,
            "delta_e": [float(v) for v in ev.delta_e],
            "matrix": [float(v) for v in ev.correction.matrix.ravel()],
        }
    return out


def _style(plt):
    plt.rcParams.update(
        {
            "font.size": 9,
            "axes.spines.top": False,
            "axes.spines.right": False,
            "savefig.dpi": 150,
            "svg.hashsalt": "colorhomography",
        }
    )


def plot_evaluation(results, path) -> None:
    """Grouped bars of the four statistics plus per-patch errors.

    The output format follows the file suffix (png, svg or pdf); metadata
    that would embed a timestamp is dropped so reruns are byte-identical.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "png"
    methods = list(results)
    with plt.rc_context():
        _style(plt)
        fig, (ax_stats, ax_patch) = plt.subplots(1, 2, figsize=(9, 3.4), gridspec_kw={"width_ratios": [1, 1.6]})
        width = 0.8 / max(len(methods), 1)
        x = np.arange(4)
        for i, m in enumerate(methods):
            ax_stats.bar(x + (i - (len(methods) - 1) / 2) * width, results[m].stats.as_tuple(), width, label=m)
            ax_patch.plot(
                np.arange(1, len(results[m].delta_e) + 1),
                results[m].delta_e,
                marker="os^"[i % 3],
                ms=4 - i % 3,
                ls=("-", "--", ":")[i % 3],
                lw=1,
                label=m,
            )
        ax_stats.set_xticks(x, ["mean", "median", "95%", "max"])
        ax_stats.set_ylabel(r"$\Delta E^*_{ab}$")
        ax_stats.legend(frameon=False)
        ax_patch.set_xlabel("patch")
        ax_patch.set_ylabel(r"$\Delta E^*_{ab}$")
        fig.tight_layout()
        metadata = {"Software": None} if fmt == "png" else {"Date": None, "Creator": None}
        if fmt == "pdf":
            metadata = {"CreationDate": None, "Creator": None, "Producer": None}
        buf = io.BytesIO()
        fig.savefig(buf, format=fmt, metadata=metadata)
        plt.close(fig)
    atomic_write(path, buf.getvalue())
