"""Rendering of sweep results to figure files (no interactive windows)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_COLORS = {("proposed", "lambda"): "tab:blue",
           ("conventional", "lambda"): "tab:red",
           ("proposed", "effrank"): "tab:green",
           ("conventional", "effrank"): "tab:orange"}
_MARKERS = {"proposed": "o", "conventional": "s"}
_LINESTYLES = {"lambda": "-", "effrank": "--"}
_METRIC_LABEL = {"lambda": "singular-value ratio", "effrank": "effective rank"}


def render_rate_curves(rows, out_path: str | Path, title: str | None = None) -> Path:
    """One errorbar curve per (selector, objective); returns the written path."""
    groups: dict[tuple[str, str], list] = {}
    for r in rows:
        groups.setdefault((r.selector, r.metric), []).append(r)

    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    for (selector, metric), rs in sorted(groups.items()):
        rs = sorted(rs, key=lambda r: r.snr_db)
        x = [r.snr_db for r in rs]
        y = [r.mean_rate for r in rs]
        err = [r.stderr for r in rs]
        ax.errorbar(x, y, yerr=err, capsize=2.5,
                    color=_COLORS.get((selector, metric)),
                    marker=_MARKERS.get(selector, "o"),
                    linestyle=_LINESTYLES.get(metric, "-"),
                    markersize=4.5, linewidth=1.4,
                    label=f"{selector}, {_METRIC_LABEL.get(metric, metric)}")
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("Achievable rate [bits/s/Hz]")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper left", fontsize=9)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
