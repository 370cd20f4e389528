"""Static figures for shuffle runs and bound comparisons."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed salt and no timestamps so identical data gives identical SVG/PDF bytes
plt.rcParams.update({
    "svg.hashsalt": "agtr",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
})
_METADATA = {"svg": {"Date": None}, "pdf": {"CreationDate": None}, "png": {}}


def _save(fig, path):
    ext = str(path).rsplit(".", 1)[-1].lower()
    fig.savefig(path, bbox_inches="tight", metadata=_METADATA.get(ext), dpi=150)
    plt.close(fig)


def plot_shuffle(records, path, correlation=None):
    """Two panels: precision lower bound and recall upper bound vs percent shuffled."""
    x = [100 * r.shuffle_fraction for r in records]
    series = [
        ("Precision lower bound", [r.precision_lower_bound for r in records], "tab:blue",
         None if correlation is None else correlation.r_precision),
        ("Recall upper bound", [r.recall_upper_bound for r in records], "tab:red",
         None if correlation is None else correlation.r_recall),
    ]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4), sharex=True)
    for ax, (label, y, color, r) in zip(axes, series):
        ax.plot(x, y, color=color, lw=1.5, marker="o", ms=2)
        ax.set_xlabel("Samples shuffled (%)")
        ax.set_ylabel(label)
        ax.set_xlim(0, 100)
        if r is not None:
            ax.set_title(f"r = {r:.3f}", fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def plot_bounds(reports, path):
    """Grouped bars of both bounds for each named candidate."""
    names = [name for name, _ in reports]
    lb = [rep.precision_lower_bound for _, rep in reports]
    ub = [rep.recall_upper_bound for _, rep in reports]
    width = 0.38
    xs = range(len(names))
    fig, ax = plt.subplots(figsize=(max(4, 1.3 * len(names) + 2), 3.4))
    ax.bar([i - width / 2 for i in xs], lb, width, label="Precision lower bound", color="tab:blue")
    ax.bar([i + width / 2 for i in xs], ub, width, label="Recall upper bound", color="tab:red")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names)
    ax.set_ylim(0, 1)
    ax.set_ylabel("Bound")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)
