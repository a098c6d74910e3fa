"""Figure rendering for the report bundle.

All renderers write straight to disk via the Agg backend, so they are
safe in headless batch runs.  Each takes the already-computed artifacts
(occurrence table, fit, partition, ...) and a destination path; nothing
here recomputes statistics.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import PowerLawFit, predict
from .gap import GapPartition
from .ingest import OccurrenceTable

_POINT = dict(s=3, linewidths=0)


def _scatter_counts(ax, table: OccurrenceTable, color="#555555", label=None):
    n = np.arange(1, table.n_max + 1)
    counts = table.counts[1:]
    mask = counts >= 1
    ax.scatter(n[mask], counts[mask], c=color, label=label, **_POINT)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("N(n)")


def cloud_figure(
    table: OccurrenceTable,
    path,
    fit: PowerLawFit | None = None,
    partition: GapPartition | None = None,
) -> None:
    """Occurrence cloud, optionally with the fitted curve and the boundary.

    With a partition, points above the boundary are drawn darker than
    the rest and the per-n boundary value is overlaid.
    """
    fig, ax = plt.subplots(figsize=(8, 5))
    if partition is None:
        _scatter_counts(ax, table)
    else:
        n_start, n_end = partition.params.n_start, partition.params.n_end
        n = np.arange(1, table.n_max + 1)
        counts = table.counts[1:]
        above = np.zeros(table.n_max, dtype=bool)
        above[n_start - 1 : n_end] = partition.in_A
        shown = counts >= 1
        low = shown & ~above
        ax.scatter(n[low], counts[low], c="#b0b0b0", label="below", **_POINT)
        ax.scatter(n[above & shown], counts[above & shown], c="#1f3b70",
                   label="above", **_POINT)
        study_n = np.arange(n_start, n_end + 1)
        positive = partition.boundary >= 1
        ax.plot(study_n[positive], partition.boundary[positive],
                c="#c44e52", lw=1.0, label="boundary")
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("N(n)")
    if fit is not None:
        n_line = np.unique(np.geomspace(1, table.n_max, 200).astype(int))
        ax.plot(n_line, [predict(fit, int(v)) for v in n_line],
                c="#222222", lw=1.2, ls="--",
                label=f"k n^{fit.slope:.2f} (r2={fit.r2:.2f})")
    if ax.get_legend_handles_labels()[1]:
        ax.legend(loc="upper right", frameon=False, markerscale=3)
    ax.set_title(table.snapshot_label or "occurrence cloud")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def omega_figure(proportions: dict, path) -> None:
    """Share of integers above the gap as a function of factor count."""
    omegas = sorted(proportions)
    values = [proportions[w] for w in omegas]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(omegas, values, marker="o", c="#1f3b70")
    ax.set_xlabel("prime factors with multiplicity")
    ax.set_ylabel("fraction above the gap")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def comparison_figure(real: OccurrenceTable, synthetic: OccurrenceTable, path) -> None:
    """Real and synthetic clouds side by side on matching log axes."""
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5), sharey=True)
    _scatter_counts(axes[0], real, color="#1f3b70")
    axes[0].set_title(real.snapshot_label or "snapshot cloud")
    _scatter_counts(axes[1], synthetic, color="#888888")
    axes[1].set_title(synthetic.snapshot_label or "synthetic cloud")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
