"""Figures for distillation reports (written to files, never shown)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .distill import DistillationPlan  # noqa: E402
from .subspace import comparison_matrix  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 11,
    "axes.titlesize": 11,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "figure.figsize": (4.8, 3.6),
}


def plot_comparison_matrix(rho, plan: DistillationPlan, ax=None):
    """Heatmap of the normalised modulus matrix with the maximal blocks outlined."""
    a = comparison_matrix(rho)
    d = a.shape[0]
    if ax is None:
        _, ax = plt.subplots()
    im = ax.imshow(a, vmin=0, vmax=1, cmap="viridis")
    ax.figure.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    ticks = np.arange(d)
    ax.set_xticks(ticks, [str(i + 1) for i in ticks])
    ax.set_yticks(ticks, [str(i + 1) for i in ticks])
    for sub in plan.decomposition.subspaces:
        idx = sub.indices
        # blocks need not be contiguous; outline each cell of the block
        for i in idx:
            for j in idx:
                ax.add_patch(Rectangle((j - 0.5, i - 0.5), 1, 1, fill=False, lw=1.2, ec="white"))
    ax.set_title("comparison matrix")
    return ax


def plot_distribution(plan: DistillationPlan, ax=None):
    """Stacked bars of p_n, one colour per maximal subspace."""
    d = plan.dim
    if ax is None:
        _, ax = plt.subplots()
    n = np.arange(1, d + 1)
    bottom = np.zeros(d)
    for mu, sp in enumerate(plan.subspaces):
        contrib = np.zeros(d)
        contrib[: sp.subspace.dim] = sp.subspace.weight * sp.distribution
        if not contrib.any():
            continue
        label = "{" + ",".join(str(i + 1) for i in sp.subspace.indices) + "}"
        ax.bar(n, contrib, bottom=bottom, label=label, edgecolor="k", lw=0.5)
        bottom += contrib
    ax.set_xticks(n)
    ax.set_xlabel("level n")
    ax.set_ylabel("probability of psi^n")
    ax.set_ylim(0, max(1.0, bottom.max() * 1.05))
    ax.set_title(f"{plan.measure.name}: value {plan.total_value:.4f}")
    if len(plan.subspaces) <= 8:
        ax.legend(title="subspace", fontsize=8)
    return ax


def render_figures(rho, plan: DistillationPlan, outdir, stem: str = "distill") -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    with plt.rc_context(RC):
        for suffix, draw in (("comparison", lambda ax: plot_comparison_matrix(rho, plan, ax)),
                             ("distribution", lambda ax: plot_distribution(plan, ax))):
            fig, ax = plt.subplots()
            draw(ax)
            path = outdir / f"{stem}_{suffix}.png"
            fig.savefig(path, metadata={"Software": None})
            plt.close(fig)
            paths.append(path)
    return paths
