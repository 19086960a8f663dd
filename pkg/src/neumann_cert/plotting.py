"""Optional figures for the CLI report path (matplotlib, Agg backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

TARGET = 16 * np.pi**2


def _save(fig, out_dir, name) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def zone_heatmap(report, a, c, F, out_dir) -> Path:
    """Scatter of F over the grid of one zone, with the maximizer marked."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    step = max(1, len(a) // 60000)
    sc = ax.scatter(a[::step], c[::step], c=F[::step], s=2, cmap="viridis", rasterized=True)
    ax.plot(*report.argmax, "r*", ms=12, label=f"max F = {report.max_F:.5f}")
    fig.colorbar(sc, ax=ax, label="F")
    ax.set_xlabel("a")
    ax.set_ylabel("c")
    ax.set_title(f"zone {report.zone}, k = {report.k:g}, certified upper {report.certified_upper:.5f}")
    ax.legend(loc="lower right", fontsize=8)
    return _save(fig, out_dir, f"zone_{report.zone}.png")


def scan_plot(rows, out_dir) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    vals = np.array([r.scaled for r in rows])
    ax.plot(np.arange(len(vals)), vals / TARGET, "o", ms=3)
    ax.axhline(1.0, color="k", lw=0.8, ls="--", label="16 pi^2")
    ax.set_xlabel("shape index")
    ax.set_ylabel("P^2 mu_1 / (16 pi^2)")
    ax.legend(fontsize=8)
    return _save(fig, out_dir, "scan.png")


def mesh_plot(mesh, out_dir, name="mesh.png", title="") -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.triplot(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.elements, lw=0.2, color="0.3")
    ax.set_aspect("equal")
    ax.set_title(title)
    return _save(fig, out_dir, name)


def bounds_plot(bound_set, out_dir) -> Path:
    scaled = bound_set.scaled()
    names = [k for k in scaled if k != "target"]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.barh(names, [scaled[k] for k in names])
    ax.axvline(scaled["target"], color="k", ls="--", lw=0.8)
    ax.set_xlabel("P^2 times bound")
    return _save(fig, out_dir, "bounds.png")
