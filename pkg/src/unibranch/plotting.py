"""Static branch diagrams rendered next to the delimited run output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SIDE_COLORS = {"plus": "tab:blue", "minus": "tab:red"}
EVENT_MARKERS = {"FOLD": "o", "SINGULAR": "s", "BOUNDARY_APPROACH": "^",
                 "BLOWUP": "x", "BASE_RETURN": "D", "STEP_FAILURE": "v"}


def _figure(width=6.0, height=None):
    height = height or width * (np.sqrt(5.0) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, height))
    ax.tick_params(labelsize=9)
    return fig, ax


def branch_diagram(branches, path: Path, title: str = "") -> Path:
    """lambda against max|u| for each side, events marked."""
    fig, ax = _figure()
    for br in branches:
        lam = br.lambdas()
        amp = np.array([np.max(np.abs(p.u)) for p in br.points])
        ax.plot(lam, amp, "-", color=SIDE_COLORS[br.side.value], lw=1.2,
                label=f"{br.side.value}: {br.classification.value}")
        for ev in br.events:
            ax.plot(ev.location.lam, np.max(np.abs(ev.location.u)),
                    EVENT_MARKERS.get(ev.kind.value, "o"), color="k", ms=5)
    ax.plot(branches[0].start.lam, np.max(np.abs(branches[0].start.u)), "k*", ms=9)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\|u\|_\infty$")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def gradient_diagram(branches, mesh, path: Path) -> Path:
    from .mcbvp import grad_blowup_monitor

    fig, ax = _figure()
    for br in branches:
        g, _ = grad_blowup_monitor(mesh, br.points)
        ax.semilogy(br.lambdas(), g, "-", color=SIDE_COLORS[br.side.value], lw=1.2,
                    label=br.side.value)
    lam = np.linspace(1e-3, max(max(br.lambdas().max() for br in branches), 2e-3), 200)
    ax.semilogy(lam, np.sqrt((1 - mesh.delta) / lam), "k--", lw=0.8,
                label=r"$\sqrt{(1-\delta)/\lambda}$")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\max|u'|$")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def profiles(branch, mesh, path: Path, count: int = 6) -> Path:
    fig, ax = _figure()
    x = np.concatenate(([0.0], mesh.x, [1.0]))
    idx = np.unique(np.linspace(0, len(branch.points) - 1, count).astype(int))
    for k in idx:
        p = branch.points[k]
        ax.plot(x, np.concatenate(([0.0], p.u, [0.0])), lw=1.0, label=rf"$\lambda={p.lam:.3g}$")
    ax.set_xlabel("$x$")
    ax.set_ylabel("$u$")
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_all(branches, outdir: Path, mesh=None, title: str = "") -> list[Path]:
    out = [branch_diagram(branches, outdir / "branch_diagram.png", title)]
    if mesh is not None:
        out.append(gradient_diagram(branches, mesh, outdir / "gradient.png"))
        for br in branches:
            out.append(profiles(br, mesh, outdir / f"profiles_{br.side.value}.png"))
    return out
