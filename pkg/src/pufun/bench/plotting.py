"""Optional PNG rendering for the command line; imported only when ``--plot`` is given."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("--plot needs matplotlib; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_zones(fun, path) -> Path:
    """Draw leaf zones of a 2D approximant as rectangles."""
    plt = _pyplot()
    from matplotlib.patches import Rectangle
    if fun.d != 2:
        raise ValueError("zone plots are two-dimensional only")
    fig, ax = plt.subplots(figsize=(5, 5))
    for lf in fun.leaves():
        if lf.payload is None:
            continue
        (x0, y0), (x1, y1) = lf.zone.lo, lf.zone.hi
        ax.add_patch(Rectangle((x0, y0), x1 - x0, y1 - y0, fill=False, lw=0.4))
    ax.set_xlim(fun.omega.lo[0], fun.omega.hi[0])
    ax.set_ylim(fun.omega.lo[1], fun.omega.hi[1])
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_field(fun, axes, path) -> Path:
    """Filled contour plot of a 2D approximant on the given axes."""
    plt = _pyplot()
    if fun.d != 2:
        raise ValueError("field plots are two-dimensional only")
    vals = fun.eval_grid(axes)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    cs = ax.contourf(axes[0], axes[1], np.ma.masked_invalid(vals).T, levels=40)
    fig.colorbar(cs, ax=ax)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def plot_reports(reports, path) -> Path:
    """Build time and error per row of a suite report."""
    plt = _pyplot()
    names = [r.function for r in reports]
    x = np.arange(len(reports))
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(max(6, 0.35 * len(reports)), 6), sharex=True)
    a1.semilogy(x, [r.build_time_s for r in reports], "o-")
    a1.set_ylabel("build time (s)")
    a2.semilogy(x, [r.max_error for r in reports], "s-")
    a2.set_ylabel("max relative error")
    a2.set_xticks(x)
    a2.set_xticklabels(names, rotation=75, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
