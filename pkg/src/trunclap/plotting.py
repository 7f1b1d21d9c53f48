"""Figures written next to the CLI reports (PNG via the Agg backend)."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _figure(width=5.0):
    golden = (math.sqrt(5) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, width * golden))
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def line_plot(path, x, series, xlabel, ylabel, logx=False, logy=False, title=None):
    """One marked line per entry of ``series`` (label -> y values)."""
    fig, ax = _figure()
    for label, y in series.items():
        ax.plot(x, y, marker="o", ms=3, lw=1, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def field_plot(path, values, lo, hi, title=None, mask=None):
    """Filled contours of a 2D array sampled on the box ``[lo, hi]``."""
    values = np.asarray(values, dtype=float)
    if mask is not None:
        values = np.ma.masked_where(~mask, values)
    xs = np.linspace(lo[0], hi[0], values.shape[0])
    ys = np.linspace(lo[1], hi[1], values.shape[1])
    fig, ax = _figure()
    cs = ax.contourf(xs, ys, values.T, levels=20, cmap="viridis")
    fig.colorbar(cs, ax=ax)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def eigenfunction_plot(path, pair, resolution=121):
    """Eigenfunction on its domain (2D) or along the first axis (other dimensions)."""
    dom = pair.domain
    if hasattr(dom, "half_sides"):
        half = np.asarray(dom.half_sides, dtype=float)
    else:
        half = np.full(dom.dim, dom.radius)
    t = np.linspace(-1.0, 1.0, resolution + 2)[1:-1]
    if dom.dim == 2:
        gx, gy = np.meshgrid(t * half[0], t * half[1], indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        inside = dom.contains(pts)
        vals = np.zeros(len(pts))
        vals[inside] = pair.u(pts[inside])
        return field_plot(path, vals.reshape(gx.shape), -half, half,
                          title=f"mu = {pair.mu:.6g}", mask=inside.reshape(gx.shape))
    pts = np.zeros((t.size, dom.dim))
    pts[:, 0] = t * half[0]
    return line_plot(path, pts[:, 0], {"u": pair.u(pts)}, "x_1", "u", title=f"mu = {pair.mu:.6g}")
