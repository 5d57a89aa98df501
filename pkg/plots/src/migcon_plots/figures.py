"""The three figure builders: time series, field snapshots, convergence.

All output is static PNG or SVG (picked by the out-file extension); the
run directories are only ever read.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .runview import RunView, UsageError, read_report

# channels that live on a multiplicative scale: dissipation rates and
# the weighted Dirichlet integrals; used for the default log choice
DISSIPATION_PREFIXES = ("fisher", "grad", "flux", "duality", "u2_",
                        "laplacian", "v_t_")


def _savefig(fig, out_path) -> str:
    ext = os.path.splitext(str(out_path))[1].lower()
    if ext not in (".png", ".svg"):
        raise UsageError(f"out file must end in .png or .svg, "
                         f"got {out_path!r}")
    fig.savefig(out_path, bbox_inches="tight", dpi=150)
    plt.close(fig)
    return str(out_path)


def plot_series(rundir, channels, out_path, logy: bool | None = None) -> str:
    """One figure with the named channels against time.

    logy None picks log scale when every requested channel looks like a
    dissipation quantity and stays positive; True/False forces it.
    """
    view = RunView.load(rundir)
    if not view.complete:
        raise UsageError(f"{rundir}: run did not finish; series would be "
                         f"misleading")
    names = [channels] if isinstance(channels, str) else list(channels)
    if not names:
        raise UsageError("no channels requested")
    data = {n: view.channel(n) for n in names}

    if logy is None:
        logy = all(n.startswith(DISSIPATION_PREFIXES) for n in names) \
            and all((y > 0.0).all() for y in data.values())

    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for n in names:
        ax.plot(view.times, data[n], label=n, lw=1.5)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.legend(loc="best", fontsize=9)
    ax.set_title(os.path.basename(os.path.normpath(str(rundir))))
    ax.grid(True, alpha=0.3)
    return _savefig(fig, out_path)


def plot_fields(rundir, index, out_path) -> str:
    """u and v of one snapshot side by side: lines in 1D, heatmaps in 2D."""
    view = RunView.load(rundir)
    u, v = view.snapshot(int(index))
    entry = next(e for e in view.snapshots if e.index == int(index))

    fig, (ax_u, ax_v) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    if view.dim == 1:
        n = view.cells[0]
        x = (np.arange(n) + 0.5) * view.lengths[0] / n
        ax_u.plot(x, u, lw=1.5)
        ax_v.plot(x, v, lw=1.5, color="tab:orange")
        ax_u.set_xlabel("x")
        ax_v.set_xlabel("x")
    else:
        lx, ly = view.lengths
        for ax, f in ((ax_u, u), (ax_v, v)):
            im = ax.imshow(f.T, origin="lower", extent=(0, lx, 0, ly),
                           aspect="auto")
            fig.colorbar(im, ax=ax, shrink=0.85)
    ax_u.set_title(f"u at t = {entry.t:.4g}")
    ax_v.set_title(f"v at t = {entry.t:.4g}")
    return _savefig(fig, out_path)


def _fit_slope(x: np.ndarray, y: np.ndarray, label: str) -> float:
    good = np.isfinite(x) & np.isfinite(y) & (x > 0.0) & (y > 0.0)
    if good.sum() < 2:
        raise UsageError(f"{label}: need at least two positive points "
                         f"to fit a slope, have {int(good.sum())}")
    return float(np.polyfit(np.log(x[good]), np.log(y[good]), 1)[0])


def _classify(path, cols) -> str:
    if {"h", "dt", "err_u", "err_v"} <= cols.keys():
        return "refinement"
    if {"eps", "du_l1_prev", "dv_l1_prev"} <= cols.keys():
        return "sweep"
    raise UsageError(f"{path}: not a refinement or sweep report "
                     f"(columns: {', '.join(cols)})")


def plot_convergence(report_paths, out_path) -> dict[str, float]:
    """Log-log convergence figure from harness report CSVs.

    Refinement reports plot the errors against whichever of h, dt the
    study varied; sweep reports plot the pairwise differences against
    eps.  Returns the fitted slope per curve, keyed "file:column"; the
    same numbers are annotated on the figure.
    """
    paths = [report_paths] if isinstance(report_paths, (str, os.PathLike)) \
        else list(report_paths)
    if not paths:
        raise UsageError("no report files given")

    curves: dict[str, list] = {"refinement": [], "sweep": []}
    for p in paths:
        cols = read_report(p)
        kind = _classify(p, cols)
        name = os.path.basename(str(p))
        if kind == "refinement":
            hs, dts = cols["h"], cols["dt"]
            x, xlabel = (hs, "h") if np.ptp(hs) > 0.0 else (dts, "dt")
            for c in ("err_u", "err_v"):
                curves[kind].append((name, c, x, cols[c], xlabel))
        else:
            for c in ("du_l1_prev", "dv_l1_prev"):
                curves[kind].append((name, c, cols["eps"], cols[c], "eps"))

    panels = [k for k in ("refinement", "sweep") if curves[k]]
    fig, axes = plt.subplots(1, len(panels),
                             figsize=(5.5 * len(panels), 4.2))
    axes = np.atleast_1d(axes)

    slopes: dict[str, float] = {}
    for ax, kind in zip(axes, panels):
        for name, col, x, y, xlabel in curves[kind]:
            s = _fit_slope(x, y, f"{name}:{col}")
            slopes[f"{name}:{col}"] = s
            good = np.isfinite(y) & (y > 0.0)
            ax.loglog(x[good], y[good], "o-",
                      label=f"{name} {col} (slope {s:.2f})")
            ax.set_xlabel(xlabel)
        ax.set_ylabel("error")
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        ax.set_title("self-convergence" if kind == "refinement"
                     else "eps Cauchy differences")
    _savefig(fig, out_path)
    return slopes
