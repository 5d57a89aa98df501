"""Parameter sweeps and refinement studies over whole simulations.

Three orchestrations:

  eps_sweep          same plan at a decreasing list of regularization
                     strengths; reports the pairwise L1 space-time
                     differences (Cauchy evidence) and the final budget
                     trajectory, which must fall toward 1
  refinement_study   dyadic ladder in h or in dt; errors are measured
                     against the finest computed level (self-convergence:
                     no exact solution exists for the full system) with
                     cell-average restriction onto coarser grids
  alpha_scan         same data across the exponent range; tabulates the
                     flux exponent used and the uniform-bound verdicts

Each report serializes to a small CSV for downstream plotting; sweeps
rerun deterministically because the solver is.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import audits
from . import config as cfgmod
from .records import RunRecord
from .scheme import run as run_sim


def _run(cfg: cfgmod.RunConfig, outdir: str | None) -> RunRecord:
    return run_sim(cfg, outdir=outdir)


def _snapshot_l1_diff(a: RunRecord, b: RunRecord) -> tuple[float, float]:
    """L1(Omega x (0,T)) distance between two runs with aligned
    snapshot times, by trapezoid over per-snapshot L1 distances."""
    ta = [r.t for r in a.snapshots]
    tb = [r.t for r in b.snapshots]
    if len(ta) != len(tb) or not np.allclose(ta, tb, rtol=0, atol=1e-12):
        raise ValueError("runs do not share snapshot times; use a fixed "
                         "dt policy and a common cadence")
    vol = a.grid.cell_volume
    du = np.zeros(len(ta))
    dv = np.zeros(len(ta))
    for i, (ra, rb) in enumerate(zip(a.snapshots, b.snapshots)):
        ua, va = a.snapshot(ra.index)
        ub, vb = b.snapshot(rb.index)
        du[i] = float(np.abs(ua - ub).sum()) * vol
        dv[i] = float(np.abs(va - vb).sum()) * vol
    t = np.asarray(ta)
    return (float(np.trapezoid(du, t)), float(np.trapezoid(dv, t)))


@dataclass
class EpsSweepReport:
    eps_values: tuple[float, ...]
    budgets: list[float]
    du_l1: list[float]            # consecutive pairs, len = n - 1
    dv_l1: list[float]
    runs: list[RunRecord] = field(default_factory=list, repr=False)

    def budgets_decreasing_toward_one(self) -> bool:
        seq = list(self.budgets)
        return all(x > y for x, y in zip(seq, seq[1:])) and \
            all(x >= 1.0 for x in seq)

    def differences_decreasing(self) -> bool:
        return all(x > y for x, y in zip(self.du_l1, self.du_l1[1:])) and \
            all(x > y for x, y in zip(self.dv_l1, self.dv_l1[1:]))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("eps,budget_final,du_l1_prev,dv_l1_prev\n")
            for i, e in enumerate(self.eps_values):
                du = repr(self.du_l1[i - 1]) if i > 0 else ""
                dv = repr(self.dv_l1[i - 1]) if i > 0 else ""
                fh.write(f"{e!r},{self.budgets[i]!r},{du},{dv}\n")


def eps_sweep(base: cfgmod.RunConfig, eps_values,
              outdir: str | None = None) -> EpsSweepReport:
    """Rerun one plan at each regularization strength on a shared grid."""
    eps_values = tuple(float(e) for e in eps_values)
    if len(eps_values) < 2:
        raise ValueError("sweep needs at least 2 eps values")
    if not all(x > y for x, y in zip(eps_values, eps_values[1:])):
        raise ValueError("eps values must be strictly decreasing")
    if base.dt_kind != "fixed":
        raise ValueError("sweep comparisons need a fixed dt policy")
    runs = []
    for e in eps_values:
        cfg = replace(base, eps=e, outdir=None)
        sub = os.path.join(outdir, f"eps_{e!r}") if outdir else None
        runs.append(_run(cfg, sub))
    budgets = [float(r.series.column("budget")[-1]) for r in runs]
    du, dv = [], []
    for a, b in zip(runs, runs[1:]):
        x, y = _snapshot_l1_diff(a, b)
        du.append(x)
        dv.append(y)
    rep = EpsSweepReport(eps_values=eps_values, budgets=budgets,
                         du_l1=du, dv_l1=dv, runs=runs)
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        rep.to_csv(os.path.join(outdir, "eps_sweep.csv"))
    return rep


def _restrict(fine: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Cell-average restriction onto a coarser dyadic grid."""
    if fine.ndim == 1:
        (nc,) = shape
        f = fine.shape[0] // nc
        return fine.reshape(nc, f).mean(axis=1)
    ncx, ncy = shape
    fx = fine.shape[0] // ncx
    fy = fine.shape[1] // ncy
    return fine.reshape(ncx, fx, ncy, fy).mean(axis=(1, 3))


@dataclass
class OrderReport:
    mode: str                     # "space" or "time"
    hs: list[float]
    dts: list[float]
    err_u: list[float]
    err_v: list[float]
    order_u: float
    order_v: float
    runs: list[RunRecord] = field(default_factory=list, repr=False)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("level,h,dt,err_u,err_v\n")
            for i in range(len(self.err_u)):
                fh.write(f"{i},{self.hs[i]!r},{self.dts[i]!r},"
                         f"{self.err_u[i]!r},{self.err_v[i]!r}\n")


def _fit_order(errors) -> float:
    """Least-squares slope of log2(error) against dyadic level; exact
    agreement everywhere reports inf."""
    errs = np.asarray(errors, dtype=np.float64)
    if (errs <= 0.0).all() or (errs < 1e-15 * max(errs.max(), 1.0)).all():
        return float("inf")
    lv = np.arange(len(errs), dtype=np.float64)
    good = errs > 0.0
    slope = np.polyfit(lv[good], np.log2(errs[good]), 1)[0]
    return float(-slope)


def refinement_study(base: cfgmod.RunConfig, levels: int = 3,
                     mode: str = "space",
                     outdir: str | None = None) -> OrderReport:
    """Self-convergence orders on a dyadic ladder, finest as reference.

    mode 'space' doubles the cell counts per level at fixed dt; mode
    'time' halves dt on a fixed grid.  Errors are final-time L1 field
    distances, coarse level against the restricted finest level.
    """
    if levels < 3:
        raise ValueError("refinement study needs at least 3 levels")
    if mode not in ("space", "time"):
        raise ValueError("mode must be 'space' or 'time'")
    if base.dt_kind != "fixed":
        raise ValueError("refinement comparisons need a fixed dt policy")
    runs = []
    hs, dts = [], []
    for lvl in range(levels):
        if mode == "space":
            cells = tuple(c * 2 ** lvl for c in base.cells)
            cfg = replace(base, cells=cells, outdir=None)
        else:
            cfg = replace(base, dt_value=base.dt_value / 2 ** lvl,
                          outdir=None)
        sub = os.path.join(outdir, f"{mode}_{lvl}") if outdir else None
        runs.append(_run(cfg, sub))
        g = runs[-1].grid
        hs.append(min(g.h))
        dts.append(cfg.dt_value)

    ref = runs[-1]
    uref, vref = ref.snapshot(ref.snapshots[-1].index)
    err_u, err_v = [], []
    for r in runs[:-1]:
        uc, vc = r.snapshot(r.snapshots[-1].index)
        if abs(r.snapshots[-1].t - ref.snapshots[-1].t) > 1e-10:
            raise ValueError("ladder members end at different times")
        ur = _restrict(uref, uc.shape) if mode == "space" else uref
        vr = _restrict(vref, vc.shape) if mode == "space" else vref
        vol = r.grid.cell_volume
        err_u.append(float(np.abs(uc - ur).sum()) * vol)
        err_v.append(float(np.abs(vc - vr).sum()) * vol)

    rep = OrderReport(mode=mode, hs=hs[:-1], dts=dts[:-1],
                      err_u=err_u, err_v=err_v,
                      order_u=_fit_order(err_u), order_v=_fit_order(err_v),
                      runs=runs)
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        rep.to_csv(os.path.join(outdir, f"orders_{mode}.csv"))
    return rep


@dataclass
class AlphaScanReport:
    rows: list[dict]
    runs: list[RunRecord] = field(default_factory=list, repr=False)

    def to_csv(self, path) -> None:
        cols = ["alpha", "p_flux", "plateau", "budget_final",
                "entropy_final"]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(cols) + "\n")
            for row in self.rows:
                fh.write(",".join(
                    repr(row[c]) if isinstance(row[c], float) else
                    str(row[c]) for c in cols) + "\n")


def alpha_scan(base: cfgmod.RunConfig,
               alphas=(0.25, 0.5, 0.75, 1.0, 1.5, 2.0),
               outdir: str | None = None) -> AlphaScanReport:
    """Identical data across the exponent range; tabulates the flux
    exponent in use and the time-uniformity verdicts (the plateau check
    only applies from alpha = 1 up; below it the row records skipped)."""
    alphas = tuple(float(a) for a in alphas)
    if any(a < 1.0 for a in alphas) and base.eps == 0.0:
        raise cfgmod.ConfigError("sublinear scan members need eps > 0")
    rows = []
    runs = []
    for a in alphas:
        cfg = replace(base, alpha=a, outdir=None)
        sub = os.path.join(outdir, f"alpha_{a!r}") if outdir else None
        rec = _run(cfg, sub)
        runs.append(rec)
        bounds = audits.audit_uniform_bounds(rec)
        if a < 1.0:
            plateau = "skipped"
        else:
            plateau = bounds.check("entropy-plateau").verdict
        rows.append({
            "alpha": a,
            "p_flux": float(rec.meta["p_flux"]),
            "plateau": plateau,
            "budget_final": float(rec.series.column("budget")[-1]),
            "entropy_final": float(rec.series.column("entropy")[-1]),
        })
    rep = AlphaScanReport(rows=rows, runs=runs)
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        rep.to_csv(os.path.join(outdir, "alpha_scan.csv"))
    return rep
