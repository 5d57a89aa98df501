"""Semi-implicit time stepping for the migration-consumption system

    u_t = L(u phi_eps(v)),        v_t = L v - u v / (1 + eps u),

with no-flux boundaries (L the reflected-ghost Laplacian).  One step:

  1. u half, backward Euler in the product variable w = u phi_eps(v^n):
     solve (diag(1/D) - dt L) w = u^n with D = phi_eps(v^n), then
     u^{n+1} = w / D.  The system is SPD, the matrix is an M-matrix, the
     row structure conserves mass exactly and keeps u nonnegative.
  2. v half with the consumption handled by an exact integrating factor:
     v* = v^n exp(-dt r), r = u^{n+1}/(1 + eps u^{n+1}), then the implicit
     heat solve (I - dt L) v^{n+1} = v*.  The factor is <= 1 and the heat
     matrix is an M-matrix with unit row sums, so v stays positive and its
     maximum never increases; for spatially constant states the consumption
     is integrated exactly, not just to first order.

Floating-point hygiene: the iterative solves leave noise at the residual
tolerance, so after each u step entries below zero are clipped and the field
is rescaled to the exact initial mass (the factor differs from 1 by about
1e-15; corrections beyond 1e-8 relative raise SolverFailure instead of
papering over a broken solve).  The v step is clipped into
[32 eps_mach max(v*), max(v*)] under the same guard, which makes positivity
and the discrete maximum principle hold bitwise rather than to tolerance.

Accumulators: the absorbed mass is measured as integral(v^n) -
integral(v^{n+1}), which telescopes exactly to the initial-minus-final v
mass (the heat half conserves the integral); the budget accumulator uses the
right-endpoint rule matching the scheme's backward-Euler flavor.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import functionals as fn
from .grid import Field, Grid, SolverFailure, integrate, solve_spd
from .motility import MotilitySpec, RegularizedMotility
from .records import RunRecord, SnapshotRef

_EPS_MACH = float(np.finfo(np.float64).eps)
SOLVE_TOL = 1e-11
HYGIENE_LIMIT = 1e-8


@dataclass(frozen=True)
class DtPolicy:
    """Fixed step or the parabolic-scale adaptive rule
    dt = min(cap, cfl * min(h)^2 / max(phi_eps(v)))."""

    kind: str = "fixed"
    value: float = 1e-3
    cap: float = 1e-2
    cfl: float = 2.0

    def __post_init__(self):
        if self.kind not in ("fixed", "adaptive"):
            raise ValueError("dt policy must be 'fixed' or 'adaptive'")
        if self.kind == "fixed" and not (self.value > 0.0):
            raise ValueError("fixed dt must be positive")
        if self.kind == "adaptive" and not (self.cap > 0.0 and self.cfl > 0.0):
            raise ValueError("adaptive dt needs positive cap and cfl")


@dataclass(frozen=True)
class SimParams:
    motility: MotilitySpec
    eps: float
    dt: DtPolicy
    t_end: float
    record_every: int = 1
    snap_every: int | None = None   # None: same cadence as records

    def __post_init__(self):
        if not (0.0 <= self.eps <= 1.0):
            raise ValueError("eps must lie in [0, 1]")
        if self.eps == 0.0 and self.motility.alpha < 1.0:
            raise ValueError("eps = 0 requires alpha >= 1; the sublinear "
                             "family loses its diffusion floor at eps = 0")
        if not (self.t_end >= 0.0):
            raise ValueError("t_end must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        if self.snap_every is not None and self.snap_every < 1:
            raise ValueError("snap_every must be at least 1")

    def regularized(self) -> RegularizedMotility:
        return RegularizedMotility(self.motility, self.eps)


@dataclass(frozen=True)
class SimState:
    t: float
    u: Field
    v: Field
    step: int = 0
    absorbed: float = 0.0
    budget_acc: float = 0.0
    mass0: float = 0.0


def initial_state(grid: Grid, u0: Field, v0: Field) -> SimState:
    """Validate and wrap initial data.

    u0 must be nonnegative (an identically zero u is allowed and freezes
    the u equation: the pure-diffusion sub-case).  v0 must stay above
    1e-14: the consumption weights divide by powers of v.
    """
    if u0.values.min() < 0.0:
        raise ValueError("u0 has negative entries")
    if v0.values.min() < 1e-14:
        raise ValueError("v0 entries below 1e-14 are rejected")
    return SimState(t=0.0, u=u0, v=v0, mass0=integrate(grid, u0))


def step_u(grid: Grid, u: Field, v: Field, reg: RegularizedMotility,
           dt: float, mass0: float | None = None,
           tol: float = SOLVE_TOL) -> Field:
    """Backward-Euler migration step; exact mass, nonnegative result."""
    d = reg.phi(v.values)
    dmin = float(d.min())
    if not (dmin > 0.0):
        raise ValueError("phi_eps(v) must be strictly positive; got "
                         f"min {dmin}")
    if mass0 is None:
        mass0 = integrate(grid, u)
    diag = Field(grid, 1.0 / d)
    w = solve_spd(grid, diag, dt, u, tol=tol, x0=u.values * d)
    raw = w.values / d

    neg = raw < 0.0
    clipped = float(-(raw[neg].sum())) * grid.cell_volume if neg.any() else 0.0
    scale = max(abs(mass0), 1e-300)
    if clipped > HYGIENE_LIMIT * scale:
        raise SolverFailure(
            f"u step produced negative mass {clipped:.3e} beyond noise "
            f"scale; solver output is not trustworthy")
    if neg.any():
        raw = np.where(neg, 0.0, raw)
    m = float(raw.sum()) * grid.cell_volume
    if m > 0.0 and mass0 > 0.0:
        raw = raw * (mass0 / m)
    return Field(grid, raw)


def step_v(grid: Grid, v: Field, u_new: Field, eps: float, dt: float,
           tol: float = SOLVE_TOL) -> Field:
    """Consumption by exact integrating factor, then implicit heat step."""
    r = u_new.values / (1.0 + eps * u_new.values)
    vstar = v.values * np.exp(-dt * r)
    ones = Field(grid, np.ones(grid.shape))
    vnew = solve_spd(grid, ones, dt, Field(grid, vstar), tol=tol,
                     x0=vstar).values

    vmax = float(vstar.max())
    floor = 32.0 * _EPS_MACH * vmax
    out_of_band = np.abs(np.clip(vnew, floor, vmax) - vnew)
    worst = float(out_of_band.max()) if vnew.size else 0.0
    if worst > HYGIENE_LIMIT * max(vmax, 1e-300):
        raise SolverFailure(
            f"v step left the [0, max] band by {worst:.3e}; solver output "
            f"is not trustworthy")
    return Field(grid, np.clip(vnew, floor, vmax))


def advance(grid: Grid, params: SimParams, state: SimState,
            dt: float) -> SimState:
    """One full step: u half, v half, accumulator updates."""
    if not (dt > 0.0):
        raise ValueError("dt must be positive")
    reg = params.regularized()
    u1 = step_u(grid, state.u, state.v, reg, dt, mass0=state.mass0)
    v1 = step_v(grid, state.v, u1, params.eps, dt)
    absorbed_inc = integrate(grid, state.v) - integrate(grid, v1)
    budget_inc = dt * fn.budget_integrand(grid, u1, v1, params.eps)
    return SimState(t=state.t + dt, u=u1, v=v1, step=state.step + 1,
                    absorbed=state.absorbed + absorbed_inc,
                    budget_acc=state.budget_acc + budget_inc,
                    mass0=state.mass0)


def select_dt(grid: Grid, params: SimParams, state: SimState) -> float:
    if params.dt.kind == "fixed":
        return params.dt.value
    reg = params.regularized()
    dmax = float(reg.phi(state.v.values).max())
    hmin = min(grid.h)
    return min(params.dt.cap, params.dt.cfl * hmin * hmin / dmax)


class _MemorySnapshots:
    def __init__(self):
        self.data: list[tuple[np.ndarray, np.ndarray]] = []

    def add(self, u: np.ndarray, v: np.ndarray):
        self.data.append((u.copy(), v.copy()))

    def __call__(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        u, v = self.data[index]
        return u, v


def run(config, outdir=None) -> RunRecord:
    """Execute a configured simulation; see migcon.config for the format.

    With outdir set, the run directory (config.echo, series.csv,
    snapshots/, meta.txt) is written, including the partial state when a
    step fails; the SolverFailure is re-raised after flushing.
    """
    from . import config as cfgmod
    from . import runio

    grid = cfgmod.build_grid(config)
    params = cfgmod.build_params(config)
    u0, v0 = cfgmod.build_initial(config, grid)
    state = initial_state(grid, u0, v0)
    reg = params.regularized()
    ubar0 = state.mass0 / grid.volume

    names = fn.channel_names(params.motility.alpha)
    series = fn.FunctionalSeries(names=names, meta={
        "alpha": params.motility.alpha, "eps": params.eps,
        "ubar0": ubar0, "p_flux": fn.flux_exponent(params.motility.alpha),
    })
    snaps: list[SnapshotRef] = []
    writer = None
    store = None
    if outdir is not None:
        writer = runio.RunDirWriter(outdir, config)
    else:
        store = _MemorySnapshots()

    snap_every = params.snap_every or params.record_every
    prev_rec: tuple[float, Field] | None = None
    wall0 = time.perf_counter()

    def record(st: SimState):
        nonlocal prev_rec
        vals = fn.evaluate_channels(grid, reg, st.t, st.u, st.v, ubar0,
                                    st.absorbed, st.budget_acc,
                                    prev=prev_rec)
        series.append(st.t, vals)
        prev_rec = (st.t, st.v)

    def snapshot(st: SimState):
        ref = SnapshotRef(index=len(snaps), step=st.step, t=st.t)
        if writer is not None:
            writer.add_snapshot(ref, st.u.values, st.v.values)
        else:
            store.add(st.u.values, st.v.values)
        snaps.append(ref)

    complete = False
    failure: SolverFailure | None = None
    try:
        record(state)
        snapshot(state)
        t_end = params.t_end
        while state.t < t_end - 1e-12 * max(t_end, 1.0):
            dt = min(select_dt(grid, params, state), t_end - state.t)
            state = advance(grid, params, state, dt)
            if state.step % params.record_every == 0 or state.t >= t_end:
                record(state)
            if state.step % snap_every == 0 or state.t >= t_end:
                snapshot(state)
        complete = True
    except SolverFailure as exc:
        failure = exc

    meta = {
        "alpha": params.motility.alpha, "eps": params.eps, "ubar0": ubar0,
        "p_flux": fn.flux_exponent(params.motility.alpha),
        "complete": complete, "steps": state.step, "final_t": state.t,
        "wall_s": time.perf_counter() - wall0,
        "threads": getattr(config, "threads", 1),
    }
    if writer is not None:
        loader = writer.finalize(series, meta)
    else:
        loader = store
    record_obj = RunRecord(grid=grid, series=series, snapshots=snaps,
                           loader=loader, complete=complete, meta=meta,
                           config_text=cfgmod.to_text(config))
    if failure is not None:
        failure.partial_record = record_obj
        raise failure
    return record_obj
