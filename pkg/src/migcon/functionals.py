"""Monitored functionals of a simulation state.

Cell quadratures use the midpoint rule; gradient quadratures sum over
interior faces with the dual-volume weight (one cell volume per face), which
is the discrete Dirichlet form matching the reflected-ghost Laplacian.
Motility weights on faces evaluate phi_eps at the arithmetic face mean of v;
negative powers of v use the harmonic face mean, which never exceeds either
neighbor and so keeps singular weights conservative.

Channel glossary (series.csv columns, in order):

  mass_u           integral of u
  mass_v           integral of v
  min_u, max_v, min_v
  entropy          integral of u ln u (0 where u = 0)
  fisher           4 * sum_faces phi_eps(v_face) |grad sqrt(u)|^2 * w
  cross_term       sum_faces phi'(v_face) grad u . grad v * w
  quasi_energy     entropy - a * integral of u phi_eps(v)   (alpha < 1 runs)
  duality          1/2 |grad psi|^2 with -L psi = u - mean(u0)
  u2_phieps        integral of u^2 phi_eps(v)
  u_phi            integral of u phi(v)        (unregularized weight)
  u_valpha         integral of u v^alpha
  u2_valpha        integral of u^2 v^alpha
  absorption_rate  integral of u v / (1 + eps u)
  absorption_cum   telescoped sink accumulator (from the stepper)
  budget           1 + eps t + accumulated integral of eps u^2 v/(1+eps u)
  grad_v_sq        integral of |grad v|^2
  lnv_inv          integral of ln(1/v)
  grad4_v2         integral of |grad v|^4 / v^2
  grad4_v3         integral of |grad v|^4 / v^3
  grad4_valpham4   integral of v^(alpha-4) |grad v|^4
  grad2_valpham2   integral of v^(alpha-2) |grad v|^2
  flux_p           integral of |grad(u phi_eps(v))|^p, p the run exponent
  flux_43          same with p = 4/3
  grad_uv2_l1      integral of |grad(u v^2)|
  laplacian_v_sq   integral of |L v|^2
  v_t_sq           integral of ((v - v_prev)/dt_record)^2, 0 at the start
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import motility as mot
from .grid import (Field, Grid, face_average, face_weight, gradient_faces,
                   integrate, laplacian_apply, norm_l1,
                   solve_neumann_poisson_zero_mean)


def log_entropy(grid: Grid, u: Field) -> float:
    """Integral of u ln u, extended by 0 where u vanishes."""
    vals = u.values
    if vals.min() < 0.0:
        raise ValueError("entropy needs nonnegative u")
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(vals > 0.0, vals * np.log(np.where(vals > 0, vals, 1.0)), 0.0)
    return float(x.sum()) * grid.cell_volume


def fisher_dissipation(grid: Grid, u: Field, v: Field,
                       reg: mot.RegularizedMotility) -> float:
    """4 * sum_faces phi_eps(v_face) |grad sqrt(u)|^2, dual-volume weights."""
    if u.values.min() < 0.0:
        raise ValueError("dissipation needs nonnegative u")
    s = np.sqrt(u.values)
    w = face_weight(grid)
    vf = face_average(grid, v, "arithmetic")
    total = 0.0
    for k in range(grid.dim):
        ds = np.diff(s, axis=k) / grid.h[k]
        total += float(np.sum(reg.phi(vf[k]) * ds * ds))
    return 4.0 * total * w


def cross_term(grid: Grid, u: Field, v: Field,
               reg: mot.RegularizedMotility) -> float:
    """sum_faces phi'(v_face) grad u . grad v, dual-volume weights."""
    w = face_weight(grid)
    vf = face_average(grid, v, "arithmetic")
    total = 0.0
    for k in range(grid.dim):
        du = np.diff(u.values, axis=k) / grid.h[k]
        dv = np.diff(v.values, axis=k) / grid.h[k]
        total += float(np.sum(reg.phi_prime(vf[k]) * du * dv))
    return total * w


def quasi_energy(grid: Grid, u: Field, v: Field,
                 reg: mot.RegularizedMotility, a: float | None = None) -> float:
    """entropy minus a * integral(u phi_eps(v)); a defaults to 1/alpha."""
    if a is None:
        a = 1.0 / reg.spec.alpha
    coupling = float(np.sum(u.values * reg.phi(v.values))) * grid.cell_volume
    return log_entropy(grid, u) - a * coupling


def duality_norm(grid: Grid, u: Field, ubar0: float,
                 tol: float = 1e-10) -> float:
    """1/2 integral |grad psi|^2 where -L psi = u - ubar0, mean-zero psi.

    ubar0 must equal the current mean of u to 1e-10 relative (the stepper
    conserves mass, so a mismatch means the caller passed the wrong anchor).
    """
    mean_u = integrate(grid, u) / grid.volume
    scale = max(abs(ubar0), norm_l1(grid, u) / grid.volume, 1e-300)
    if abs(mean_u - ubar0) > 1e-10 * scale:
        raise ValueError(f"mean of u ({mean_u!r}) does not match the "
                         f"conserved anchor ({ubar0!r})")
    dev = u.values - mean_u
    # homogeneous u leaves pure rounding noise; the dual norm is then 0
    floor = 64.0 * np.finfo(np.float64).eps * max(scale, float(np.abs(u.values).max(initial=0.0)))
    if float(np.abs(dev).max(initial=0.0)) <= floor:
        return 0.0
    # re-project: one subtraction leaves cancellation residue that the
    # solver's zero-mean gate would reject once the deviation is small
    dev = dev - dev.mean()
    rhs = Field(grid, dev)
    psi = solve_neumann_poisson_zero_mean(grid, rhs, tol=tol)
    g = gradient_faces(grid, psi)
    return 0.5 * sum(float(np.vdot(ax, ax)) for ax in g.axes) * face_weight(grid)


def weighted_gradient_integral(grid: Grid, v: Field, vpow: float,
                               gpow: float) -> float:
    """sum_faces v_face^vpow |grad v|^gpow with dual-volume weights.

    Harmonic face mean for vpow < 0, arithmetic otherwise.
    """
    if gpow not in (2.0, 4.0):
        raise ValueError("gpow must be 2 or 4")
    if v.values.min() <= 0.0:
        raise ValueError("weighted gradient integrals need positive v")
    mode = "harmonic" if vpow < 0 else "arithmetic"
    vf = face_average(grid, v, mode)
    w = face_weight(grid)
    total = 0.0
    for k in range(grid.dim):
        g = np.abs(np.diff(v.values, axis=k)) / grid.h[k]
        total += float(np.sum(np.power(vf[k], vpow) * np.power(g, gpow)))
    return total * w


def flux_norm(grid: Grid, u: Field, v: Field, reg: mot.RegularizedMotility,
              p: float) -> float:
    """integral of |grad(u phi_eps(v))|^p over interior faces."""
    if not (p >= 1.0):
        raise ValueError("p must be at least 1")
    prod = u.values * reg.phi(v.values)
    w = face_weight(grid)
    total = 0.0
    for k in range(grid.dim):
        g = np.abs(np.diff(prod, axis=k)) / grid.h[k]
        total += float(np.sum(np.power(g, p)))
    return total * w


def product_gradient_l1(grid: Grid, u: Field, v: Field) -> float:
    """integral of |grad(u v^2)| over interior faces."""
    prod = u.values * v.values ** 2
    w = face_weight(grid)
    total = 0.0
    for k in range(grid.dim):
        g = np.abs(np.diff(prod, axis=k)) / grid.h[k]
        total += float(np.sum(g))
    return total * w


def absorption_rate(grid: Grid, u: Field, v: Field, eps: float) -> float:
    """integral of u v / (1 + eps u)."""
    x = u.values * v.values / (1.0 + eps * u.values)
    return float(x.sum()) * grid.cell_volume


def budget_integrand(grid: Grid, u: Field, v: Field, eps: float) -> float:
    """integral of eps u^2 v / (1 + eps u)."""
    x = eps * u.values ** 2 * v.values / (1.0 + eps * u.values)
    return float(x.sum()) * grid.cell_volume


def budget_value(eps: float, t: float, accumulated: float) -> float:
    """1 + eps t + accumulated budget integral."""
    return 1.0 + eps * t + accumulated


def flux_exponent(alpha: float) -> float:
    """Run exponent for the flux channel: p(alpha) below 1, else 4/3."""
    return mot.p_exponent(alpha) if alpha < 1.0 else 4.0 / 3.0


@dataclass
class FunctionalSeries:
    """Timestamped channel table; every channel shares the time axis."""

    names: tuple[str, ...]
    times: list[float] = field(default_factory=list)
    rows: list[tuple[float, ...]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, t: float, values: dict[str, float]):
        if self.times and not t > self.times[-1]:
            raise ValueError("times must be strictly increasing")
        if tuple(values.keys()) != self.names:
            raise ValueError("channel set must not change between records")
        row = tuple(float(values[k]) for k in self.names)
        if not all(np.isfinite(row)):
            bad = self.names[[np.isfinite(x) for x in row].index(False)]
            raise ValueError(f"non-finite channel value in {bad!r} at t={t}")
        self.times.append(float(t))
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        idx = self.names.index(name)
        return np.array([r[idx] for r in self.rows])

    def times_array(self) -> np.ndarray:
        return np.array(self.times)

    def __len__(self) -> int:
        return len(self.times)


def channel_names(alpha: float) -> tuple[str, ...]:
    base = ["mass_u", "mass_v", "min_u", "max_v", "min_v", "entropy",
            "fisher", "cross_term"]
    if alpha < 1.0:
        base.append("quasi_energy")
    base += ["duality", "u2_phieps", "u_phi", "u_valpha", "u2_valpha",
             "absorption_rate", "absorption_cum", "budget", "grad_v_sq",
             "lnv_inv", "grad4_v2", "grad4_v3", "grad4_valpham4",
             "grad2_valpham2", "flux_p", "flux_43", "grad_uv2_l1",
             "laplacian_v_sq", "v_t_sq"]
    return tuple(base)


def evaluate_channels(grid: Grid, reg: mot.RegularizedMotility, t: float,
                      u: Field, v: Field, ubar0: float,
                      absorbed: float, budget_acc: float,
                      prev: tuple[float, Field] | None = None,
                      poisson_tol: float = 1e-10) -> dict[str, float]:
    """Evaluate every monitored channel at one recording instant."""
    alpha = reg.spec.alpha
    eps = reg.eps
    vol = grid.cell_volume
    uv, vv = u.values, v.values
    phi_v = reg.phi_raw(vv)

    out: dict[str, float] = {}
    out["mass_u"] = float(uv.sum()) * vol
    out["mass_v"] = float(vv.sum()) * vol
    out["min_u"] = float(uv.min())
    out["max_v"] = float(vv.max())
    out["min_v"] = float(vv.min())
    out["entropy"] = log_entropy(grid, u)
    out["fisher"] = fisher_dissipation(grid, u, v, reg)
    out["cross_term"] = cross_term(grid, u, v, reg)
    if alpha < 1.0:
        out["quasi_energy"] = quasi_energy(grid, u, v, reg)
    out["duality"] = duality_norm(grid, u, ubar0, tol=poisson_tol)
    out["u2_phieps"] = float(np.sum(uv ** 2 * (phi_v + eps))) * vol
    out["u_phi"] = float(np.sum(uv * phi_v)) * vol
    valpha = np.power(vv, alpha)
    out["u_valpha"] = float(np.sum(uv * valpha)) * vol
    out["u2_valpha"] = float(np.sum(uv ** 2 * valpha)) * vol
    out["absorption_rate"] = absorption_rate(grid, u, v, eps)
    out["absorption_cum"] = absorbed
    out["budget"] = budget_value(eps, t, budget_acc)
    out["grad_v_sq"] = weighted_gradient_integral(grid, v, 0.0, 2.0)
    out["lnv_inv"] = float(-np.sum(np.log(vv))) * vol
    out["grad4_v2"] = weighted_gradient_integral(grid, v, -2.0, 4.0)
    out["grad4_v3"] = weighted_gradient_integral(grid, v, -3.0, 4.0)
    out["grad4_valpham4"] = weighted_gradient_integral(grid, v, alpha - 4.0, 4.0)
    out["grad2_valpham2"] = weighted_gradient_integral(grid, v, alpha - 2.0, 2.0)
    out["flux_p"] = flux_norm(grid, u, v, reg, flux_exponent(alpha))
    out["flux_43"] = flux_norm(grid, u, v, reg, 4.0 / 3.0)
    out["grad_uv2_l1"] = product_gradient_l1(grid, u, v)
    lv = laplacian_apply(grid, v)
    out["laplacian_v_sq"] = float(np.vdot(lv.values, lv.values)) * vol
    if prev is None:
        out["v_t_sq"] = 0.0
    else:
        t_prev, v_prev = prev
        dv = (vv - v_prev.values) / (t - t_prev)
        out["v_t_sq"] = float(np.vdot(dv, dv)) * vol
    # canonical ordering
    names = channel_names(alpha)
    return {k: out[k] for k in names}
