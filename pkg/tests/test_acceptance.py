"""Acceptance suite: one test per contract criterion.

Each test prints one PASS/FAIL line naming the criterion, with the
measured quantity and its pinned tolerance, then asserts it.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from migcon import runio
from migcon.audits import (
    audit_hessian_identity,
    audit_identity_duality,
    audit_identity_entropy,
    audit_quasi_energy,
    audit_uniform_bounds,
    audit_weak_solution,
    cosine_window_test,
)
from migcon.config import parse_text
from migcon.grid import Field, Grid, integrate
from migcon.harness import eps_sweep, refinement_study
from migcon.motility import MotilitySpec, verify_small_xi_bound
from migcon.scheme import DtPolicy, SimParams, advance, initial_state, run

from .conftest import cfg_text, rng


def _verdict(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def random_suite():
    """Random nonnegative initial data, 10^3 steps, 1D N = 256; tracks
    the mass and max-v trajectories step by step."""
    t0 = time.perf_counter()
    out = []
    for seed in (0, 1):
        grid = Grid(lengths=(1.0,), cells=(256,))
        gen = rng(seed)
        u0 = gen.random(256)
        u0[gen.random(256) < 0.15] = 0.0        # degenerate patches
        v0 = 0.5 + gen.random(256)
        params = SimParams(motility=MotilitySpec.prototype(1.0),
                           eps=1e-2, dt=DtPolicy("fixed", 1e-3),
                           t_end=1.0)
        state = initial_state(grid, Field(grid, u0), Field(grid, v0))
        mass = [integrate(grid, state.u)]
        maxv = [float(state.v.values.max())]
        for _ in range(1000):
            state = advance(grid, params, state, 1e-3)
            mass.append(integrate(grid, state.u))
            maxv.append(float(state.v.values.max()))
        out.append((np.array(mass), np.array(maxv), state))
    return out, time.perf_counter() - t0


def test_01_mass_conservation(random_suite):
    suites, wall = random_suite
    worst = 0.0
    for mass, _, _ in suites:
        drift = np.abs(mass - mass[0]).max() / mass[0]
        worst = max(worst, drift)
    ok = worst <= 1e-10 and wall < 10.0
    _verdict("mass conservation",
             ok, f"max relative drift {worst:.3e} <= 1e-10 over 10^3 "
                 f"steps, N=256, two seeds; wall {wall:.1f} s < 10 s")


def test_02_max_principle(random_suite):
    suites, _ = random_suite
    worst = -np.inf
    for _, maxv, _ in suites:
        worst = max(worst, float(np.diff(maxv).max()))
    ok = worst <= 1e-12
    _verdict("max principle",
             ok, f"largest step-to-step rise of max v is {worst:.3e} "
                 f"<= 1e-12 slack")


def test_03_absorption_budget(tmp_path_factory):
    base = tmp_path_factory.mktemp("absorb")
    gen = rng(7)
    u0 = gen.random(64)
    u0[::9] = 0.0
    v0 = 0.5 + gen.random(64)
    path = str(base / "init.fld")
    runio.write_fld(path, u0, v0)
    cfg = parse_text(cfg_text(
        init__kind="file", init__file=path, dt__value="5e-3",
        t_end="10.0", record__every="100", snapshots__every="2000"))
    rec = run(cfg)
    absorbed = rec.series.column("absorption_cum")
    massv0 = float(rec.series.column("mass_v")[0])
    bound = massv0 * (1.0 + 1e-8)
    worst = float(absorbed.max())
    ok = worst <= bound
    _verdict("absorption budget",
             ok, f"accumulated absorption {worst:.12f} <= "
                 f"{bound:.12f} (= mass_v0 * (1+1e-8)) over T=10")


def test_04_homogeneous_exact_solution():
    cfg = parse_text(cfg_text(
        init__kind="homogeneous", init__u="1.0", init__v="1.0",
        eps="0.1", grid__cells="8", dt__value="1e-4", t_end="1.0",
        record__every="1000"))
    rec = run(cfg)
    uT, vT = rec.snapshot(rec.snapshots[-1].index)
    want = np.exp(-1.0 / 1.1)
    err = float(np.abs(vT - want).max()) / want
    ok = err <= 1e-5
    _verdict("homogeneous exact solution",
             ok, f"relative error {err:.3e} <= 1e-5 against "
                 f"exp(-t/1.1) at t=1, dt=1e-4")


@pytest.fixture(scope="module")
def dt_ladder():
    t0 = time.perf_counter()
    runs = [run(parse_text(cfg_text(dt__value=repr(dt))))
            for dt in (1e-3, 5e-4, 2.5e-4)]
    return runs, time.perf_counter() - t0


def test_05_duality_identity_order(dt_ladder):
    runs, wall = dt_ladder
    chk = audit_identity_duality(runs).check("residual-order")
    slopes = chk.measured["slopes"]
    ok = chk.verdict == "order-confirmed" and wall < 60.0
    _verdict("duality identity residual order",
             ok, f"L1 decay orders {[f'{s:.2f}' for s in slopes]} "
                 f">= 0.8 across dt halvings; wall {wall:.1f} s < 60 s")


def test_06_entropy_identity_order(dt_ladder):
    runs, wall = dt_ladder
    chk = audit_identity_entropy(runs).check("residual-order")
    slopes = chk.measured["slopes"]
    ok = chk.verdict == "order-confirmed" and wall < 60.0
    _verdict("entropy identity residual order",
             ok, f"L1 decay orders {[f'{s:.2f}' for s in slopes]} "
                 f">= 0.8 across dt halvings; wall {wall:.1f} s < 60 s")


def test_07_small_xi_bound_verifier():
    sups = {}
    for alpha in (0.25, 0.5, 0.75):
        spec = MotilitySpec.prototype(alpha)
        rep = verify_small_xi_bound(spec, xi_star=1.0)
        stable = rep.stable and not rep.divergent and \
            np.isfinite(rep.c_emp)
        neg = verify_small_xi_bound(spec, xi_star=1.0,
                                    a=1.0 / alpha + 10.0)
        sups[alpha] = (stable, rep.c_emp, neg.divergent)
    ok = all(s and d for s, _, d in sups.values())
    detail = "; ".join(
        f"alpha={a}: sup {c:.4f} stable under two refinements, "
        f"a+10 divergent={d}" for a, (s, c, d) in sups.items())
    _verdict("small-argument bound verifier", ok, detail)


def test_08_hessian_identity_order():
    grid = Grid(lengths=(1.0,), cells=(16,))
    rep = audit_hessian_identity(lambda x: 2.0 + np.cos(np.pi * x),
                                 grid, 1.5, levels=4)
    chk = rep.check("identity-order")
    slopes = chk.measured["slopes"]
    ok = chk.verdict == "order-confirmed"
    _verdict("weighted-Hessian identity order",
             ok, f"residual refinement slopes "
                 f"{[f'{s:.2f}' for s in slopes]} >= 0.8 for "
                 f"2 + cos(pi x), exponent 1.5")


def test_09_quasi_energy_inequality_2d():
    t0 = time.perf_counter()
    cfg = parse_text(cfg_text(
        grid__dim="2", grid__lengths="1.0, 1.0", grid__cells="64, 64",
        motility__alpha="0.5", eps="1e-3", dt__value="2e-3",
        t_end="2.0", record__every="25", snapshots__every="500"))
    rec = run(cfg)
    chk = audit_quasi_energy(rec, margin=0.10).check("inequality")
    wall = time.perf_counter() - t0
    ok = chk.verdict == "pass" and wall < 300.0
    _verdict("quasi-energy inequality",
             ok, f"holds at 10% margin (needed "
                 f"{chk.measured['margin_needed']:.3f}) for alpha=0.5, "
                 f"eps=1e-3, 2D 64x64, T=2; wall {wall:.0f} s < 300 s")


def test_10_uniform_bound_contrast():
    long_cfg = dict(dt__value="5e-3", t_end="40.0",
                    record__every="100", snapshots__every="4000")
    rec = run(parse_text(cfg_text(motility__alpha="1.5", **long_cfg)))
    rep = audit_uniform_bounds(rec)
    plateau = rep.check("entropy-plateau")
    budget = rep.check("budget-bound")
    rec_sub = run(parse_text(cfg_text(motility__alpha="0.5", **long_cfg)))
    sub = audit_uniform_bounds(rec_sub).check("all")
    ok = plateau.verdict == "pass" and budget.verdict == "pass" \
        and sub.verdict == "skipped"
    _verdict("uniform-bound contrast",
             ok, f"alpha=1.5: entropy running max grows "
                 f"{plateau.measured['growth']:.2e} < 5% from [T/4,T/2] "
                 f"to (T/2,T] at T=40 and the budget stays in bound; "
                 f"alpha=0.5: plateau not asserted (skipped)")


def test_11_eps_sweep_cauchy():
    base = parse_text(cfg_text(snapshots__every="20"))
    rep = eps_sweep(base, (1e-2, 1e-3, 1e-4))
    ok = rep.budgets_decreasing_toward_one() \
        and rep.differences_decreasing()
    _verdict("regularization sweep",
             ok, f"budgets {[f'{b:.6f}' for b in rep.budgets]} strictly "
                 f"decreasing toward 1 and pairwise L1 distances "
                 f"{[f'{d:.2e}' for d in rep.du_l1]} decreasing")


def test_12_weak_form_residual_order():
    test_fn = cosine_window_test(0.2, (1.0,))
    runs = []
    for n, dt in ((32, 2e-3), (64, 1e-3), (128, 5e-4)):
        cfg = parse_text(cfg_text(
            grid__cells=str(n), dt__value=repr(dt),
            motility__alpha="1.5", eps="0.0", init__u_center="0.3",
            record__every="50", snapshots__every="5"))
        runs.append(run(cfg))
    rep = audit_weak_solution(runs, test_fn)
    wu = rep.check("wu-residual-order")
    wv = rep.check("wv-residual-order")
    ok = wu.verdict == "order-confirmed" and \
        wv.verdict == "order-confirmed"
    _verdict("weak-form residual order",
             ok, f"wu slopes {[f'{s:.2f}' for s in wu.measured['slopes']]}"
                 f", wv slopes "
                 f"{[f'{s:.2f}' for s in wv.measured['slopes']]} >= 0.8 "
                 f"under joint (h, dt) refinement, fixed test function")


def test_13_self_convergence_heat_case():
    heat = parse_text(cfg_text(
        init__kind="cosine", init__u="0.0", init__v_base="1.0",
        init__v_amp="0.25", grid__cells="32", t_end="0.1",
        record__every="20", snapshots__every="20"))
    space = refinement_study(heat, levels=3, mode="space")
    tme = refinement_study(heat, levels=3, mode="time")
    ok = space.order_v >= 1.9 and tme.order_v >= 0.9
    _verdict("self-convergence on the heat sub-case",
             ok, f"observed orders: {space.order_v:.2f} in h (>= 1.9), "
                 f"{tme.order_v:.2f} in dt (>= 0.9)")
