"""Motility laws: evaluation, hypothesis validation, small-signal bound."""

from __future__ import annotations

import numpy as np
import pytest
import sympy as sp

from migcon.motility import (FORMS, MotilitySpec, RegularizedMotility,
                             eval_phi, eval_phi_prime, eval_phi_second,
                             make_motility, p_exponent, validate_hypotheses,
                             verify_small_xi_bound)


def test_prototype_derivatives_match_sympy():
    xi_s, a_s = sp.symbols("xi alpha", positive=True)
    phi_s = xi_s ** a_s
    xi = np.array([0.2, 0.7, 1.0])
    for alpha in (0.25, 1.0, 1.5):
        spec = MotilitySpec.prototype(alpha)
        subs = lambda e, x: float(e.subs({a_s: alpha, xi_s: x}))
        for x in xi:
            assert eval_phi(spec, x) == pytest.approx(subs(phi_s, x), rel=1e-12)
            assert eval_phi_prime(spec, x) == pytest.approx(
                subs(sp.diff(phi_s, xi_s), x), rel=1e-12)
            assert eval_phi_second(spec, x) == pytest.approx(
                subs(sp.diff(phi_s, xi_s, 2), x), rel=1e-12)


def test_eval_array_and_scalar():
    spec = MotilitySpec.prototype(0.5)
    xi = np.array([0.25, 1.0, 4.0])
    assert np.allclose(eval_phi(spec, xi), np.sqrt(xi))
    assert isinstance(eval_phi(spec, 0.25), float)


def test_spec_validation():
    with pytest.raises(ValueError):
        MotilitySpec.prototype(0.0)
    with pytest.raises(ValueError):
        MotilitySpec.prototype(1.0, xi0=0.0)


def test_regularized_offsets():
    spec = MotilitySpec.prototype(1.0)
    reg = RegularizedMotility(spec, eps=0.25)
    assert reg.phi(0.0) == pytest.approx(0.25)
    assert reg.phi_raw(0.0) == 0.0
    assert reg.phi_prime(2.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        RegularizedMotility(spec, eps=-0.1)


def test_prototype_hypotheses_pass():
    for alpha in (0.25, 0.5, 1.0, 1.5, 2.0):
        rep = validate_hypotheses(MotilitySpec.prototype(alpha))
        assert rep.all_pass, rep.failed()
        # xi phi'/phi = alpha exactly for the power law
        assert rep.upper_slope_sup == pytest.approx(alpha, rel=1e-12)
        assert rep.lower_ratio_min == pytest.approx(1.0, rel=1e-12)


def test_root_concavity_window_sympy_oracle():
    # phi = sqrt(xi) - xi^2 at alpha = 1/2: phi^(1/alpha) = phi^2 stops
    # being concave where (phi^2)'' changes sign
    xi_s = sp.symbols("xi", positive=True)
    phi_s = sp.sqrt(xi_s) - xi_s ** 2
    second = sp.diff(phi_s ** 2, xi_s, 2)
    roots = sp.solve(sp.Eq(second, 0), xi_s)
    window = min(float(r) for r in roots if float(r) > 0)
    assert window == pytest.approx(float((sp.Rational(75, 120)) ** sp.Rational(2, 3)))

    inside = make_motility("sqrt-minus-square", alpha=0.5, xi0=0.9 * window)
    assert validate_hypotheses(inside).checks["root-concave"].verdict == "pass"

    outside = make_motility("sqrt-minus-square", alpha=0.5, xi0=0.9)
    rep = validate_hypotheses(outside)
    chk = rep.checks["root-concave"]
    assert chk.verdict == "fail"
    assert chk.witness_xi > window
    assert not rep.all_pass


def test_sqrt_minus_square_pins_alpha():
    with pytest.raises(ValueError):
        make_motility("sqrt-minus-square", alpha=1.0, xi0=0.5)
    with pytest.raises(ValueError):
        make_motility("fancy", alpha=0.5, xi0=0.5)
    assert set(FORMS) == {"prototype", "sqrt-minus-square"}


def test_positivity_failure_witness():
    # phi = xi - xi^2 turns negative past xi = 1
    spec = MotilitySpec.custom(lambda x: x - x ** 2, lambda x: 1 - 2 * x,
                               alpha=1.0, xi0=1.5)
    rep = validate_hypotheses(spec)
    chk = rep.checks["positivity"]
    assert chk.verdict == "fail"
    assert eval_phi(spec, chk.witness_xi) <= 0.0


def small_xi_sup_oracle(alpha, a, eps, xi_hi, n=200001):
    # dense-grid evaluation of xi * (the quadratic small-signal expression)
    xi = np.geomspace(1e-12, xi_hi, n)
    pe = xi ** alpha + eps
    pp = alpha * xi ** (alpha - 1.0)
    ps = alpha * (alpha - 1.0) * xi ** (alpha - 2.0)
    lhs = ((a * pe * pp + (a - 1.0) * pp) ** 2 / (2.0 * pe)
           + a * pp ** 2 + a * ps)
    return float(np.max(xi * lhs))


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_small_xi_bound_stable(alpha):
    spec = MotilitySpec.prototype(alpha)
    rep = verify_small_xi_bound(spec, xi_star=1.0)
    assert rep.stable and not rep.divergent
    oracle = max(small_xi_sup_oracle(alpha, 1.0 / alpha, e, 1.0)
                 for e in rep.eps_values)
    assert rep.c_emp == pytest.approx(oracle, rel=1e-2)


def test_small_xi_bound_divergent_control():
    for alpha in (0.25, 0.5, 0.75):
        spec = MotilitySpec.prototype(alpha)
        rep = verify_small_xi_bound(spec, xi_star=1.0, a=1.0 / alpha + 10.0)
        assert rep.divergent and not rep.stable


def test_small_xi_bound_rejects_alpha_ge_1():
    with pytest.raises(ValueError):
        verify_small_xi_bound(MotilitySpec.prototype(1.0), xi_star=1.0)


def test_small_xi_sup_monotone_under_refinement():
    spec = MotilitySpec.prototype(0.5)
    rep = verify_small_xi_bound(spec, xi_star=1.0)
    for eps, sups in rep.sup_per_level.items():
        assert all(b >= a - 1e-12 * abs(a) for a, b in zip(sups, sups[1:]))


def test_p_exponent():
    assert p_exponent(0.25) == pytest.approx(8.0 / 7.0)
    assert p_exponent(0.5) == pytest.approx(4.0 / 3.0)
    assert p_exponent(0.75) == pytest.approx(4.0 / 3.0)
    with pytest.raises(ValueError):
        p_exponent(1.0)
