"""Motility laws phi(xi) and their structural hypothesis checks.

The prototype family is phi(xi) = xi^alpha with alpha > 0; custom laws are
given by callables for phi and phi' (phi'' optional, finite differences
otherwise).  The regularized family used by the solver is
phi_eps = phi + eps, which lifts the degeneracy at xi = 0 while leaving all
derivatives untouched.

Hypotheses validated on the dyadic sample set xi0 * 2^-j, j = 0..40:

  positivity   phi(0) = 0, phi > 0 on the sampled range, finite values
  lower-power  liminf of phi(xi)/xi^alpha positive as xi -> 0
  upper-slope  limsup of |phi'(xi)|/xi^(alpha-1) finite as xi -> 0
  root-concave (phi^(1/alpha))'' <= 0 on (0, xi0)

Limit statements cannot be decided from finitely many samples, so the two
ratio checks report 'inconclusive' when the tail of the sample set still
drifts monotonically; the concavity check widens its tolerance by the
rounding noise a second difference amplifies (delta^-2 scale).

verify_small_xi_bound is the empirical verifier for the structural
inequality behind the quasi-energy estimate: with a = 1/alpha it evaluates

  xi * [ (a phi_eps phi' + (a-1) phi')^2 / (2 phi_eps) + a phi'^2 + a phi'' ]

on a geometric grid reaching toward xi = 0 and reports the supremum C_emp,
whether it stabilizes as the grid extends to smaller xi, and the sampled
window on which the companion quadratic bracket stays nonpositive.  A wrong
weight a makes the score blow up like xi^(alpha-1), which the decade trend
flags as divergent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

_EPS_MACH = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class MotilitySpec:
    """A motility law: prototype exponent form or custom callables."""

    alpha: float
    xi0: float = 1.0
    form: str = "prototype"
    phi_fn: Callable | None = None
    phi_prime_fn: Callable | None = None
    phi_second_fn: Callable | None = None

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise ValueError("alpha must be positive")
        if not (self.xi0 > 0.0):
            raise ValueError("xi0 must be positive")
        if self.form != "prototype":
            if self.phi_fn is None or self.phi_prime_fn is None:
                raise ValueError("custom motility needs phi and phi' callables")

    @classmethod
    def prototype(cls, alpha: float, xi0: float = 1.0) -> "MotilitySpec":
        return cls(alpha=alpha, xi0=xi0, form="prototype")

    @classmethod
    def custom(cls, phi, phi_prime, alpha: float, xi0: float = 1.0,
               phi_second=None, form: str = "custom") -> "MotilitySpec":
        return cls(alpha=alpha, xi0=xi0, form=form, phi_fn=phi,
                   phi_prime_fn=phi_prime, phi_second_fn=phi_second)


def _as_array(xi):
    arr = np.asarray(xi, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ValueError("motility arguments must be nonnegative")
    return arr


def _scalar_like(xi, arr):
    if np.isscalar(xi) or getattr(xi, "ndim", 1) == 0:
        return float(arr)
    return arr


def eval_phi(spec: MotilitySpec, xi):
    arr = _as_array(xi)
    if spec.form == "prototype":
        out = np.power(arr, spec.alpha)
    else:
        out = np.asarray(spec.phi_fn(arr), dtype=np.float64)
    return _scalar_like(xi, out)


def eval_phi_prime(spec: MotilitySpec, xi):
    arr = _as_array(xi)
    if spec.form == "prototype":
        with np.errstate(divide="ignore"):
            out = spec.alpha * np.power(arr, spec.alpha - 1.0)
    else:
        out = np.asarray(spec.phi_prime_fn(arr), dtype=np.float64)
    return _scalar_like(xi, out)


def eval_phi_second(spec: MotilitySpec, xi):
    """Second derivative; analytic for the prototype, callable or central
    difference (step 1e-6 * xi) for custom laws.  Validator-only path."""
    arr = _as_array(xi)
    if spec.form == "prototype":
        with np.errstate(divide="ignore"):
            out = spec.alpha * (spec.alpha - 1.0) * np.power(arr, spec.alpha - 2.0)
    elif spec.phi_second_fn is not None:
        out = np.asarray(spec.phi_second_fn(arr), dtype=np.float64)
    else:
        delta = 1e-6 * np.where(arr > 0, arr, 1.0)
        up = np.asarray(spec.phi_prime_fn(arr + delta), dtype=np.float64)
        dn = np.asarray(spec.phi_prime_fn(np.maximum(arr - delta, 0.0)),
                        dtype=np.float64)
        out = (up - dn) / (2.0 * delta)
    return _scalar_like(xi, out)


@dataclass(frozen=True)
class RegularizedMotility:
    """phi_eps = phi + eps; derivatives coincide with phi's."""

    spec: MotilitySpec
    eps: float

    def __post_init__(self):
        if not (0.0 <= self.eps <= 1.0):
            raise ValueError("eps must lie in [0, 1]")

    def phi(self, xi):
        return eval_phi(self.spec, xi) + self.eps

    def phi_raw(self, xi):
        return eval_phi(self.spec, xi)

    def phi_prime(self, xi):
        return eval_phi_prime(self.spec, xi)

    def phi_second(self, xi):
        return eval_phi_second(self.spec, xi)


def p_exponent(alpha: float) -> float:
    """Flux integrability exponent for sublinear alpha."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("p_exponent is defined for alpha in (0, 1)")
    if alpha < 0.5:
        return 2.0 / (2.0 - alpha)
    return 4.0 / 3.0


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    verdict: str                      # pass | fail | inconclusive
    witness_xi: float | None = None
    witness_value: float | None = None
    note: str = ""


@dataclass(frozen=True)
class HypothesisReport:
    spec: MotilitySpec
    checks: dict[str, HypothesisCheck]
    samples: np.ndarray
    lower_ratio_min: float
    upper_slope_sup: float

    @property
    def all_pass(self) -> bool:
        return all(c.verdict == "pass" for c in self.checks.values())

    @property
    def failed(self) -> list[HypothesisCheck]:
        return [c for c in self.checks.values() if c.verdict == "fail"]


def _tail_monotone(values: np.ndarray, direction: str, count: int = 8) -> bool:
    """True when the last `count` entries move strictly in `direction`."""
    tail = values[-count:]
    if len(tail) < count:
        return False
    d = np.diff(tail)
    return bool(np.all(d < 0)) if direction == "down" else bool(np.all(d > 0))


def validate_hypotheses(spec: MotilitySpec, levels: int = 41) -> HypothesisReport:
    """Check the structural hypotheses on the dyadic samples xi0 * 2^-j."""
    xi = spec.xi0 * np.power(2.0, -np.arange(levels, dtype=np.float64))
    phi = eval_phi(spec, xi)
    dphi = eval_phi_prime(spec, xi)
    checks: dict[str, HypothesisCheck] = {}

    # positivity block: phi(0) = 0, phi > 0 and finite on the samples
    phi0 = eval_phi(spec, 0.0)
    if not np.isfinite(phi0) or abs(phi0) > 1e-14:
        checks["positivity"] = HypothesisCheck(
            "positivity", "fail", 0.0, float(phi0), "phi(0) must vanish")
    elif np.any(~np.isfinite(phi)) or np.any(phi <= 0.0):
        bad = int(np.argmax(~np.isfinite(phi) | (phi <= 0.0)))
        checks["positivity"] = HypothesisCheck(
            "positivity", "fail", float(xi[bad]), float(phi[bad]),
            "phi must be positive and finite on (0, xi0]")
    else:
        checks["positivity"] = HypothesisCheck("positivity", "pass")

    # lower-power: phi(xi) / xi^alpha bounded away from 0 toward xi = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = phi / np.power(xi, spec.alpha)
    ratio_min = float(np.nanmin(ratio))
    if np.any(~np.isfinite(ratio)) or ratio_min <= 0.0:
        bad = int(np.nanargmin(ratio))
        checks["lower-power"] = HypothesisCheck(
            "lower-power", "fail", float(xi[bad]), ratio_min)
    elif _tail_monotone(ratio, "down"):
        checks["lower-power"] = HypothesisCheck(
            "lower-power", "inconclusive", float(xi[-1]), float(ratio[-1]),
            "ratio still drifting down at the smallest samples")
    else:
        checks["lower-power"] = HypothesisCheck("lower-power", "pass")

    # upper-slope: |phi'(xi)| / xi^(alpha-1) bounded toward xi = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.abs(dphi) / np.power(xi, spec.alpha - 1.0)
    slope_sup = float(np.nanmax(slope))
    if np.any(~np.isfinite(slope)):
        bad = int(np.argmax(~np.isfinite(slope)))
        checks["upper-slope"] = HypothesisCheck(
            "upper-slope", "fail", float(xi[bad]), float(slope[bad]))
    elif _tail_monotone(slope, "up"):
        checks["upper-slope"] = HypothesisCheck(
            "upper-slope", "inconclusive", float(xi[-1]), float(slope[-1]),
            "ratio still drifting up at the smallest samples")
    else:
        checks["upper-slope"] = HypothesisCheck("upper-slope", "pass")

    # root-concave: second difference of phi^(1/alpha), step 1e-6 * xi.
    # The absolute tolerance 1e-8 is widened by the rounding noise a
    # second difference amplifies (32 eps |psi| / delta^2).
    inv_a = 1.0 / spec.alpha
    worst = None
    for x in xi:
        delta = 1e-6 * x
        pts = np.array([x - delta, x, x + delta])
        psi = np.power(np.maximum(eval_phi(spec, pts), 0.0), inv_a)
        second = (psi[2] - 2.0 * psi[1] + psi[0]) / delta ** 2
        noise = 32.0 * _EPS_MACH * float(np.max(np.abs(psi))) / delta ** 2
        excess = second - (1e-8 + noise)
        if excess > 0.0 and (worst is None or excess > worst[2]):
            worst = (float(x), float(second), float(excess))
    if worst is None:
        checks["root-concave"] = HypothesisCheck("root-concave", "pass")
    else:
        checks["root-concave"] = HypothesisCheck(
            "root-concave", "fail", worst[0], worst[1],
            "second derivative of phi^(1/alpha) is positive")

    return HypothesisReport(spec=spec, checks=checks, samples=xi,
                            lower_ratio_min=ratio_min,
                            upper_slope_sup=slope_sup)


@dataclass(frozen=True)
class SmallXiBoundReport:
    alpha: float
    a: float
    xi_star: float
    eps_values: tuple[float, ...]
    sup_per_level: dict[float, list[float]]    # eps -> supremum per level
    c_emp: float
    stable: bool
    divergent: bool
    bracket_window: dict[float, float]         # eps -> largest xi with bracket <= 0 below
    decade_maxima: dict[float, np.ndarray]
    samples_finest: int


def _score_and_bracket(spec: MotilitySpec, a: float, eps: float,
                       xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    phi_e = eval_phi(spec, xi) + eps
    dphi = eval_phi_prime(spec, xi)
    d2phi = eval_phi_second(spec, xi)
    lhs = ((a * phi_e * dphi + (a - 1.0) * dphi) ** 2 / (2.0 * phi_e)
           + a * dphi ** 2 + a * d2phi)
    score = xi * lhs
    bracket = (a ** 2 * phi_e ** 2 + 2.0 * a * (a - 1.0) * phi_e
               + (a - 1.0) ** 2 + 2.0 * a * phi_e
               - 2.0 * (1.0 - spec.alpha) * a / spec.alpha)
    return score, bracket


def verify_small_xi_bound(spec: MotilitySpec, xi_star: float,
                          eps_values=(1e-2, 1e-4, 1e-6),
                          a: float | None = None,
                          per_decade: int = 64,
                          levels: int = 3) -> SmallXiBoundReport:
    """Empirical supremum of the weighted small-xi expression (see module
    docstring).  Levels extend the sampled range toward xi = 0 (decades
    6, 8, 10, ... below xi_star), so the supremum is monotone under
    refinement; 'stable' asks the last extension to move it by < 1%."""
    if not (0.0 < spec.alpha < 1.0):
        raise ValueError("the small-xi bound applies to alpha in (0, 1)")
    if not (xi_star > 0.0):
        raise ValueError("xi_star must be positive")
    if a is None:
        a = 1.0 / spec.alpha
    eps_values = tuple(float(e) for e in eps_values)

    sup_per_level: dict[float, list[float]] = {e: [] for e in eps_values}
    decade_maxima: dict[float, np.ndarray] = {}
    bracket_window: dict[float, float] = {}
    n_finest = 0

    for lvl in range(levels):
        decades = 6 + 2 * lvl
        # log-uniform, nested across levels on the shared decades
        exps = np.linspace(0.0, decades, decades * per_decade + 1)
        xi = xi_star * np.power(10.0, -exps)
        n_finest = xi.size
        for eps in eps_values:
            score, bracket = _score_and_bracket(spec, a, eps, xi)
            sup_per_level[eps].append(float(np.max(score)))
            if lvl == levels - 1:
                dm = np.empty(decades)
                for d in range(decades):
                    hi = (exps <= d + 1) if d == decades - 1 else (exps < d + 1)
                    mask = (exps >= d) & hi
                    dm[d] = float(np.max(score[mask]))
                decade_maxima[eps] = dm
                # largest sampled xi such that the bracket is <= 0 at it and
                # at every smaller sample (xi is sorted descending)
                ok = bracket <= 0.0
                if not ok[-1]:
                    bracket_window[eps] = 0.0
                else:
                    idx = np.where(~ok)[0]
                    first_good = (idx[-1] + 1) if idx.size else 0
                    bracket_window[eps] = float(xi[first_good])

    stable = True
    divergent = False
    for eps in eps_values:
        sups = sup_per_level[eps]
        scale = max(abs(sups[-1]), 1e-300)
        if abs(sups[-1] - sups[-2]) > 0.01 * scale:
            stable = False
        dm = decade_maxima[eps]
        # blow-up signature: maxima keep growing into the smallest decades
        if dm.size >= 3 and np.all(np.diff(dm[-3:]) > 0) \
                and dm[-1] >= np.max(dm[:-3], initial=-np.inf):
            divergent = True
    # second signature: the bound must be uniform in eps, so a supremum
    # that keeps growing by an order of magnitude as eps shrinks (peaking
    # near the eps cutoff, hence grid-stable at each fixed eps) is a blow-up
    by_eps = [sup_per_level[e][-1] for e in sorted(eps_values, reverse=True)]
    if len(by_eps) >= 2 and all(b > a for a, b in zip(by_eps, by_eps[1:])) \
            and by_eps[-1] > 10.0 * max(by_eps[0], 1e-300):
        divergent = True
    stable = stable and not divergent

    c_emp = max(sup_per_level[eps][-1] for eps in eps_values)
    return SmallXiBoundReport(
        alpha=spec.alpha, a=a, xi_star=xi_star, eps_values=eps_values,
        sup_per_level=sup_per_level, c_emp=c_emp, stable=stable,
        divergent=divergent, bracket_window=bracket_window,
        decade_maxima=decade_maxima, samples_finest=n_finest)


def _sqrt_minus_square(xi):
    return np.sqrt(xi) - xi ** 2


def _sqrt_minus_square_prime(xi):
    with np.errstate(divide="ignore"):
        return 0.5 / np.sqrt(xi) - 2.0 * xi


def _sqrt_minus_square_second(xi):
    with np.errstate(divide="ignore"):
        return -0.25 * np.power(xi, -1.5) - 2.0


def make_motility(form: str, alpha: float, xi0: float) -> MotilitySpec:
    """Build a named motility law (config-facing registry)."""
    if form == "prototype":
        return MotilitySpec.prototype(alpha, xi0)
    if form == "sqrt-minus-square":
        # Root concavity of this law holds only up to (7.5/12)^(2/3), about
        # 0.73; with a larger window the validator must fail with a witness.
        if alpha != 0.5:
            raise ValueError("sqrt-minus-square has small-signal exponent "
                             "0.5; set alpha = 0.5")
        return MotilitySpec.custom(
            _sqrt_minus_square, _sqrt_minus_square_prime, alpha=0.5,
            xi0=xi0, phi_second=_sqrt_minus_square_second,
            form="sqrt-minus-square")
    raise ValueError(f"unknown motility form {form!r}")


FORMS = ("prototype", "sqrt-minus-square")
