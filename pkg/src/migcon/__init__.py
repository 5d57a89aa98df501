"""Structure-preserving simulation and audit toolkit for the
degenerate migration-consumption system

    u_t = div(grad(u phi(v))),    v_t = lap(v) - u v,

on a box with no-flux boundaries, integrated through the regularized
family phi_eps = phi + eps with the consumption damped to
u v / (1 + eps u).  The discretization preserves the structure the
continuum estimates lean on (mass, positivity, maximum principle,
dissipation identities), and the audit layer measures how well each
identity survives discretization.
"""

__version__ = "0.1.0"

from .grid import Field, FaceField, Grid, SolverFailure
from .motility import (HypothesisReport, MotilitySpec, RegularizedMotility,
                       SmallXiBoundReport, make_motility,
                       validate_hypotheses, verify_small_xi_bound)
from .records import RunRecord, SnapshotRef
from .scheme import DtPolicy, SimParams, SimState, advance, initial_state, run

__all__ = [
    "__version__",
    "Field", "FaceField", "Grid", "SolverFailure",
    "MotilitySpec", "RegularizedMotility", "HypothesisReport",
    "SmallXiBoundReport", "make_motility", "validate_hypotheses",
    "verify_small_xi_bound",
    "RunRecord", "SnapshotRef",
    "DtPolicy", "SimParams", "SimState", "advance", "initial_state", "run",
]
