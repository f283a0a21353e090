"""Equilibria of variational systems via gradient flow and Carleman lifting."""

from .carleman import (
    LiftedSystem,
    apply_cfp,
    assemble_dense,
    lift_state,
    lifted_dimension,
    lifted_matvec,
)
from .integrate import IntegratorConfig, Status, Trajectory, integrate_lifted, integrate_nonlinear
from .models import (
    ChainModel,
    SpringParams,
    TrussModel,
    chain_field,
    chain_potential,
    two_bay_truss,
    spring_field,
    spring_potential,
    truss_field,
    truss_potential,
)
from .oracle import OracleResult, cubic_root, solve_equilibrium
from .polysys import Monomial, PolyField, Polynomial, eval_field, flow_from_potential, gradient
from .psc import psc_assemble, taylor_closure
from .spectral import estimate_resources, max_real_eig, spectral_norm, stability_threshold

__version__ = "0.1.0"
