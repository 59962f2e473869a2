"""Bivariate partial information decomposition via exponential-cone
programming.

The estimator splits MI(X; Y,Z) into shared, unique and synergistic parts
by minimizing mutual information over all distributions with the same
(X,Y)- and (X,Z)-marginals, solved with an in-house path-following barrier
method and audited with dual certificates.
"""

from .bindings import BROJA_2PID_Exception, pid
from .distributions import (
    JointDistribution,
    MarginalPair,
    build_distribution,
    conditional_entropy_x_given_yz,
    marginals,
    mutual_information,
)
from .estimator import MassLoss, PidResult, decompose, run_pid
from .gates import copy_gate, gate, random_simplex_distribution
from .model import ExpConeModel, build_model, embed_cp_point, initial_point
from .oracle import brute_force_min
from .quality import NumErr
from .solver import (
    SOLVER_NAME,
    PrimalDualSolution,
    SolverException,
    SolverParams,
    Status,
    duality_gap,
    recover_duals,
    solve,
)

__all__ = [
    "BROJA_2PID_Exception",
    "ExpConeModel",
    "JointDistribution",
    "MarginalPair",
    "MassLoss",
    "NumErr",
    "PidResult",
    "PrimalDualSolution",
    "SOLVER_NAME",
    "SolverException",
    "SolverParams",
    "Status",
    "build_distribution",
    "build_model",
    "brute_force_min",
    "conditional_entropy_x_given_yz",
    "copy_gate",
    "decompose",
    "duality_gap",
    "embed_cp_point",
    "gate",
    "initial_point",
    "marginals",
    "mutual_information",
    "pid",
    "random_simplex_distribution",
    "recover_duals",
    "run_pid",
    "solve",
]

__version__ = "0.1.0"
