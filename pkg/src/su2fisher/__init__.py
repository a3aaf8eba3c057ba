"""Fisher information for SU(2) estimation with two-mode N-photon probes."""

from .cfi import outcome_distribution, product_state_precision, total_fisher, tr_inv_precision
from .fock import FockState, StateFamily, check_optimality, check_saturation, make_state, parse_state_spec, rho1, rho2
from .qfi import FisherMatrix, optimal_bound, qfi_oracle, qfi_three_basis
from .su2 import EulerAngles, QuaternionParams, euler_to_matrix, jacobians_at, matrix_to_euler, wigner_d

__all__ = [
    "EulerAngles",
    "FisherMatrix",
    "FockState",
    "QuaternionParams",
    "StateFamily",
    "check_optimality",
    "check_saturation",
    "euler_to_matrix",
    "jacobians_at",
    "make_state",
    "matrix_to_euler",
    "optimal_bound",
    "outcome_distribution",
    "parse_state_spec",
    "product_state_precision",
    "qfi_oracle",
    "qfi_three_basis",
    "rho1",
    "rho2",
    "total_fisher",
    "tr_inv_precision",
    "wigner_d",
]
