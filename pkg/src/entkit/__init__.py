"""Entanglement measures under restricted measurements.

Solvers for relative entropy distances to the separable set (plain,
measured, and mixed-set variants), finite-blocklength hypothesis-testing
simulation with measurement back-action tracking, and a randomized
inequality harness, all normalized to bits.
"""

from .matqi import (
    DIM_CAP,
    DensityMatrix,
    DimensionCapError,
    DomainError,
    EntkitError,
    InvariantError,
    NumericError,
    PureState,
    ShapeError,
    density_from_json,
    density_to_json,
    herm_eig,
    isotropic,
    matrix_from_json,
    matrix_to_json,
    max_entangled,
    partial_trace,
    partial_transpose,
    permute_systems_mat,
    purify,
    random_density,
    random_pure,
    tensor,
    trace_norm,
)
from .entropy import (
    NegativeValueWarning,
    classical_rel_entropy,
    cond_mutual_info,
    eta,
    qrel_entropy,
    vn_entropy,
)
from .povm import (
    OneWayLoccPovm,
    Povm,
    ProbDist,
    apply_povm,
    comp_basis_onelocc,
    comp_basis_povm,
    haar_unitary,
    is_ppt_element,
    iso_two_outcome_povm,
    measured_distance,
    measured_rel_entropy,
    onelocc_to_povm,
    povm_from_json,
    povm_to_json,
    random_onelocc_povm,
    rotated_basis_povm,
    twirl_basis_povm,
    uu_bar_twirl,
)
from .sepopt import (
    FwResult,
    OneLoccBound,
    SepPoint,
    fw_measured_ree,
    fw_ree,
    lmo_product,
    mixed_set_ree,
    onelocc_ree_lower_bound,
    random_sep_point,
    ree_gradient,
    ree_objective,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
