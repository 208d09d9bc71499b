"""Complex Hermitian linear algebra and the state data model."""

from .linalg import (
    HERMITICITY_TOL,
    PSD_TOL,
    SUPPORT_CUTOFF,
    eigvalsh_desc,
    embed,
    hermitian_eig,
    is_hermitian,
    jacobi_hermitian_eig,
    kron_all,
    matrix_power,
    support_contained,
    support_projector,
)
from .random import (
    random_cq,
    random_density,
    random_distribution,
    random_instance,
    random_isometry,
    random_kraus_channel,
    random_pure,
    rng_from,
)
from .serialize import (
    cq_from_dict,
    cq_to_dict,
    density_from_dict,
    density_to_dict,
    dump_state,
    load_state,
    state_from_dict,
)
from .states import (
    CqState,
    DensityOperator,
    Register,
    conditional_operator,
    cq_from_joint,
    creg,
    partial_trace,
    purify,
    qreg,
    tensor,
    trace_distance,
)

__all__ = [
    "HERMITICITY_TOL", "PSD_TOL", "SUPPORT_CUTOFF",
    "eigvalsh_desc", "embed", "hermitian_eig", "is_hermitian",
    "jacobi_hermitian_eig", "kron_all", "matrix_power",
    "support_contained", "support_projector",
    "random_cq", "random_density", "random_distribution", "random_instance",
    "random_isometry", "random_kraus_channel", "random_pure", "rng_from",
    "cq_from_dict", "cq_to_dict", "density_from_dict", "density_to_dict",
    "dump_state", "load_state", "state_from_dict",
    "CqState", "DensityOperator", "Register", "conditional_operator",
    "cq_from_joint", "creg", "partial_trace", "purify", "qreg", "tensor",
    "trace_distance",
]
