"""dtnlab: Dirichlet-to-Neumann operators on discrete dual operator pairs."""

from .linalg import (
    DEFAULT_TOL,
    Subspace,
    TolerancePolicy,
    WeightedSpace,
    euclidean_space,
    numeric_kernel,
    numeric_range,
    observed_order,
    orthogonal_projection,
    orthonormalize,
    principal_angles,
    weighted_adjoint,
)
from .pairs import (
    CoefficientOp,
    DualPair,
    PairReport,
    build_interval_pair,
    build_rectangle_pair,
    coefficient_from_matrix,
    coefficient_from_spec,
    identity_coefficient,
    validate_pair,
)
from .boundary import BoundarySpace, bd_space, d_dot, g_dot, phi_pairing, project_bd
from .bvp import BvpSolution, solve_block, solve_dirichlet, solve_neumann
from .dtn import (
    DtnOperator,
    PivotSpace,
    default_pivot,
    dtn_bd,
    dtn_pivot,
    dtn_pivot_inverse,
    kappa_adjoint_lift,
    ntd_bd,
    sector_report,
)
from .graphs import (
    LinearGraph,
    dtn_graph,
    graph_domain_check,
    graph_pivot,
    ntd_domain_check,
    ntd_graph,
    pivot_resolvent,
)
from .convergence import (
    CoefficientSequence,
    ConvergenceReport,
    compressed_coefficient,
    compressed_inverse_convergence,
    indep_bc_diagnostic,
    interval_dtn_analytic,
    noncoercive_resolvent_experiment,
    poincare_constant,
    wot_resolvent_experiment,
)
from .config import RunConfig, config_hash, parse_config, serialize_config
from .expressions import parse_expression

__version__ = "0.1.0"
