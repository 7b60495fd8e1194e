"""Reliability-aware chain composition and embedding for virtualized services."""

from .model import (
    ChainComposition,
    Embedding,
    FailureModel,
    FailureVector,
    Instance,
    LogicalLayer,
    PhysicalTopology,
    SelfLinkPolicy,
    check_feasibility,
    server_load,
    validate_instance,
)
from .reliability import (
    ReliabilityResult,
    exact_reliability,
    failure_vector_prob,
    monte_carlo_reliability,
    rvnf_executed,
    surrogate_objective,
)
from .dfg import (
    DfgEmbedding,
    DfgInstance,
    balanced_embedding,
    brute_force_min_union_bound,
    dfg_reliability,
    union_bound_objective,
    union_bound_value,
)
from .solver import (
    SolveReport,
    SolverConfig,
    Subproblem,
    bcd_solve,
    brute_force_joint,
    cc_max,
    cc_min,
    fge_only_solve,
    solve_subproblem_exact,
)
from .experiments import (
    SweepSpec,
    TopologyDistribution,
    dfg_sweep,
    run_sweep,
    sample_topology,
)

__version__ = "0.1.0"
