"""Decentralized kernel ridge regression over agent networks.

A desk-scale simulator and library: random-feature kernel approximation,
consensus ADMM with optional communication censoring, a diffusion baseline,
centralized oracles, and full transmission accounting.
"""

from .data import (
    PartitionPlan,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    minmax_normalize,
    partition_to_agents,
    train_test_split,
)
from .experiment import (
    ExperimentConfig,
    RunTrace,
    compute_mse,
    consensus_residual,
    load_config,
    load_config_text,
    run_experiment,
)
from .graph import (
    Graph,
    SpectralConstants,
    incidence_matrices,
    load_edge_list,
    make_graph,
    random_connected_graph,
    rho_upper_bound,
    spectral_constants,
)
from .model import (
    AgentDataset,
    LocalSolveContext,
    build_solve_context,
    convexity_constants,
    local_cost,
    local_gradient,
    local_solve,
    make_agent_dataset,
)
from .oracle import (
    CentralizedSolution,
    centralized_krr_solution,
    centralized_rf_solution,
    effective_dof,
    required_feature_count,
)
from .rf import (
    COSINE_PHASE,
    PAIRED_TRIG,
    RandomFeatureMap,
    approx_kernel,
    build_feature_map,
    exact_gaussian_kernel,
    map_point,
    map_points,
    sample_frequencies,
)
from .solver import (
    CTA,
    COKE,
    DKLA,
    AgentState,
    CensoringSchedule,
    coke_round,
    cta_round,
    dkla_round,
    metropolis_weights,
    run,
)

__version__ = "0.1.0"
