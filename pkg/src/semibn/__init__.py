"""Semi-parametric Bayesian networks: linear expert graphs plus learned
Gaussian-process edge additions under Horseshoe shrinkage."""

from .cpd import (
    FitResult,
    NodeCpd,
    TrainConfig,
    candidate_scales,
    fit_node,
    node_marginal_loglik,
    node_objective,
    node_objective_grad,
    node_test_loglik,
    ols_fit,
    total_test_loglik,
)
from .datasets import (
    SplitDataset,
    drop_constant_columns,
    load_split,
    read_data_csv,
    save_split,
    standardize_splits,
    uci_prepare,
    write_data_csv,
)
from .estimators import LinearGaussianBN, SemiParametricBN
from .graph import (
    CycleError,
    ExpertGraph,
    GpEdgeSet,
    LearnedGraph,
    graph_from_json,
    graph_to_dot,
    graph_to_json,
    leaf_eligible,
    load_graph_json,
    save_graph_json,
    shd,
    validate_dag,
)
from .horseshoe import HsScaleMap, hs_log_prior, hs_log_prior_grad
from .kernels import (
    CovarianceModel,
    NonPositiveDefiniteError,
    SeKernelParams,
    additive_covariance,
    gp_marginal_grad,
    gp_marginal_loglik,
    gp_posterior_predictive_loglik,
    se_kernel_cross,
    se_kernel_matrix,
)
from .lgbn import (
    LgbnModel,
    fit_expert_graph,
    lgbn_test_loglik,
    load_lgbn_json,
    save_lgbn_json,
)
from .search import (
    ScoreCache,
    ScoreContext,
    SearchConfig,
    SearchResult,
    apply_pruning,
    best_score,
    brute_force_structure,
    opt_ord,
    prune_parents,
    search_structure,
)
from .serialize import (
    learned_from_json,
    learned_to_json,
    load_learned_json,
    save_learned_json,
)
from .synthetic import (GenConfig, GroundTruth, gen_structure, load_truth,
                        sample_dataset, save_truth)
from .sweep import load_sweep_config, run_learn, run_sweep

__version__ = "0.1.0"

__all__ = [
    "CovarianceModel",
    "CycleError",
    "ExpertGraph",
    "FitResult",
    "GenConfig",
    "GpEdgeSet",
    "GroundTruth",
    "HsScaleMap",
    "LearnedGraph",
    "LgbnModel",
    "LinearGaussianBN",
    "NodeCpd",
    "NonPositiveDefiniteError",
    "ScoreCache",
    "ScoreContext",
    "SeKernelParams",
    "SearchConfig",
    "SearchResult",
    "SemiParametricBN",
    "SplitDataset",
    "TrainConfig",
    "additive_covariance",
    "apply_pruning",
    "best_score",
    "brute_force_structure",
    "candidate_scales",
    "drop_constant_columns",
    "fit_expert_graph",
    "fit_node",
    "gen_structure",
    "gp_marginal_grad",
    "gp_marginal_loglik",
    "gp_posterior_predictive_loglik",
    "graph_from_json",
    "graph_to_dot",
    "graph_to_json",
    "hs_log_prior",
    "hs_log_prior_grad",
    "leaf_eligible",
    "learned_from_json",
    "learned_to_json",
    "lgbn_test_loglik",
    "load_graph_json",
    "load_learned_json",
    "load_lgbn_json",
    "load_split",
    "load_sweep_config",
    "load_truth",
    "node_marginal_loglik",
    "node_objective",
    "node_objective_grad",
    "node_test_loglik",
    "ols_fit",
    "opt_ord",
    "prune_parents",
    "read_data_csv",
    "run_learn",
    "run_sweep",
    "sample_dataset",
    "save_graph_json",
    "save_learned_json",
    "save_lgbn_json",
    "save_split",
    "save_truth",
    "se_kernel_cross",
    "se_kernel_matrix",
    "search_structure",
    "shd",
    "standardize_splits",
    "total_test_loglik",
    "uci_prepare",
    "validate_dag",
    "write_data_csv",
]

