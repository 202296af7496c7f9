"""Exponential families on the binary hypercube: exact enumeration, moment-map
inversion, the reduction from parameter estimation to log-partition
approximation, and the neighbourhood-count field estimator for
anti-ferromagnetic Ising models."""

from .data import Dataset, sufficient_statistic
from .exact import (
    covariance,
    exact_sample,
    exact_summary,
    log_partition,
    moment_map,
    verify_conditions,
)
from .graphs import Graph, random_regular_graph, read_graph, write_graph
from .model import Model, build_antiferro_ising, build_dense_model
from .oracle import Oracle, free_energy, invert_moment_map, make_noisy_oracle
from .reduction import (
    ErrorBudget,
    ReductionReport,
    approximate_logZ,
    compute_budget,
    path_integrate_logZ,
    project_box,
    projected_gradient_maximize,
)
from .sampling import (
    EstimatorConfig,
    estimate_fields_from_samples,
    gibbs_sample,
    neighborhood_counts,
    required_samples,
)

__version__ = "0.1.0"
