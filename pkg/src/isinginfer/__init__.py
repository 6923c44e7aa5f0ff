"""Inference for the inverse temperature of Ising models on graphs.

Coupling matrices and graph ingestion, Glauber and exact sampling, the
maximum pseudolikelihood estimator, log-partition bounds, the weighted
chi-square limit law of the most powerful test, and bootstrap tools.
"""

__version__ = "0.1.0"

from .bootstrap import (
    FitReport,
    analyze_network,
    bootstrap_estimates,
    null_pvalue,
    parametric_bootstrap_se,
)
from .coupling import (
    CouplingMatrix,
    LabeledGraph,
    Spectrum,
    block_example,
    circulant_regular,
    coupling_from_pairs,
    curie_weiss,
    er_edges,
    er_scaled,
    from_edge_list,
    parse_labels,
    power_iteration,
    read_edge_list,
    regular_scaled,
    spectrum,
)
from .errors import (
    CapacityError,
    DegreeMismatchError,
    DimensionMismatchError,
    DomainError,
    InvalidParameterError,
    InvalidSizeError,
    IsingError,
    NotApplicableError,
    ParseError,
)
from .estimators import IsingMPLE
from .gibbs import (
    ChainConfig,
    child_seed,
    exact_expectation,
    exact_log_pmf,
    exact_sample,
    glauber_sample,
    glauber_sweep,
    hamiltonian,
    sample_replicates,
)
from .mple import MpleResult, local_fields, mple, mple_many, score, score_derivative
from .mptest import (
    LimitLaw,
    chi2_1_isf,
    chi2_1_sf,
    coupled_draws,
    empirical_power,
    er_power_closed_form,
    graphon_spectrum,
    mp_power,
    null_threshold,
    power_curve,
    quantile,
    sample_limit_law,
)
from .partition import (
    PartitionReport,
    entropy_penalty,
    exact_log_partition,
    gaussian_upper_bound,
    mean_field_lower_bound,
    mean_field_objective,
    partition_report,
    rademacher_lower_bound,
)
