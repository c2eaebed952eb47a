"""Maximum-likelihood selection of k-subsets and k-tuples from noisy rankings."""

from .core import (
    NoiseParams,
    PairwiseDataset,
    Ranking,
    dataset_distance,
    dataset_from_comparisons,
    dataset_from_rankings,
    kendall_tau,
    read_dataset,
    read_input,
    read_profile,
    tuple_distance,
    write_dataset,
    write_profile,
)
from .errors import CapacityError, ConfigurationError, InvalidArgument, InvalidDataset, SamplingFailure
from .exact import (
    high_noise_threshold,
    kemeny_dp,
    optimal_objective1,
    optimal_objective2,
    optimal_objective3,
    posterior_over_rankings,
    top_alternative_marginals,
)
from .experiments import ExperimentConfig, ExperimentResult, emit_csv, run_experiment, run_trial
from .mcmc import ChainConfig, estimate_objective1, estimate_top_marginals, mh_step
from .noise_models import (
    MallowsSpec,
    mallows_pmf,
    sample_mallows_rejection,
    sample_mallows_rim,
    sample_noisy_comparisons,
    sample_partial_orders,
)
from .selection import (
    SelectionResult,
    borda,
    copeland_outdegree,
    extended_scores,
    k_approval,
    maximin,
    plurality,
    scored_tuple_value,
    select_top_k,
    select_top_tuple,
)

__version__ = "0.1.0"
