"""Latent factor models for rating prediction.

Two solvers share one factor model: alternating ridge least squares, and a
simulated-annealing sampler that moves between latent dimensions with
reversible-jump proposals while adapting the two ridge weights online.
"""
from .als import AlsTrace, als_fit, update_items, update_users
from .annealer import (
    AnnealerConfig,
    AnnealSchedule,
    ChainResult,
    ChainTraceRecord,
    MoveProposal,
    acceptance_log_ratio,
    anneal_step,
    propose_birth,
    propose_death,
    propose_dimension,
    propose_within,
    run_chain,
)
from .data import (
    DataSplit,
    RatingTriple,
    SparseRatings,
    load_movielens,
    parse_movielens,
    rmse,
    split,
    write_movielens,
)
from .estimators import ALSFactorizer, RJMCMCFactorizer
from .exceptions import (
    DuplicateRatingError,
    EmptyDatasetError,
    ParseError,
    SingularSystemError,
    UndefinedMetricError,
)
from .hyper import AdamState, adam_update, check_freeze, grad_h_lambda1, grad_h_lambda2
from .model import (
    EnergyBreakdown,
    FactorState,
    HyperParams,
    boltzmann_exponent,
    init_factors,
    predict,
    regularized_loss,
)
from .synthetic import gen_synthetic

__version__ = "0.1.0"
