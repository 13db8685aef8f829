"""Bayes-factor evidence that the digits of a constant occur equally often."""

from .bayes import (
    DigitCounts,
    DirichletPrior,
    MixturePrior,
    NullModel,
    log_bf01,
    log_bf01_conditional,
    log_bf01_dirichlet,
    log_bf01_mixture,
    log_bf_gap,
    max_log_bf01,
)
from .constants import (
    DigitStream,
    generate_digits,
    ingest_digit_file,
    sample_biased_digits,
)
from .freq import chisq_stat, threshold_counts, threshold_log_bf
from .runner import (
    AnalysisConfig,
    SimulationConfig,
    detect_lindley_windows,
    evaluate_counts,
    run_simulation,
    run_trajectory,
)

__version__ = "0.1.0"
