"""Histogram estimation of Markov transition densities on recursive dyadic
partitions, with an exact penalized selection rule and a risk-study harness.
"""

from .backend import HAS_COMPILED, available_backends
from .errors import CapacityError, IOFailure, MctdError, ValidationError
from .loss import (
    ALPHA,
    CellPairScore,
    PenaltyConfig,
    QuadSpec,
    empirical_l2,
    hellinger2_cells,
    hellinger2_vs_truth,
    test_stat_cells,
)
from .partition import (
    DyadicCube,
    DyadicInterval,
    Partition,
    PartitionTree,
    enumerate_partitions,
    partition_count,
)
from .select import (
    Dictionary,
    SelectionResult,
    dictionary_select,
    gamma_direct,
    inner_dp,
    oracle_select,
    partition_risk,
    select,
)
from .sim import (
    ExperimentConfig,
    RiskReport,
    RiskRow,
    chain_spec,
    run_experiment,
    simulate,
    true_density,
)
from .stats import (
    HistogramEstimate,
    Sample,
    StatsPyramid,
    bin_sample,
    estimate,
    evaluate_grid,
    read_sample_csv,
    write_sample_csv,
)

__version__ = "1.0.0"

__all__ = [
    "ALPHA",
    "CapacityError",
    "CellPairScore",
    "Dictionary",
    "DyadicCube",
    "DyadicInterval",
    "ExperimentConfig",
    "HAS_COMPILED",
    "HistogramEstimate",
    "IOFailure",
    "MctdError",
    "Partition",
    "PartitionTree",
    "PenaltyConfig",
    "QuadSpec",
    "RiskReport",
    "RiskRow",
    "Sample",
    "SelectionResult",
    "StatsPyramid",
    "ValidationError",
    "available_backends",
    "bin_sample",
    "chain_spec",
    "dictionary_select",
    "empirical_l2",
    "enumerate_partitions",
    "estimate",
    "evaluate_grid",
    "gamma_direct",
    "hellinger2_cells",
    "hellinger2_vs_truth",
    "inner_dp",
    "oracle_select",
    "partition_count",
    "partition_risk",
    "read_sample_csv",
    "run_experiment",
    "select",
    "simulate",
    "test_stat_cells",
    "true_density",
    "write_sample_csv",
]
