"""RIS-assisted MIMO link simulator with codebook-based precoder selection."""

from .channel import (ChannelSet, PathLossParams, cascade, cascade_subbands,
                      generate_channels, path_loss, radiation_pattern)
from .codebook import (BeamGrid, PrecoderMatrix, assemble_precoder, build_beam_grid,
                       cophase_indices, cophase_value, restricted_grid)
from .errors import ConfigError, NumericalError, RankDeficientError, SvdConvergenceError
from .harness import ExperimentConfig, ResultRow, run_sweep, run_trial, trial_seed
from .linalg import SvdResult, hermitian_solve, kronecker, svd
from .link import LinkMetrics, achievable_rate, average_snr, link_metrics, per_layer_snr, zf_matrix
from .ris import RisConfiguration, phase_set, reflection_matrix, sample_configurations
from .risopt import McaState, OpMetric, mca_optimize, op_effective_rank, op_lambda
from .selector import (CsiReport, SelectionCounters, complexity_report,
                       select_conventional, select_proposed)

__version__ = "0.1.0"

__all__ = [
    "BeamGrid", "ChannelSet", "ConfigError", "CsiReport", "ExperimentConfig",
    "LinkMetrics", "McaState", "NumericalError", "OpMetric", "PathLossParams",
    "PrecoderMatrix", "RankDeficientError", "ResultRow", "RisConfiguration",
    "SelectionCounters", "SvdConvergenceError", "SvdResult", "achievable_rate",
    "assemble_precoder", "average_snr", "build_beam_grid", "cascade",
    "cascade_subbands", "complexity_report", "cophase_indices", "cophase_value",
    "generate_channels", "hermitian_solve", "kronecker", "link_metrics",
    "mca_optimize", "op_effective_rank", "op_lambda", "path_loss", "per_layer_snr",
    "phase_set", "radiation_pattern", "reflection_matrix", "restricted_grid",
    "run_sweep", "run_trial", "sample_configurations", "select_conventional",
    "select_proposed", "svd", "trial_seed", "zf_matrix",
]
