"""Node-wise graph diffusion embeddings.

Each target node gets its own diffusion length, derived from how fast a
random walk from it mixes, and its embedding is a hop-weighted mixture of
transition-matrix powers applied to the feature matrix. Embeddings are
computed either exactly (sparse frontier expansion) or by random-walk
sampling, then fed to a linear softmax classifier.
"""

from .classifier import LinearModel, micro_f1, predict, train
from .exact import ExactPropagationPlan, phi_exact, propagate_exact
from .ghd import GhdTable, build_ghd_table
from .graph import Graph, connectivity_report, from_edges, load_edge_list, stationary_distribution
from .pipeline import PipelineError, RunConfig, run_pipeline
from .sampling import SamplerConfig, propagate_sampled, walk_count
from .spectral import (
    DiffusionLengths,
    compute_lengths,
    estimate_lambda_exact,
    estimate_lambda_heuristic,
    tau_distance_exact,
    tau_distance_heuristic,
)

__version__ = "0.1.0"

__all__ = [
    "DiffusionLengths",
    "ExactPropagationPlan",
    "GhdTable",
    "Graph",
    "LinearModel",
    "PipelineError",
    "RunConfig",
    "SamplerConfig",
    "build_ghd_table",
    "compute_lengths",
    "connectivity_report",
    "estimate_lambda_exact",
    "estimate_lambda_heuristic",
    "from_edges",
    "load_edge_list",
    "micro_f1",
    "phi_exact",
    "predict",
    "propagate_exact",
    "propagate_sampled",
    "run_pipeline",
    "stationary_distribution",
    "tau_distance_exact",
    "tau_distance_heuristic",
    "train",
    "walk_count",
]
