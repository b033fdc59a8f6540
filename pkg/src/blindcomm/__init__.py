"""Blind community detection from filtered graph signals over redrawn random graphs."""

from .covariance import (SignalBatch, SpectralSummary, eigendecompose, sample_covariance,
                         spectral_summary, top_k_eigenvectors)
from .errors import (AssumptionViolatedError, BlindCommError, ConfigError, DegenerateDataError,
                     InvalidProbabilityError)
from .excitation import ExcitationSource, ExcitationSpec, draw_excitation
from .graph_filter import FilterSpec, apply_filter, diffusion_filter, generating_polynomial
from .graph_model import (Graph, PartitionIndicator, PpmParams, SbmParams, bernoulli_graph_sequence,
                          laplacian, ppm_affinity, sample_graph)
from .metrics import EvalReport, error_rate, overlap_score, pairwise_consistency
from .order_selection import OrderEstimate, mdl_criterion, select_order_mdl, select_order_threshold
from .partition import KMeansConfig, Labeling, kmeans_cost, misclustering_bound, recover_partition
from .simulate import generate_signals
from .theory import (FilterConstants, MomentParams, adjacency_moments, analytic_covariance,
                     analytic_spectrum, constants_from_moments, gamma_power_inequality_check,
                     kmeans_cost_lower_bound, mdl_of_true_spectrum, monte_carlo_moments,
                     sample_bounds)

__version__ = "0.1.0"
