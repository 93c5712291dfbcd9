"""Monte Carlo laboratory for spectral measures of unitary Brownian motion.

Simulates the matrix SDE ``dU = U dW - (1/2) U dt`` on U(n), extracts
empirical spectral measures, computes exact Wasserstein-1 distances on the
circle, models the large-n limiting measure from its closed-form moments, and
runs the experiments that confront all of it with the quantitative
convergence bounds.
"""

__version__ = "0.1.0"

from .errors import (
    AtomCapExceededError,
    ContractViolationError,
    InvalidDimensionError,
    InvalidGridError,
    InvalidInputError,
    InvalidQuantileError,
    NumericError,
    PrecisionLossError,
    UbmlabError,
)
from .freebm import FreeMeasureModel, model_for, moment, moments_batch, q_polynomial, w1_to_uniform
from .kernels import active_backend, set_backend
from .lie import gaussian_su, gaussian_u
from .rng import RngStream, derive_stream, substream_id
from .simulator import (
    SimConfig,
    PathSample,
    sample_endpoint,
    sample_endpoint_coupled,
    sample_endpoint_coupled_ensemble,
    sample_endpoint_ensemble,
    sample_path,
    sample_paths_states,
    step,
    unitarity_defect,
)
from .spectral import (
    AngleSample,
    CircleMeasure,
    eigenangles,
    eigenangles_batch,
    empirical_measure,
    geodesic_distance_identity,
    pool_measures,
    trace_moment,
)
from .transport import (
    TransportResult,
    quantile_discretize,
    w1_discrete,
    w1_to_continuous,
)

__all__ = [
    "AngleSample",
    "AtomCapExceededError",
    "CircleMeasure",
    "ContractViolationError",
    "FreeMeasureModel",
    "InvalidDimensionError",
    "InvalidGridError",
    "InvalidInputError",
    "InvalidQuantileError",
    "NumericError",
    "PathSample",
    "PrecisionLossError",
    "RngStream",
    "SimConfig",
    "TransportResult",
    "UbmlabError",
    "active_backend",
    "derive_stream",
    "eigenangles",
    "eigenangles_batch",
    "empirical_measure",
    "gaussian_su",
    "gaussian_u",
    "geodesic_distance_identity",
    "model_for",
    "moment",
    "moments_batch",
    "pool_measures",
    "q_polynomial",
    "quantile_discretize",
    "sample_endpoint",
    "sample_endpoint_coupled",
    "sample_endpoint_coupled_ensemble",
    "sample_endpoint_ensemble",
    "sample_path",
    "sample_paths_states",
    "set_backend",
    "step",
    "trace_moment",
    "unitarity_defect",
    "w1_discrete",
    "w1_to_continuous",
    "w1_to_uniform",
]
