"""Counter-rotating excitation of an accelerating qubit in a cavity, and the
quantum causal structure of the resulting qubit channel."""

__version__ = "0.1.0"

from .causality import (
    Assemblage,
    CausalityScan,
    PseudoDensityMatrix,
    assemblage_from_channel,
    assemblage_from_pdm,
    capacity_bound,
    causality_scan,
    f_function,
    pdm_from_channel,
    tsr,
)
from .conic import SdpProblem, SdpSolution, solve_sdp
from .dynamics import (
    Channel,
    ConvergenceReport,
    TimeGrid,
    Trajectory,
    convergence_check,
    evolve,
    reconstruct_channel,
    reconstruct_channels,
)
from .errors import IntegrationError, NumericalError, QuadratureError, SolverError
from .kernels import HAVE_EXTENSION
from .linalg import DensityMatrix, SparseOperator, partial_trace
from .model import ModeSpec, PhysicalConfig, build_hamiltonian, cherenkov_threshold
from .perturbation import (
    PerturbationParams,
    onset_time,
    transition_probability_closed_form,
    transition_probability_quadrature,
)

__all__ = [
    "Assemblage", "CausalityScan", "Channel", "ConvergenceReport", "DensityMatrix", "HAVE_EXTENSION",
    "IntegrationError", "ModeSpec", "NumericalError", "PerturbationParams", "PhysicalConfig",
    "PseudoDensityMatrix", "QuadratureError", "SdpProblem", "SdpSolution", "SolverError", "SparseOperator",
    "TimeGrid", "Trajectory", "assemblage_from_channel", "assemblage_from_pdm", "build_hamiltonian",
    "capacity_bound", "causality_scan", "cherenkov_threshold", "convergence_check", "evolve", "f_function",
    "onset_time", "partial_trace", "pdm_from_channel", "reconstruct_channel", "reconstruct_channels",
    "solve_sdp", "transition_probability_closed_form", "transition_probability_quadrature", "tsr",
]
