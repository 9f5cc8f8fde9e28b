"""Reconfigurable-surface beamforming: codebooks, beam search, channel simulation, patterns."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    PhaseProfile,
    PhaseStateSet,
    RisGeometry,
    SteeringVector,
    kronecker_compose,
    quantize_profile,
    steering_vector,
)
from .codebook import AngleGrid, Codebook, build_angle_codebook, build_dft_codebook  # noqa: E402
from .channel import Scenario, SimulatedOracle, load_scenario, make_oracle, received_power  # noqa: E402
from .search import SearchResult, exhaustive_search, greedy_search, two_step_search  # noqa: E402

__all__ = [
    "__version__", "RisGeometry", "PhaseStateSet", "PhaseProfile", "SteeringVector", "steering_vector",
    "kronecker_compose", "quantize_profile", "AngleGrid", "Codebook", "build_angle_codebook",
    "build_dft_codebook", "Scenario", "SimulatedOracle", "load_scenario", "make_oracle", "received_power",
    "SearchResult", "exhaustive_search", "two_step_search", "greedy_search",
]
