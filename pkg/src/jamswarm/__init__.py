"""Genetic-algorithm optimization of UAV swarm formation, beam steering and
routing under jamming."""

__version__ = "0.1.0"

from .channel import (
    ChannelParams,
    GridSpec,
    Jammer,
    Position,
    RadiationPattern,
    UavState,
    capacity_matrix,
)
from .errors import ConfigurationError
from .optimizer import Chromosome, Environment, GaConfig, GaReport, inner_ga, outer_ga
from .routing import ObjectiveWeights, RoutingResult, objective, shortest_paths
from .scenarios import ScenarioConfig, run_fixed_area, run_moving, run_static

__all__ = [
    "ChannelParams",
    "Chromosome",
    "ConfigurationError",
    "Environment",
    "GaConfig",
    "GaReport",
    "GridSpec",
    "Jammer",
    "ObjectiveWeights",
    "Position",
    "RadiationPattern",
    "RoutingResult",
    "ScenarioConfig",
    "UavState",
    "capacity_matrix",
    "inner_ga",
    "objective",
    "outer_ga",
    "run_fixed_area",
    "run_moving",
    "run_static",
    "shortest_paths",
]
