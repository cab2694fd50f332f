"""Evolutionary dynamics of institution formation under distorted perception.

Three strategies (defector, contributor, contributor-monitor) play a
common-pool institution game.  The package provides replicator and Moran
dynamics, five ways of perceiving the expected cost of free-riding, and
basin / critical-mass analysis on the strategy simplex.
"""

from .analysis import (
    BasinReport,
    ThresholdReport,
    basin_escape_rate,
    basin_map,
    edge_threshold,
    threshold_sweep,
)
from .game import GameParams, PopulationState, Strategy, payoff_vector, preset
from .moran import MoranConfig, drift_field, selection_gradient, simulate, stationary_distribution, transition_matrix
from .perception import (
    AbsoluteNoise,
    CoarseBias,
    Identity,
    IDENTITY,
    Prelec,
    ProportionalNoise,
    make_rng,
    parse_perception,
    prelec_weight,
)
from .replicator import find_fixed_points, gradient_field, integrate_trajectory, replicator_derivative
from .simplex import FixedPoint, GradientField, Stability

__version__ = "0.1.0"
