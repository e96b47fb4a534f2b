"""Variables, jet coordinates, total derivatives and metric contraction."""

from diffinv.jetspace.calculus import (
    contract,
    gradient,
    lower_coordinates,
    square_norm,
    total_derivative,
)
from diffinv.jetspace.coords import (
    JetCoord,
    Metric,
    MultiIndex,
    SpaceSpec,
    enumerate_jet_coords,
    jet_dimension,
    multi_index,
)

__all__ = [
    "JetCoord",
    "Metric",
    "MultiIndex",
    "SpaceSpec",
    "contract",
    "enumerate_jet_coords",
    "gradient",
    "jet_dimension",
    "lower_coordinates",
    "multi_index",
    "square_norm",
    "total_derivative",
]
