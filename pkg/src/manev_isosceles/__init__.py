"""Triple collision and near-collision dynamics of the spatial isosceles
three-body problem with Manev interaction, in McGehee blow-up coordinates."""

from .errors import ManevError
from .params import P0, IntegrationSettings, PhysicalParams, validate
from .coords import CylState, McGeheeState

__version__ = "0.1.0"

__all__ = [
    "ManevError", "P0", "IntegrationSettings", "PhysicalParams", "validate",
    "CylState", "McGeheeState",
]
