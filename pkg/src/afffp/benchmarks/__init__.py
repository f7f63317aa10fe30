"""Testbeds: three-player climbing hill, vehicle-target assignment, disaster response."""

from .climbing import CLIMBING_HILL, EQUILIBRIUM, climbing_hill_game
from .disaster import DisasterGame, DisasterInstance, generate_disaster
from .vta import VtaGame, VtaInstance, generate_vta

__all__ = [
    "CLIMBING_HILL",
    "EQUILIBRIUM",
    "climbing_hill_game",
    "DisasterGame",
    "DisasterInstance",
    "generate_disaster",
    "VtaGame",
    "VtaInstance",
    "generate_vta",
]
