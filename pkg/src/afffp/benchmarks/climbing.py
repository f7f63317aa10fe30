"""Three-player climbing hill game.

All players receive the same payoff. Index order is (player 1, player 2,
player 3) with actions U=0, M=1, D=2; player 3 picks the matrix.
"""

import numpy as np

from ..game import MatrixGame

ACTIONS = ("U", "M", "D")

CLIMBING_HILL = np.zeros((3, 3, 3))
# player 3 plays U
CLIMBING_HILL[:, :, 0] = [
    [0, 0, 0],
    [0, 50, 40],
    [0, 0, 30],
]
# player 3 plays M
CLIMBING_HILL[:, :, 1] = [
    [-300, 70, 80],
    [-300, 60, 0],
    [0, 0, 0],
]
# player 3 plays D
CLIMBING_HILL[:, :, 2] = [
    [100, -300, 90],
    [0, 0, 0],
    [0, 0, 0],
]
CLIMBING_HILL.setflags(write=False)

EQUILIBRIUM = (0, 0, 2)


def climbing_hill_game() -> MatrixGame:
    return MatrixGame.common_payoff(CLIMBING_HILL, equilibrium=EQUILIBRIUM)


def parse_joint(labels: str) -> tuple:
    """``"UUD"`` -> ``(0, 0, 2)``."""
    return tuple(ACTIONS.index(c) for c in labels.upper())
