"""Action selection from beliefs: best response and logit smooth best response."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalDegeneracyError
from .game import StrategicFormGame, expected_utility

BEST_RESPONSE = "best-response"
SMOOTH_BEST_RESPONSE = "smooth-best-response"

# relative tolerance for treating two expected payoffs as tied
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class DecisionRule:
    kind: str = SMOOTH_BEST_RESPONSE
    xi: float = 1.0

    def __post_init__(self):
        if self.kind not in (BEST_RESPONSE, SMOOTH_BEST_RESPONSE):
            raise InputError(f"unknown decision rule {self.kind!r}")
        if self.kind == SMOOTH_BEST_RESPONSE and not self.xi > 0:
            raise InputError("xi must be positive for smooth best response")


def logit(payoffs: np.ndarray, xi: float) -> np.ndarray:
    """Softmax of ``payoffs / xi`` along the last axis.

    Entries equal to -inf mark unavailable actions and get probability 0.
    The row maximum is subtracted first, so large payoffs do not overflow.
    """
    payoffs = np.asarray(payoffs, dtype=float)
    finite = np.isfinite(payoffs)
    if np.any(np.isnan(payoffs)) or np.any(payoffs == np.inf):
        raise NumericalDegeneracyError("expected payoffs must be finite")
    if not np.all(finite.any(axis=-1)):
        raise NumericalDegeneracyError("no available action has a finite payoff")
    top = np.max(np.where(finite, payoffs, -np.inf), axis=-1, keepdims=True)
    z = np.exp((payoffs - top) / xi)
    return z / z.sum(axis=-1, keepdims=True)


def maximisers(payoffs: np.ndarray) -> np.ndarray:
    """Boolean mask of the (near-)maximal entries along the last axis."""
    payoffs = np.asarray(payoffs, dtype=float)
    top = np.max(payoffs, axis=-1, keepdims=True)
    tol = TIE_RTOL * np.maximum(1.0, np.abs(top))
    return payoffs >= top - tol


def sample_index(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sample along the last axis using uniforms ``u`` in [0, 1)."""
    cdf = np.cumsum(probs, axis=-1)
    u = np.asarray(u)[..., None] * cdf[..., -1:]
    idx = (cdf <= u).sum(axis=-1)
    # guard against rounding past the last positive-probability action
    last = probs.shape[-1] - 1 - np.argmax(probs[..., ::-1] > 0, axis=-1)
    return np.minimum(idx, last)


def argmax_random_tie(payoffs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of a maximal entry, chosen uniformly among ties using ``u``."""
    mask = maximisers(payoffs)
    return sample_index(mask.astype(float), u)


def _payoff_vector(game: StrategicFormGame, player: int, opponent_strategies) -> np.ndarray:
    return np.array([
        expected_utility(game, player, a, opponent_strategies)
        for a in range(game.action_counts[player])
    ])


def best_response(game: StrategicFormGame, player: int, opponent_strategies,
                  rng: np.random.Generator) -> int:
    """A pure best response; ties are broken uniformly at random."""
    payoffs = _payoff_vector(game, player, opponent_strategies)
    return int(argmax_random_tie(payoffs, rng.random()))


def smooth_best_response(game: StrategicFormGame, player: int, opponent_strategies,
                         xi: float, rng: np.random.Generator):
    """Logit response distribution and one action sampled from it."""
    if not xi > 0:
        raise InputError("xi must be positive")
    payoffs = _payoff_vector(game, player, opponent_strategies)
    if not np.all(np.isfinite(payoffs)):
        raise NumericalDegeneracyError("expected payoffs must be finite")
    probs = logit(payoffs, xi)
    return probs, int(sample_index(probs, rng.random()))
