"""Strategic-form games, expected utilities and wonderful life utility.

Joint actions are integer index vectors. Payoffs are supplied as callables
so that large games never materialise the joint action space; small games
with an explicit payoff tensor use :class:`MatrixGame`, which also gives the
negotiation engine a vectorised expected-payoff evaluator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InputError

STRATEGY_ATOL = 1e-9
POTENTIAL_ATOL = 1e-9


def as_mixed_strategy(probs, atol: float = STRATEGY_ATOL) -> np.ndarray:
    """Validate ``probs`` as a probability vector and return it as floats.

    Entries must be non-negative and sum to one within ``atol``; the result is
    renormalised so the sum is exact up to rounding.
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InputError("a mixed strategy is a non-empty 1-d vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InputError(f"mixed strategy has negative or non-finite entries: {p}")
    total = p.sum()
    if abs(total - 1.0) > atol:
        raise InputError(f"mixed strategy sums to {total!r}, not 1")
    return p / total


def point_mass(n: int, action: int) -> np.ndarray:
    p = np.zeros(n)
    p[action] = 1.0
    return p


@dataclass
class StrategicFormGame:
    """A finite game given by a per-player payoff callable.

    Attributes:
        action_counts: number of pure actions of each player.
        utility: ``utility(player, joint) -> float``.
        global_utility: optional ``global_utility(joint) -> float`` recorded
            by the negotiation engine. Defaults to the sum of payoffs.
        equilibrium: optional joint action whose play probability is tracked.
    """

    action_counts: tuple
    utility: Callable[[int, tuple], float]
    global_utility: Optional[Callable[[tuple], float]] = None
    equilibrium: Optional[tuple] = None

    def __post_init__(self):
        self.action_counts = tuple(int(a) for a in self.action_counts)
        if len(self.action_counts) < 2:
            raise InputError("a game needs at least two players")
        if min(self.action_counts) < 1:
            raise InputError("every player needs at least one action")

    @property
    def num_players(self) -> int:
        return len(self.action_counts)

    @property
    def max_actions(self) -> int:
        return max(self.action_counts)

    def check_joint(self, joint) -> tuple:
        joint = tuple(int(a) for a in joint)
        if len(joint) != self.num_players:
            raise InputError(
                f"joint action has {len(joint)} entries, game has {self.num_players} players"
            )
        for i, (a, n) in enumerate(zip(joint, self.action_counts)):
            if not 0 <= a < n:
                raise InputError(f"action {a} of player {i} outside [0, {n})")
        return joint

    def check_player(self, player: int) -> int:
        if not 0 <= player < self.num_players:
            raise InputError(f"player {player} outside [0, {self.num_players})")
        return int(player)

    def joint_actions(self):
        return itertools.product(*(range(n) for n in self.action_counts))

    def global_value(self, joint) -> float:
        joint = self.check_joint(joint)
        if self.global_utility is not None:
            return float(self.global_utility(joint))
        return float(sum(self.utility(i, joint) for i in range(self.num_players)))

    def global_values(self, joints: np.ndarray) -> np.ndarray:
        """Global utility of each row of a ``(batch, players)`` array."""
        return np.array([self.global_value(row) for row in joints], dtype=float)

    def expected_payoffs(self, beliefs: np.ndarray) -> np.ndarray:
        """Expected payoff of every own action under every player's beliefs.

        Args:
            beliefs: ``(batch, observer, opponent, max_actions)`` strategies;
                the observer's own slot is ignored.

        Returns:
            ``(batch, players, max_actions)`` array; padded actions are -inf.
        """
        batch = beliefs.shape[0]
        n = self.num_players
        out = np.full((batch, n, self.max_actions), -np.inf)
        for b in range(batch):
            for i in range(n):
                opp = [beliefs[b, i, k, : self.action_counts[k]] for k in range(n) if k != i]
                for a in range(self.action_counts[i]):
                    out[b, i, a] = expected_utility(self, i, a, opp)
        return out


@dataclass
class MatrixGame(StrategicFormGame):
    """A game with an explicit payoff tensor per player.

    ``payoffs[i]`` has shape ``action_counts`` and holds player ``i``'s payoff
    for every joint action.
    """

    payoffs: Optional[np.ndarray] = None
    global_tensor: Optional[np.ndarray] = None

    @classmethod
    def from_payoffs(cls, payoffs, global_utility=None, equilibrium=None) -> "MatrixGame":
        payoffs = np.asarray(payoffs, dtype=float)
        counts = payoffs.shape[1:]
        if payoffs.shape[0] != len(counts):
            raise InputError("payoff array must have shape (players, *action_counts)")
        if not np.all(np.isfinite(payoffs)):
            raise InputError("payoffs must be finite")
        game = cls(
            action_counts=counts,
            utility=lambda i, s: float(payoffs[(i,) + tuple(s)]),
            global_utility=global_utility,
            equilibrium=equilibrium,
            payoffs=payoffs,
        )
        return game

    @classmethod
    def common_payoff(cls, tensor, equilibrium=None) -> "MatrixGame":
        """Identical-interest game where every player receives ``tensor``."""
        tensor = np.asarray(tensor, dtype=float)
        n = tensor.ndim
        game = cls.from_payoffs(np.broadcast_to(tensor, (n,) + tensor.shape).copy(),
                                equilibrium=equilibrium)
        game.global_tensor = tensor
        game.global_utility = lambda s: float(tensor[tuple(s)])
        return game

    def global_values(self, joints: np.ndarray) -> np.ndarray:
        joints = np.asarray(joints, dtype=int)
        if self.global_tensor is not None:
            return self.global_tensor[tuple(joints.T)].astype(float)
        if self.global_utility is not None:
            return np.array([self.global_utility(tuple(r)) for r in joints], dtype=float)
        idx = tuple(joints.T)
        return sum(self.payoffs[i][idx] for i in range(self.num_players))

    def expected_payoffs(self, beliefs: np.ndarray) -> np.ndarray:
        batch = beliefs.shape[0]
        n = self.num_players
        out = np.full((batch, n, self.max_actions), -np.inf)
        for i in range(n):
            x = np.broadcast_to(self.payoffs[i], (batch,) + self.payoffs[i].shape)
            # contract the highest axes first so lower axis numbers stay valid
            for k in reversed(range(n)):
                if k == i:
                    continue
                p = beliefs[:, i, k, : self.action_counts[k]]
                shape = [1] * x.ndim
                shape[0] = batch
                shape[k + 1] = self.action_counts[k]
                x = (x * p.reshape(shape)).sum(axis=k + 1)
            out[:, i, : self.action_counts[i]] = x
        return out


def evaluate_utility(game: StrategicFormGame, player: int, joint: Sequence[int]) -> float:
    """Payoff of ``player`` at a pure joint action."""
    player = game.check_player(player)
    return float(game.utility(player, game.check_joint(joint)))


def expected_utility(game: StrategicFormGame, player: int, own_action: int,
                     opponent_strategies: Sequence) -> float:
    """Expected payoff of a pure action against independent mixed opponents.

    ``opponent_strategies`` lists one mixed strategy per opponent, in player
    order with ``player`` skipped. The sum runs over the full opponent product
    space, so this is meant for small games.
    """
    player = game.check_player(player)
    if not 0 <= own_action < game.action_counts[player]:
        raise InputError(f"action {own_action} outside [0, {game.action_counts[player]})")
    opponents = [k for k in range(game.num_players) if k != player]
    if len(opponent_strategies) != len(opponents):
        raise InputError(
            f"expected {len(opponents)} opponent strategies, got {len(opponent_strategies)}"
        )
    strategies = []
    for k, sigma in zip(opponents, opponent_strategies):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (game.action_counts[k],):
            raise InputError(
                f"strategy for player {k} has shape {sigma.shape}, "
                f"expected ({game.action_counts[k]},)"
            )
        strategies.append(sigma)

    total = 0.0
    supports = [np.flatnonzero(s) for s in strategies]
    for combo in itertools.product(*supports):
        prob = 1.0
        for s, a in zip(strategies, combo):
            prob *= s[a]
        joint = list(combo)
        joint.insert(player, own_action)
        total += prob * game.utility(player, tuple(joint))
    return float(total)


@dataclass
class WluGame:
    """Wonderful life utility built from a global utility.

    A player's payoff is the global utility minus what the global utility
    would have been had the player used its reference action instead.
    """

    action_counts: tuple
    global_utility: Callable[[tuple], float]
    reference_actions: tuple
    _game: Optional[StrategicFormGame] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.action_counts = tuple(int(a) for a in self.action_counts)
        self.reference_actions = tuple(int(a) for a in self.reference_actions)
        if len(self.reference_actions) != len(self.action_counts):
            raise InputError("one reference action per player is required")
        for i, (a, n) in enumerate(zip(self.reference_actions, self.action_counts)):
            if not 0 <= a < n:
                raise InputError(f"reference action {a} of player {i} outside [0, {n})")

    def payoff(self, player: int, joint: tuple) -> float:
        ref = list(joint)
        ref[player] = self.reference_actions[player]
        return float(self.global_utility(tuple(joint)) - self.global_utility(tuple(ref)))

    def as_game(self) -> StrategicFormGame:
        if self._game is None:
            self._game = StrategicFormGame(
                action_counts=self.action_counts,
                utility=self.payoff,
                global_utility=self.global_utility,
            )
        return self._game


def wlu_payoff(wlu: WluGame, player: int, joint: Sequence[int]) -> float:
    game = wlu.as_game()
    player = game.check_player(player)
    return wlu.payoff(player, game.check_joint(joint))


def _deviation_gap(game, potential, player, joint, alt) -> float:
    dev = list(joint)
    dev[player] = alt
    dev = tuple(dev)
    du = game.utility(player, joint) - game.utility(player, dev)
    dphi = potential(joint) - potential(dev)
    return abs(du - dphi)


def check_potential_identity(game: StrategicFormGame, potential: Callable[[tuple], float],
                             samples: int, rng_seed: int, atol: float = POTENTIAL_ATOL):
    """Spot-check the exact potential identity on random unilateral deviations.

    Returns:
        ``(passed, max_violation)`` over ``samples`` random
        (player, joint action, deviation) triples.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    for _ in range(samples):
        player = int(rng.integers(game.num_players))
        joint = tuple(int(rng.integers(n)) for n in game.action_counts)
        alt = int(rng.integers(game.action_counts[player]))
        worst = max(worst, _deviation_gap(game, potential, player, joint, alt))
    return worst <= atol, worst


def potential_violation(game: StrategicFormGame, potential: Callable[[tuple], float]) -> float:
    """Largest potential-identity violation over every unilateral deviation."""
    worst = 0.0
    for joint in game.joint_actions():
        for i in range(game.num_players):
            for alt in range(game.action_counts[i]):
                if alt != joint[i]:
                    worst = max(worst, _deviation_gap(game, potential, i, joint, alt))
    return worst
