"""Repeated synchronous play ("negotiation") between belief-learning players.

Every round each player picks an action from its current beliefs, the joint
action is revealed to everyone, and every player updates one belief per
opponent. All players use the same learning algorithm within a run.

Replications of the same game are simulated in lock-step as a batch, which
is what keeps thousand-replication runs of small games cheap. Each
replication draws from its own random streams, so a replication's trace does
not depend on which batch it was run in.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .beliefs import DEFAULT_LAMBDA_BOUNDS, afffp_step
from .decision import BEST_RESPONSE, SMOOTH_BEST_RESPONSE, argmax_random_tie, logit, maximisers, sample_index
from .errors import InputError, NumericalDegeneracyError, RunFailure

CLASSIC = "classic"
STOCHASTIC = "stochastic"
GEOMETRIC = "geometric"
AFFFP = "afffp"
ALGORITHMS = (CLASSIC, STOCHASTIC, GEOMETRIC, AFFFP)

_DEFAULT_DECISION = {
    CLASSIC: BEST_RESPONSE,
    STOCHASTIC: SMOOTH_BEST_RESPONSE,
    GEOMETRIC: SMOOTH_BEST_RESPONSE,
    AFFFP: SMOOTH_BEST_RESPONSE,
}

# replications simulated together; bounds memory for long traces
BATCH_SIZE = 250


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = AFFFP
    steps: int = 1000
    xi: float = 1.0
    z: float = 0.1
    gamma: float = 1e-4
    lambda0: float = 0.8
    lambda_bounds: tuple = DEFAULT_LAMBDA_BOUNDS
    seed: int = 0
    decision: Optional[str] = None
    # total prior weight per belief, spread evenly; None means one per action
    prior_mass: Optional[float] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InputError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.steps < 1:
            raise InputError("steps must be >= 1")
        if self.decision_rule == SMOOTH_BEST_RESPONSE and not self.xi > 0:
            raise InputError("xi must be positive")
        if self.algorithm == GEOMETRIC and not 0 < self.z < 1:
            raise InputError("z must lie in (0, 1)")
        if self.algorithm == AFFFP:
            lo, hi = self.lambda_bounds
            if not 0 <= lo <= hi <= 1:
                raise InputError("lambda bounds must satisfy 0 <= lo <= hi <= 1")
            if self.gamma < 0:
                raise InputError("gamma must be non-negative")
        if self.seed < 0:
            raise InputError("seed must be non-negative")
        if self.prior_mass is not None and not self.prior_mass > 0:
            raise InputError("prior_mass must be positive")
        object.__setattr__(self, "lambda_bounds", tuple(float(b) for b in self.lambda_bounds))

    @property
    def decision_rule(self) -> str:
        return self.decision or _DEFAULT_DECISION[self.algorithm]

    def replace(self, **changes) -> "RunConfig":
        data = asdict(self)
        data.update(changes)
        return RunConfig(**data)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["lambda_bounds"] = list(self.lambda_bounds)
        return data


def replication_seed(seed: int, replication: int) -> int:
    """``H(seed) xor replication`` where ``H`` spreads the master seed over 64 bits.

    Plain ``seed xor r`` would make small master seeds permute one shared set
    of replication seeds, so their replicated summaries would coincide.
    """
    base = int(np.random.SeedSequence(int(seed)).generate_state(1, np.uint64)[0])
    return base ^ int(replication)


def player_uniforms(seed: int, num_players: int, steps: int) -> np.ndarray:
    """``(players, steps)`` uniforms; column ``t`` drives each player's draw at step ``t``."""
    return np.stack([
        np.random.default_rng([seed, player]).random(steps)
        for player in range(num_players)
    ])


class BeliefBank:
    """Beliefs of every observer about every opponent, for a batch of runs.

    Arrays are indexed ``[batch, observer, opponent, action]``. Actions beyond
    an opponent's action count are padding with zero weight. The diagonal
    (a player's belief about itself) is carried along and never read.
    """

    def __init__(self, config: RunConfig, action_counts: Sequence[int], batch: int):
        self.config = config
        players = len(action_counts)
        width = max(action_counts)
        valid = np.arange(width)[None, :] < np.asarray(action_counts)[:, None]
        self.valid = np.broadcast_to(valid, (batch, players, players, width))
        shape = (batch, players, players, width)
        uniform = valid / valid.sum(axis=1, keepdims=True)
        self.algorithm = config.algorithm
        if self.algorithm == GEOMETRIC:
            self.sigma = np.broadcast_to(uniform, shape).copy()
        else:
            self.kappa = self.valid.astype(float)
            if config.prior_mass is not None:
                self.kappa = np.broadcast_to(uniform * config.prior_mass, shape).copy()
        if self.algorithm == AFFFP:
            self.n = self.kappa.sum(axis=-1)
            lo, hi = config.lambda_bounds
            self.lam = np.full(shape[:3], min(max(config.lambda0, lo), hi))
            self.dkappa = np.zeros(shape)
            self.dn = np.zeros(shape[:3])

    def strategies(self) -> np.ndarray:
        if self.algorithm == GEOMETRIC:
            return self.sigma
        if self.algorithm == AFFFP:
            return self.kappa / self.n[..., None]
        return self.kappa / self.kappa.sum(axis=-1, keepdims=True)

    def update(self, actions: np.ndarray) -> None:
        """Every observer absorbs the joint action ``actions`` (``[batch, player]``)."""
        batch, players = actions.shape
        width = self.valid.shape[-1]
        onehot = (np.arange(width) == actions[:, :, None]).astype(float)
        onehot = np.broadcast_to(onehot[:, None, :, :], (batch, players, players, width))
        if self.algorithm in (CLASSIC, STOCHASTIC):
            self.kappa = self.kappa + onehot
        elif self.algorithm == GEOMETRIC:
            z = self.config.z
            self.sigma = self.sigma * (1.0 - z) + z * onehot
        else:
            self._afffp_update(actions)

    def _afffp_update(self, actions):
        observed = np.broadcast_to(actions[:, None, :], self.lam.shape)
        lo, hi = self.config.lambda_bounds
        try:
            self.kappa, self.n, self.lam, self.dkappa, self.dn, _ = afffp_step(
                self.kappa, self.n, self.lam, self.dkappa, self.dn, observed,
                self.config.gamma, lo, hi,
            )
        except NumericalDegeneracyError as exc:
            row, observer, opponent = exc.index
            raise _Degenerate(row, observer, opponent) from exc


class _Degenerate(NumericalDegeneracyError):
    def __init__(self, row, observer, opponent):
        super().__init__(
            f"observer {observer} gives zero weight to the action played by {opponent}"
        )
        self.row = row


@dataclass
class NegotiationTrace:
    """Record of one episode.

    ``lambdas[t, i, j]`` is observer ``i``'s forgetting factor for opponent
    ``j`` after the update of step ``t`` (AFFFP only). ``equilibrium_probability``
    is the probability, under the players' response distributions, of the
    game's designated equilibrium at each step (when the game has one).
    """

    joint_actions: np.ndarray
    global_utility: np.ndarray
    lambdas: Optional[np.ndarray] = None
    equilibrium_probability: Optional[np.ndarray] = None
    config: dict = field(default_factory=dict)
    replication: int = 0

    @property
    def steps(self) -> int:
        return len(self.global_utility)

    @property
    def final_joint(self) -> tuple:
        return tuple(int(a) for a in self.joint_actions[-1])

    @property
    def mean_payoff(self) -> float:
        return float(np.mean(self.global_utility))

    def to_csv(self) -> str:
        players = self.joint_actions.shape[1]
        header = ["step"] + [f"action_{i}" for i in range(players)] + ["global_utility"]
        pairs = [(i, j) for i in range(players) for j in range(players) if i != j]
        if self.equilibrium_probability is not None:
            header.append("equilibrium_probability")
        if self.lambdas is not None:
            header += [f"lambda_{i}_{j}" for i, j in pairs]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for t in range(self.steps):
            row = [t + 1] + [int(a) for a in self.joint_actions[t]] + [repr(float(self.global_utility[t]))]
            if self.equilibrium_probability is not None:
                row.append(repr(float(self.equilibrium_probability[t])))
            if self.lambdas is not None:
                row += [repr(float(self.lambdas[t, i, j])) for i, j in pairs]
            writer.writerow(row)
        return buf.getvalue()


def _simulate(game, config: RunConfig, replications: Sequence[int],
              record_lambdas: bool = True) -> list:
    batch = len(replications)
    players = game.num_players
    steps = config.steps
    uniforms = np.stack([
        player_uniforms(replication_seed(config.seed, r), players, steps) for r in replications
    ])
    bank = BeliefBank(config, game.action_counts, batch)
    equilibrium = getattr(game, "equilibrium", None)
    smooth = config.decision_rule == SMOOTH_BEST_RESPONSE

    joints = np.empty((batch, steps, players), dtype=np.int64)
    utilities = np.empty((batch, steps))
    eq_prob = np.empty((batch, steps)) if equilibrium is not None else None
    keep_lam = record_lambdas and config.algorithm == AFFFP
    lambdas = np.empty((batch, steps, players, players)) if keep_lam else None

    for t in range(steps):
        try:
            payoffs = game.expected_payoffs(bank.strategies())
            u = uniforms[:, :, t]
            if smooth:
                probs = logit(payoffs, config.xi)
                actions = sample_index(probs, u)
            else:
                actions = argmax_random_tie(payoffs, u)
                probs = maximisers(payoffs).astype(float)
                probs /= probs.sum(axis=-1, keepdims=True)
            bank.update(actions)
        except _Degenerate as exc:
            raise RunFailure(str(exc), step=t + 1, replication=replications[exc.row]) from exc
        except NumericalDegeneracyError as exc:
            raise RunFailure(str(exc), step=t + 1,
                             replication=replications[0] if batch == 1 else None) from exc
        joints[:, t] = actions
        utilities[:, t] = game.global_values(actions)
        if eq_prob is not None:
            eq_prob[:, t] = np.prod(probs[:, np.arange(players), list(equilibrium)], axis=1)
        if keep_lam:
            lambdas[:, t] = bank.lam

    cfg = config.to_dict()
    return [
        NegotiationTrace(
            joint_actions=joints[b],
            global_utility=utilities[b],
            lambdas=lambdas[b] if keep_lam else None,
            equilibrium_probability=eq_prob[b] if eq_prob is not None else None,
            config=cfg,
            replication=r,
        )
        for b, r in enumerate(replications)
    ]


def run_episode(game, config: RunConfig, replication: int = 0,
                record_lambdas: bool = True) -> NegotiationTrace:
    """Play ``config.steps`` synchronous rounds of ``game``.

    The episode is a pure function of ``(game, config, replication)``.
    """
    return _simulate(game, config, [replication], record_lambdas)[0]


@dataclass
class ReplicationSummary:
    mean_payoffs: np.ndarray
    traces: Optional[list] = None

    @property
    def overall_mean(self) -> float:
        return float(np.mean(self.mean_payoffs))

    @property
    def std(self) -> float:
        return float(np.std(self.mean_payoffs, ddof=1)) if len(self.mean_payoffs) > 1 else 0.0

    def to_records(self) -> list:
        return [{"replication": r, "mean_payoff": float(m)} for r, m in enumerate(self.mean_payoffs)]


def run_replications(game: Union[object, Callable[[int], object]], config: RunConfig,
                     replications: int, keep_traces: bool = False,
                     record_lambdas: bool = False) -> ReplicationSummary:
    """Run independent episodes and summarise their mean payoffs.

    ``game`` is either a game shared by all replications or a callable
    mapping a replication index to that replication's game. Replication
    ``r`` is seeded from :func:`replication_seed`.
    """
    if replications < 1:
        raise InputError("replications must be >= 1")
    traces = []
    if callable(game) and not hasattr(game, "expected_payoffs"):
        for r in range(replications):
            traces += _simulate(game(r), config, [r], record_lambdas)
    else:
        for start in range(0, replications, BATCH_SIZE):
            chunk = list(range(start, min(start + BATCH_SIZE, replications)))
            traces += _simulate(game, config, chunk, record_lambdas)
    means = np.array([tr.mean_payoff for tr in traces])
    return ReplicationSummary(mean_payoffs=means, traces=traces if keep_traces else None)
