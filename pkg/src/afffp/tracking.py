"""Single-opponent tracking experiments.

A scripted opponent plays one of two actions with a time-varying probability
and an estimator tries to follow it. The error measure is the squared error
of the estimated probability of action 0, taken after each update and
averaged over the horizon.

:func:`run_sweep` evaluates a whole grid of AFFFP settings at once. All cells
see the same opponent action streams (repetition ``r`` uses the same stream
in every cell), so differences between cells come from the estimator alone.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .beliefs import DEFAULT_LAMBDA_BOUNDS, AfffpBelief, GeometricFpBelief, afffp_step
from .errors import InputError, NumericalDegeneracyError, RunFailure

DRIFT = "drift"
JUMP = "jump"
CUSTOM = "custom"

AFFFP = "afffp"
CLASSIC = "classic"
GEOMETRIC = "geometric"


@dataclass(frozen=True)
class ScriptedOpponent:
    """Binary opponent whose probability of action 0 follows a script.

    ``drift`` uses ``(cos(2 pi t / period) + 1) / 2``. ``jump`` is piecewise
    constant: ``boundaries`` are the first steps of segments 2, 3, ... and
    ``levels`` hold one probability per segment. ``custom`` takes an explicit
    ``probabilities`` array. Steps are numbered from 1.
    """

    kind: str = DRIFT
    horizon: int = 1000
    period: float = 1000.0
    boundaries: tuple = (251, 751)
    levels: tuple = (1.0, 0.0, 1.0)
    probabilities: Optional[tuple] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise InputError("horizon must be >= 1")
        if self.kind == DRIFT:
            if not self.period > 0:
                raise InputError("period must be positive")
        elif self.kind == JUMP:
            if len(self.levels) != len(self.boundaries) + 1:
                raise InputError("jump schedule needs one level per segment")
            if list(self.boundaries) != sorted(self.boundaries):
                raise InputError("jump boundaries must be increasing")
            if any(not 0.0 <= p <= 1.0 for p in self.levels):
                raise InputError("jump levels must lie in [0, 1]")
        elif self.kind == CUSTOM:
            if self.probabilities is None or len(self.probabilities) != self.horizon:
                raise InputError("custom opponent needs one probability per step")
            if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
                raise InputError("custom probabilities must lie in [0, 1]")
        else:
            raise InputError(f"unknown opponent kind {self.kind!r}")

    @classmethod
    def drift(cls, period: float = 1000.0, horizon: int = 1000) -> "ScriptedOpponent":
        return cls(kind=DRIFT, horizon=horizon, period=period)

    @classmethod
    def jump(cls, horizon: int = 1000, boundaries=(251, 751),
             levels=(1.0, 0.0, 1.0)) -> "ScriptedOpponent":
        return cls(kind=JUMP, horizon=horizon, boundaries=tuple(boundaries), levels=tuple(levels))

    @classmethod
    def custom(cls, probabilities) -> "ScriptedOpponent":
        probs = tuple(float(p) for p in probabilities)
        return cls(kind=CUSTOM, horizon=len(probs), probabilities=probs)

    def probability(self, t) -> np.ndarray:
        """Probability of action 0 at step(s) ``t`` (1-based)."""
        t = np.asarray(t)
        if self.kind == DRIFT:
            return (np.cos(2.0 * np.pi * t / self.period) + 1.0) / 2.0
        if self.kind == JUMP:
            segment = np.searchsorted(np.asarray(self.boundaries), t, side="right")
            return np.asarray(self.levels, dtype=float)[segment]
        return np.asarray(self.probabilities, dtype=float)[t - 1]

    def schedule(self) -> np.ndarray:
        return self.probability(np.arange(1, self.horizon + 1))

    def actions(self, seed) -> np.ndarray:
        """Sampled action stream; action 0 is played when the uniform falls below its probability."""
        u = np.random.default_rng(seed).random(self.horizon)
        return (u >= self.schedule()).astype(np.int64)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["boundaries"] = list(self.boundaries)
        data["levels"] = list(self.levels)
        if self.probabilities is not None:
            data["probabilities"] = list(self.probabilities)
        return data


@dataclass(frozen=True)
class EstimatorConfig:
    algorithm: str = AFFFP
    lambda0: float = 0.8
    gamma: float = 1e-4
    lambda_bounds: tuple = DEFAULT_LAMBDA_BOUNDS
    z: float = 0.1

    def __post_init__(self):
        if self.algorithm not in (AFFFP, CLASSIC, GEOMETRIC):
            raise InputError(f"unknown estimator {self.algorithm!r}")
        object.__setattr__(self, "lambda_bounds", tuple(float(b) for b in self.lambda_bounds))

    def build(self):
        if self.algorithm == GEOMETRIC:
            return GeometricFpBelief(2, z=self.z)
        if self.algorithm == CLASSIC:
            return AfffpBelief(2, lambda0=1.0, gamma=0.0, bounds=(1.0, 1.0))
        return AfffpBelief(2, lambda0=self.lambda0, gamma=self.gamma, bounds=self.lambda_bounds)


@dataclass
class TrackingResult:
    mse: float
    lambdas: Optional[np.ndarray]
    estimates: np.ndarray
    truth: np.ndarray
    actions: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["step", "action", "true_p0", "estimate_p0"]
        if self.lambdas is not None:
            header.append("lambda")
        writer.writerow(header)
        for t in range(len(self.truth)):
            row = [t + 1, int(self.actions[t]), repr(float(self.truth[t])),
                   repr(float(self.estimates[t]))]
            if self.lambdas is not None:
                row.append(repr(float(self.lambdas[t])))
            writer.writerow(row)
        return buf.getvalue()


def run_tracking(opponent: ScriptedOpponent, estimator, seed: int = 0) -> TrackingResult:
    """Track ``opponent`` with one estimator.

    ``estimator`` is an :class:`EstimatorConfig` or a zero-argument callable
    returning any object with ``update(action)`` and ``strategy()``. With
    very small forgetting factors the weight of an action that has not been
    seen for a long time can underflow to zero; that raises
    :class:`RunFailure` with the step.
    """
    belief = estimator.build() if isinstance(estimator, EstimatorConfig) else estimator()
    truth = opponent.schedule()
    actions = opponent.actions(seed)
    estimates = np.empty(opponent.horizon)
    has_lambda = hasattr(belief, "lam")
    lambdas = np.empty(opponent.horizon) if has_lambda else None
    for t, a in enumerate(actions):
        try:
            belief.update(int(a))
        except NumericalDegeneracyError as exc:
            raise RunFailure(str(exc), step=t + 1) from exc
        estimates[t] = belief.strategy()[0]
        if has_lambda:
            lambdas[t] = belief.lam
    mse = float(np.mean((estimates - truth) ** 2))
    return TrackingResult(mse, lambdas, estimates, truth, actions)


@dataclass(frozen=True)
class SweepGrid:
    gammas: tuple = field(default_factory=lambda: tuple(np.logspace(-6, -1, 26)))
    lambda0s: tuple = field(default_factory=lambda: tuple(np.linspace(0.1, 1.0, 19)))
    repetitions: int = 100
    lambda_bounds: tuple = DEFAULT_LAMBDA_BOUNDS

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "lambda0s", tuple(float(v) for v in self.lambda0s))
        if not self.gammas or not self.lambda0s:
            raise InputError("sweep grid must be nonempty")
        if self.repetitions < 1:
            raise InputError("repetitions must be >= 1")
        if any(g < 0 for g in self.gammas):
            raise InputError("gamma values must be non-negative")
        if any(not 0.0 < v <= 1.0 for v in self.lambda0s):
            raise InputError("lambda0 values must lie in (0, 1]")

    @classmethod
    def reduced(cls, repetitions: int = 30) -> "SweepGrid":
        return cls(tuple(np.logspace(-6, -1, 10)), tuple(np.linspace(0.1, 1.0, 10)), repetitions)

    def to_dict(self) -> dict:
        return {"gammas": list(self.gammas), "lambda0s": list(self.lambda0s),
                "repetitions": self.repetitions, "lambda_bounds": list(self.lambda_bounds)}


@dataclass
class SweepResult:
    grid: SweepGrid
    mse: np.ndarray            # (gammas, lambda0s)
    classic_mse: float         # lambda pinned to 1, same streams

    @property
    def degenerate_cells(self) -> int:
        return int(np.isnan(self.mse).sum())

    def argmin(self) -> tuple:
        g, l = np.unravel_index(int(np.nanargmin(self.mse)), self.mse.shape)
        return self.grid.gammas[g], self.grid.lambda0s[l]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["gamma"] + [repr(v) for v in self.grid.lambda0s])
        for g, row in zip(self.grid.gammas, self.mse):
            writer.writerow([repr(g)] + [repr(float(x)) for x in row])
        return buf.getvalue()


def repetition_actions(opponent: ScriptedOpponent, master_seed: int, repetitions: int) -> np.ndarray:
    """``(repetitions, horizon)`` action streams shared by every sweep cell."""
    return np.stack([opponent.actions([master_seed, r]) for r in range(repetitions)])


def sweep_mse(gammas, lambda0s, actions: np.ndarray, truth: np.ndarray,
              bounds=DEFAULT_LAMBDA_BOUNDS) -> np.ndarray:
    """Mean squared tracking error of every (gamma, lambda0) pair on the given streams.

    Returns an array of shape ``(len(gammas), len(lambda0s))``. All cells and
    repetitions advance together through the shared update kernel. A cell is
    NaN when, in some repetition, the weight of an action underflowed to zero
    before that action was observed again.
    """
    gammas = np.asarray(gammas, dtype=float)
    lambda0s = np.asarray(lambda0s, dtype=float)
    reps, horizon = actions.shape
    shape = (len(gammas), len(lambda0s), reps)
    lo, hi = (float(b) for b in bounds)
    kappa = np.ones(shape + (2,))
    n = np.full(shape, 2.0)
    lam = np.broadcast_to(np.clip(lambda0s, lo, hi)[None, :, None], shape).copy()
    dkappa = np.zeros(shape + (2,))
    dn = np.zeros(shape)
    gamma = gammas[:, None, None]
    err = np.zeros(shape)
    for t in range(horizon):
        observed = np.broadcast_to(actions[None, None, :, t], shape)
        kappa, n, lam, dkappa, dn, _ = afffp_step(kappa, n, lam, dkappa, dn, observed, gamma, lo, hi,
                                                 strict=False)
        err += (kappa[..., 0] / n - truth[t]) ** 2
    return (err / horizon).mean(axis=-1)


def run_sweep(grid: SweepGrid, opponent: ScriptedOpponent, master_seed: int = 0) -> SweepResult:
    """Average tracking MSE over ``grid`` with common random numbers across cells."""
    actions = repetition_actions(opponent, master_seed, grid.repetitions)
    truth = opponent.schedule()
    mse = sweep_mse(grid.gammas, grid.lambda0s, actions, truth, grid.lambda_bounds)
    classic = sweep_mse([0.0], [1.0], actions, truth, (1.0, 1.0))[0, 0]
    return SweepResult(grid, mse, float(classic))
