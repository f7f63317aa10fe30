"""Opponent-strategy estimators.

Each estimator tracks one opponent's mixed strategy from the stream of
actions that opponent plays. Three update rules are provided:

* :class:`ClassicFpBelief` - empirical frequencies with prior weights.
* :class:`GeometricFpBelief` - exponential smoothing with fixed step ``z``.
* :class:`AfffpBelief` - discounted frequencies whose forgetting factor is
  adapted online by gradient ascent on the log-likelihood of each newly
  observed action.

The engine in :mod:`afffp.engine` runs the same recursions vectorised over
all (observer, opponent) pairs; these classes are the reference versions.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError, NumericalDegeneracyError

DEFAULT_LAMBDA_BOUNDS = (0.001, 0.999)


def _check_action(action, num_actions):
    if not 0 <= action < num_actions:
        raise InputError(f"observed action {action} outside [0, {num_actions})")
    return int(action)


def afffp_step(kappa, n, lam, dkappa, dn, observed, gamma, lo, hi, strict=True):
    """One adaptive-forgetting update, vectorised over leading axes.

    ``kappa`` and ``dkappa`` carry actions on the last axis; ``n``, ``lam``,
    ``dn`` and ``observed`` have the leading shape. ``gamma`` may be a scalar
    or broadcast against ``lam``. With ``strict=False`` degenerate positions
    are not reported; their gradient and forgetting factor become NaN.

    Returns:
        ``(kappa, n, lam, dkappa, dn, gradient)`` after the observation.

    Raises:
        NumericalDegeneracyError: some observed action has zero weight. The
            exception's ``index`` attribute holds the first offending position.
    """
    idx = np.asarray(observed)[..., None]
    k_obs = np.take_along_axis(kappa, idx, axis=-1)[..., 0]
    if strict and not np.all(k_obs > 0):
        bad = tuple(int(i) for i in np.argwhere(~(k_obs > 0))[0]) if k_obs.ndim else ()
        err = NumericalDegeneracyError(
            "observed action has zero weight; log-likelihood gradient undefined"
        )
        err.index = bad
        raise err
    with np.errstate(divide="ignore", invalid="ignore"):
        grad = np.take_along_axis(dkappa, idx, axis=-1)[..., 0] / k_obs - dn / n
    if not strict:
        grad = np.where(k_obs > 0, grad, np.nan)
    onehot = np.arange(kappa.shape[-1]) == idx
    new_dkappa = kappa + lam[..., None] * dkappa
    new_dn = n + lam * dn
    new_kappa = lam[..., None] * kappa + onehot
    new_n = lam * n + 1.0
    new_lam = np.clip(lam + gamma * grad, lo, hi)
    return new_kappa, new_n, new_lam, new_dkappa, new_dn, grad


class ClassicFpBelief:
    """Fictitious play belief: cumulative action counts plus a prior."""

    def __init__(self, num_actions: int, kappa0=None):
        if kappa0 is None:
            kappa0 = np.ones(num_actions)
        self.kappa = np.array(kappa0, dtype=float)
        if self.kappa.shape != (num_actions,) or np.any(self.kappa < 0):
            raise InputError("kappa0 must be a non-negative vector of length num_actions")
        if self.kappa.sum() <= 0:
            raise InputError("kappa0 must have positive total weight")

    @property
    def num_actions(self) -> int:
        return self.kappa.size

    def update(self, observed: int) -> None:
        self.kappa[_check_action(observed, self.num_actions)] += 1.0

    def strategy(self) -> np.ndarray:
        return self.kappa / self.kappa.sum()


class GeometricFpBelief:
    """Geometric fictitious play: ``sigma <- (1 - z) sigma + z e_observed``."""

    def __init__(self, num_actions: int, z: float = 0.1, sigma0=None):
        if not 0.0 < z < 1.0:
            raise InputError(f"z must lie in (0, 1), got {z}")
        self.z = float(z)
        if sigma0 is None:
            sigma0 = np.full(num_actions, 1.0 / num_actions)
        self.sigma = np.array(sigma0, dtype=float)
        if self.sigma.shape != (num_actions,):
            raise InputError("sigma0 must have length num_actions")

    @property
    def num_actions(self) -> int:
        return self.sigma.size

    def update(self, observed: int) -> None:
        observed = _check_action(observed, self.num_actions)
        self.sigma *= 1.0 - self.z
        self.sigma[observed] += self.z

    def strategy(self) -> np.ndarray:
        return self.sigma.copy()


class AfffpBelief:
    """Adaptive forgetting factor belief about a single opponent.

    State is the discounted weight vector ``kappa``, its normaliser ``n``, the
    forgetting factor ``lam`` and the derivatives of ``kappa`` and ``n`` with
    respect to ``lam``. Each :meth:`update` performs, in order:

    1. gradient of ``log(kappa[s] / n)`` w.r.t. ``lam`` from the state held
       before the observation ``s`` arrived;
    2. derivative recursions ``dkappa <- kappa + lam * dkappa`` and
       ``dn <- n + lam * dn``;
    3. weight recursions ``kappa <- lam * kappa + e_s`` and ``n <- lam * n + 1``;
    4. ``lam <- clip(lam + gamma * gradient, *bounds)``.

    With ``gamma = 0`` the factor stays fixed and the belief is a discounted
    frequency estimate; with ``bounds = (1, 1)`` it is classic fictitious play.
    """

    def __init__(self, num_actions: int, lambda0: float = 0.8, gamma: float = 1e-4,
                 bounds=DEFAULT_LAMBDA_BOUNDS, kappa0=None, n0=None):
        lo, hi = (float(b) for b in bounds)
        if not 0.0 <= lo <= hi <= 1.0:
            raise InputError(f"lambda bounds must satisfy 0 <= lo <= hi <= 1, got {bounds}")
        if gamma < 0:
            raise InputError("gamma must be non-negative")
        if kappa0 is None:
            kappa0 = np.ones(num_actions)
        self.kappa = np.array(kappa0, dtype=float)
        if self.kappa.shape != (num_actions,) or np.any(self.kappa < 0):
            raise InputError("kappa0 must be a non-negative vector of length num_actions")
        self.n = float(self.kappa.sum()) if n0 is None else float(n0)
        if self.n <= 0:
            raise InputError("initial normaliser must be positive")
        self.dkappa = np.zeros(num_actions)
        self.dn = 0.0
        self.gamma = float(gamma)
        self.bounds = (lo, hi)
        self.lam = min(max(float(lambda0), lo), hi)
        self.last_gradient = 0.0

    @classmethod
    def stationary(cls, sigma0, lam: float, gamma: float = 0.0,
                   bounds=DEFAULT_LAMBDA_BOUNDS) -> "AfffpBelief":
        """Start at the fixed point ``n = 1 / (1 - lam)`` with ``kappa = n * sigma0``.

        With ``gamma = 0`` the resulting strategies coincide with geometric
        fictitious play using ``z = 1 - lam``.
        """
        sigma0 = np.asarray(sigma0, dtype=float)
        n0 = 1.0 / (1.0 - lam)
        return cls(sigma0.size, lambda0=lam, gamma=gamma, bounds=bounds,
                   kappa0=sigma0 * n0, n0=n0)

    @property
    def num_actions(self) -> int:
        return self.kappa.size

    def log_likelihood(self, action: int) -> float:
        """Log-probability the current belief assigns to ``action``."""
        action = _check_action(action, self.num_actions)
        if self.kappa[action] <= 0:
            return -math.inf
        return math.log(self.kappa[action]) - math.log(self.n)

    def gradient(self, observed: int) -> float:
        """d/d(lam) of the log-likelihood of ``observed`` under the current state."""
        observed = _check_action(observed, self.num_actions)
        k = self.kappa[observed]
        if not k > 0:
            raise NumericalDegeneracyError(
                f"weight of observed action {observed} is {k}; log-likelihood gradient undefined"
            )
        return float(self.dkappa[observed] / k - self.dn / self.n)

    def update(self, observed: int) -> float:
        """Absorb one observation; returns the log-likelihood gradient used."""
        observed = _check_action(observed, self.num_actions)
        kappa, n, lam, dkappa, dn, g = afffp_step(
            self.kappa, np.float64(self.n), np.float64(self.lam), self.dkappa,
            np.float64(self.dn), np.int64(observed), self.gamma, *self.bounds,
        )
        self.kappa, self.dkappa = kappa, dkappa
        self.n, self.lam, self.dn = float(n), float(lam), float(dn)
        self.last_gradient = float(g)
        return self.last_gradient

    def strategy(self) -> np.ndarray:
        return self.kappa / self.n

    def to_record(self) -> dict:
        return {
            "kappa": self.kappa.tolist(),
            "n": self.n,
            "lambda": self.lam,
            "dkappa": self.dkappa.tolist(),
            "dn": self.dn,
            "gamma": self.gamma,
            "bounds": list(self.bounds),
        }

    @classmethod
    def from_record(cls, record: dict) -> "AfffpBelief":
        belief = cls(len(record["kappa"]), lambda0=record["lambda"], gamma=record["gamma"],
                     bounds=record["bounds"], kappa0=record["kappa"], n0=record["n"])
        belief.dkappa = np.array(record["dkappa"], dtype=float)
        belief.dn = float(record["dn"])
        return belief


def strategy(belief) -> np.ndarray:
    """Current mixed-strategy estimate of any of the three belief types."""
    return belief.strategy()
