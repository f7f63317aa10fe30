"""Vehicle-target assignment.

Each vehicle picks one target; a target is destroyed unless every vehicle
engaging it misses, and vehicles miss independently. Vehicles are paid the
wonderful life utility of the summed expected target value, with each
vehicle's greedy target (largest ``V_j p_ij``) as its reference action.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..game import StrategicFormGame

# keeps 1/d finite when a vehicle sits on a target
MIN_DISTANCE = 1e-12


@dataclass(frozen=True)
class VtaInstance:
    vehicle_positions: np.ndarray
    target_positions: np.ndarray
    values: np.ndarray
    kill_probabilities: np.ndarray

    def __post_init__(self):
        p = self.kill_probabilities
        if p.shape != (len(self.vehicle_positions), len(self.target_positions)):
            raise InputError("kill_probabilities must be (vehicles, targets)")
        if self.values.shape != (len(self.target_positions),):
            raise InputError("one value per target is required")
        if np.any(p <= 0) or np.any(p > 1):
            raise InputError("kill probabilities must lie in (0, 1]")

    @property
    def num_vehicles(self) -> int:
        return self.kill_probabilities.shape[0]

    @property
    def num_targets(self) -> int:
        return self.kill_probabilities.shape[1]

    def greedy_actions(self) -> np.ndarray:
        return np.argmax(self.values[None, :] * self.kill_probabilities, axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": "vta",
            "vehicle_positions": self.vehicle_positions.tolist(),
            "target_positions": self.target_positions.tolist(),
            "values": self.values.tolist(),
            "kill_probabilities": self.kill_probabilities.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VtaInstance":
        if data.get("kind", "vta") != "vta":
            raise InputError(f"not a VTA instance: kind={data.get('kind')!r}")
        return cls(
            vehicle_positions=np.asarray(data["vehicle_positions"], dtype=float).reshape(-1, 2),
            target_positions=np.asarray(data["target_positions"], dtype=float).reshape(-1, 2),
            values=np.asarray(data["values"], dtype=float),
            kill_probabilities=np.asarray(data["kill_probabilities"], dtype=float),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def kill_probabilities_from_positions(vehicles: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """``p_ij`` proportional to ``1/d_ij``, scaled so each vehicle's nearest target has 1."""
    d = np.linalg.norm(vehicles[:, None, :] - targets[None, :, :], axis=-1)
    d = np.maximum(d, MIN_DISTANCE)
    return np.minimum(1.0, d.min(axis=1, keepdims=True) / d)


def generate_vta(seed: int, vehicles: int = 30, targets: int = 30) -> VtaInstance:
    if vehicles < 1 or targets < 1:
        raise InputError("need at least one vehicle and one target")
    rng = np.random.default_rng(seed)
    vpos = rng.random((vehicles, 2))
    tpos = rng.random((targets, 2))
    values = rng.uniform(0.0, 100.0, targets)
    return VtaInstance(vpos, tpos, values, kill_probabilities_from_positions(vpos, tpos))


def vta_target_utility(instance: VtaInstance, target: int, engagers) -> float:
    """Expected value destroyed at ``target`` by the vehicles in ``engagers``."""
    engagers = list(engagers)
    miss = np.prod(1.0 - instance.kill_probabilities[engagers, target]) if engagers else 1.0
    return float(instance.values[target] * (1.0 - miss))


def vta_global_utility(instance: VtaInstance, joint) -> float:
    joint = np.asarray(joint, dtype=int)
    if joint.shape != (instance.num_vehicles,):
        raise InputError("assignment needs one target per vehicle")
    if np.any(joint < 0) or np.any(joint >= instance.num_targets):
        raise InputError("target index out of range")
    return float(_global_values(instance, joint[None, :])[0])


def _global_values(instance: VtaInstance, joints: np.ndarray) -> np.ndarray:
    batch = joints.shape[0]
    survive = np.ones((batch, instance.num_targets))
    rows = np.arange(batch)
    for i in range(instance.num_vehicles):
        survive[rows, joints[:, i]] *= 1.0 - instance.kill_probabilities[i, joints[:, i]]
    return (instance.values[None, :] * (1.0 - survive)).sum(axis=1)


def vta_wlu_expected_utility(instance: VtaInstance, vehicle: int, target: int,
                             opponent_strategies) -> float:
    """Expected wonderful life utility of ``vehicle`` engaging ``target``.

    Only the chosen target and the vehicle's greedy target differ between the
    two global utilities, and for each of them the probability that no
    opponent destroys it factorises over the opponents' marginal engagement
    probabilities.

    Args:
        opponent_strategies: one mixed strategy over targets per other
            vehicle, in vehicle order with ``vehicle`` skipped.
    """
    p = instance.kill_probabilities
    others = [k for k in range(instance.num_vehicles) if k != vehicle]
    if len(opponent_strategies) != len(others):
        raise InputError(f"expected {len(others)} opponent strategies")
    greedy = int(instance.greedy_actions()[vehicle])
    if target == greedy:
        return 0.0

    def survival(t):
        q = 1.0
        for k, sigma in zip(others, opponent_strategies):
            q *= 1.0 - p[k, t] * sigma[t]
        return q

    v = instance.values
    return float(v[target] * p[vehicle, target] * survival(target)
                 - v[greedy] * p[vehicle, greedy] * survival(greedy))


class VtaGame(StrategicFormGame):
    """VTA instance as a game with wonderful-life payoffs."""

    def __init__(self, instance: VtaInstance):
        self.instance = instance
        self.reference_actions = tuple(int(a) for a in instance.greedy_actions())
        super().__init__(
            action_counts=(instance.num_targets,) * instance.num_vehicles,
            utility=self._wlu,
            global_utility=lambda s: vta_global_utility(instance, s),
        )

    def _wlu(self, player, joint):
        ref = list(joint)
        ref[player] = self.reference_actions[player]
        return vta_global_utility(self.instance, joint) - vta_global_utility(self.instance, ref)

    def global_values(self, joints: np.ndarray) -> np.ndarray:
        return _global_values(self.instance, np.asarray(joints, dtype=int))

    def expected_payoffs(self, beliefs: np.ndarray) -> np.ndarray:
        p = self.instance.kill_probabilities
        n = self.instance.num_vehicles
        factors = 1.0 - p[None, None, :, :] * beliefs
        # an observer does not compete with itself
        diag = np.arange(n)
        factors[:, diag, diag, :] = 1.0
        survival = np.prod(factors, axis=2)
        gain = self.instance.values[None, None, :] * p[None, :, :] * survival
        ref = np.array(self.reference_actions)
        ref_gain = gain[:, diag, ref]
        return gain - ref_gain[:, :, None]
