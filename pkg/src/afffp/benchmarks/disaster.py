"""Ambulance-to-incident allocation after a disaster.

Global utility of an allocation is minus the mean travel time of the
ambulances, minus the number of casualties left without ambulance capacity.
Ambulances are paid the wonderful life utility with their nearest incident
as reference action; the reference only shifts payoffs by a term that does
not depend on the ambulance's own choice.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..game import StrategicFormGame


@dataclass(frozen=True)
class DisasterInstance:
    times: np.ndarray        # (ambulances, incidents), in [0, 1]
    capacities: np.ndarray   # (ambulances,), integers
    casualties: np.ndarray   # (incidents,), integers

    def __post_init__(self):
        if self.times.ndim != 2:
            raise InputError("times must be an (ambulances, incidents) matrix")
        if self.capacities.shape != (self.times.shape[0],):
            raise InputError("one capacity per ambulance is required")
        if self.casualties.shape != (self.times.shape[1],):
            raise InputError("one casualty count per incident is required")
        if np.any(self.capacities < 0) or np.any(self.casualties < 0):
            raise InputError("capacities and casualties must be non-negative")

    @property
    def num_ambulances(self) -> int:
        return self.times.shape[0]

    @property
    def num_incidents(self) -> int:
        return self.times.shape[1]

    @property
    def total_capacity(self) -> int:
        return int(self.capacities.sum())

    def nearest_incidents(self) -> np.ndarray:
        return np.argmin(self.times, axis=1)

    def check_joint(self, joint) -> np.ndarray:
        joint = np.asarray(joint, dtype=int)
        if joint.shape != (self.num_ambulances,):
            raise InputError("assignment needs one incident per ambulance")
        if np.any(joint < 0) or np.any(joint >= self.num_incidents):
            raise InputError("incident index out of range")
        return joint

    def assigned_capacity(self, joint) -> np.ndarray:
        joint = self.check_joint(joint)
        return np.bincount(joint, weights=self.capacities, minlength=self.num_incidents)

    def shortfall(self, joint) -> np.ndarray:
        return np.maximum(0.0, self.casualties - self.assigned_capacity(joint))

    def saved(self, joint) -> np.ndarray:
        return np.minimum(self.casualties, self.assigned_capacity(joint))

    def to_dict(self) -> dict:
        return {
            "kind": "disaster",
            "times": self.times.tolist(),
            "capacities": self.capacities.tolist(),
            "casualties": self.casualties.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DisasterInstance":
        if data.get("kind", "disaster") != "disaster":
            raise InputError(f"not a disaster instance: kind={data.get('kind')!r}")
        times = np.asarray(data["times"], dtype=float)
        return cls(
            times=times.reshape(len(data["capacities"]), -1),
            capacities=np.asarray(data["capacities"], dtype=np.int64),
            casualties=np.asarray(data["casualties"], dtype=np.int64),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def casualty_range(total_capacity: int, incidents: int) -> tuple:
    """Integer range for casualties per incident.

    When the range is empty (tiny total capacity) it collapses onto its upper
    end so the capacity invariant still holds.
    """
    lo = math.ceil(total_capacity / (2 * incidents))
    hi = math.floor(total_capacity / incidents)
    return min(lo, hi), hi


def generate_disaster(seed: int, ambulances: int = 10, incidents: int = 3) -> DisasterInstance:
    if ambulances < 1 or incidents < 1:
        raise InputError("need at least one ambulance and one incident")
    rng = np.random.default_rng(seed)
    times = rng.random((ambulances, incidents))
    capacities = rng.integers(1, 5, ambulances)
    total = int(capacities.sum())
    lo, hi = casualty_range(total, incidents)
    while True:
        casualties = rng.integers(lo, hi + 1, incidents)
        if casualties.sum() <= total:
            break
    return DisasterInstance(times, capacities, casualties)


def disaster_global_utility(instance: DisasterInstance, joint) -> float:
    joint = instance.check_joint(joint)
    travel = instance.times[np.arange(instance.num_ambulances), joint].sum()
    return float(-travel / instance.num_ambulances - instance.shortfall(joint).sum())


def _global_values(instance: DisasterInstance, joints: np.ndarray) -> np.ndarray:
    batch, n = joints.shape
    travel = instance.times[np.arange(n)[None, :], joints].sum(axis=1)
    cover = np.zeros((batch, instance.num_incidents))
    rows = np.arange(batch)
    for i in range(n):
        cover[rows, joints[:, i]] += instance.capacities[i]
    short = np.maximum(0.0, instance.casualties[None, :] - cover).sum(axis=1)
    return -travel / n - short


class DisasterGame(StrategicFormGame):
    """Disaster instance as a game with wonderful-life payoffs."""

    def __init__(self, instance: DisasterInstance):
        self.instance = instance
        self.reference_actions = tuple(int(a) for a in instance.nearest_incidents())
        super().__init__(
            action_counts=(instance.num_incidents,) * instance.num_ambulances,
            utility=self._wlu,
            global_utility=lambda s: disaster_global_utility(instance, s),
        )

    def _wlu(self, player, joint):
        ref = list(joint)
        ref[player] = self.reference_actions[player]
        return (disaster_global_utility(self.instance, joint)
                - disaster_global_utility(self.instance, ref))

    def global_values(self, joints: np.ndarray) -> np.ndarray:
        return _global_values(self.instance, np.asarray(joints, dtype=int))

    def expected_payoffs(self, beliefs: np.ndarray) -> np.ndarray:
        """Expected wonderful life utility against independent opponents.

        For each observer and incident the distribution of capacity sent by
        the opponents is built by convolving their Bernoulli contributions.
        Capacity at or above the largest casualty count is lumped into one
        bin since it leaves no shortfall anywhere.
        """
        inst = self.instance
        batch = beliefs.shape[0]
        n, m = inst.num_ambulances, inst.num_incidents
        top = int(inst.casualties.max()) if m else 0
        dist = np.zeros((batch, n, m, top + 1))
        dist[..., 0] = 1.0
        for k in range(n):
            q = beliefs[:, :, k, :m].copy()
            q[:, k, :] = 0.0
            c = int(inst.capacities[k])
            shifted = np.zeros_like(dist)
            if c <= top:
                shifted[..., c:top] = dist[..., : top - c]
                shifted[..., top] = dist[..., top - c:].sum(axis=-1)
            else:
                shifted[..., top] = dist.sum(axis=-1)
            dist = dist * (1.0 - q[..., None]) + shifted * q[..., None]

        level = np.arange(top + 1)
        need = inst.casualties[:, None] - level[None, :]                     # (m, top+1)
        pen_without = (dist * np.maximum(0.0, need)[None, None]).sum(axis=-1)  # (b, n, m)
        need_with = need[None, :, :] - inst.capacities[:, None, None]        # (n, m, top+1)
        pen_with = (dist * np.maximum(0.0, need_with)[None]).sum(axis=-1)
        own = -inst.times[None, :, :] / n - (pen_with - pen_without)
        ref = np.array(self.reference_actions)
        return own - own[:, np.arange(n), ref][:, :, None]
