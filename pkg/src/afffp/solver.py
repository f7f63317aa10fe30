"""Exact centralised optimum for the disaster allocation problem.

:func:`solve_exact` is a depth-first branch and bound over ambulances taken
in order of decreasing capacity. :func:`solve_bruteforce` enumerates every
allocation and serves as its oracle on small instances.

The lower bound used for pruning prices unmet casualties: for any
``mu`` in ``[0, 1]^incidents`` and current deficits ``d``, the remaining cost
is at least ``sum_j mu_j max(d_j, 0) + sum_i min_j (T_ij / N - mu_j c_i)``
over the unassigned ambulances ``i``. ``mu = 0`` is the plain travel-time
bound and ``mu = 1`` is the capacity-versus-shortfall bound. Because the
ambulance order is fixed, the second sum is a precomputed suffix sum, so a
whole family of ``mu`` vectors can be checked at every node.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .benchmarks.disaster import DisasterInstance, disaster_global_utility
from .errors import InputError, InstanceTooLargeError

BRUTEFORCE_LIMIT = 10**7
MAX_EXACT_INCIDENTS = 8
MAX_EXACT_AMBULANCES = 40
# a subtree is dropped once it cannot beat the incumbent by more than this
PRUNE_TOL = 1e-13
_CHUNK = 1 << 16


@dataclass(frozen=True)
class AllocationSolution:
    assignment: tuple
    objective: float
    proof: str

    def to_dict(self) -> dict:
        return {"assignment": list(self.assignment), "objective": self.objective,
                "proof": self.proof}

    @classmethod
    def from_dict(cls, data: dict) -> "AllocationSolution":
        return cls(tuple(int(a) for a in data["assignment"]), float(data["objective"]),
                   str(data["proof"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _costs(instance: DisasterInstance, joints: np.ndarray) -> np.ndarray:
    n = instance.num_ambulances
    travel = instance.times[np.arange(n)[None, :], joints].sum(axis=1) / n
    cover = np.zeros((joints.shape[0], instance.num_incidents))
    rows = np.arange(joints.shape[0])
    for i in range(n):
        cover[rows, joints[:, i]] += instance.capacities[i]
    return travel + np.maximum(0.0, instance.casualties[None, :] - cover).sum(axis=1)


def solve_bruteforce(instance: DisasterInstance) -> AllocationSolution:
    """Enumerate all allocations; ties go to the lexicographically smallest."""
    n, m = instance.num_ambulances, instance.num_incidents
    total = m ** n
    if total > BRUTEFORCE_LIMIT:
        raise InstanceTooLargeError(f"{m}^{n} = {total} allocations exceeds {BRUTEFORCE_LIMIT}")
    powers = m ** np.arange(n - 1, -1, -1)
    best_cost, best_index = np.inf, 0
    for start in range(0, total, _CHUNK):
        index = np.arange(start, min(start + _CHUNK, total))
        joints = (index[:, None] // powers[None, :]) % m
        cost = _costs(instance, joints)
        # lexicographic order equals enumeration order, so keep the first near-minimum
        k = int(np.argmax(cost <= cost.min() + 1e-12))
        if cost[k] < best_cost - 1e-12:
            best_cost, best_index = cost[k], int(index[k])
    assignment = tuple(int(a) for a in (best_index // powers) % m)
    return AllocationSolution(assignment, disaster_global_utility(instance, assignment),
                              "exhaustive")


class _BranchAndBound:
    def __init__(self, instance: DisasterInstance):
        self.inst = instance
        n, m = instance.num_ambulances, instance.num_incidents
        self.n, self.m = n, m
        self.order = sorted(range(n), key=lambda i: (-int(instance.capacities[i]), i))
        self.t = instance.times[self.order] / n                 # scaled, in branching order
        self.c = instance.capacities[self.order].astype(float)
        self.mus = self._price_family()
        # suffix[f, k] = sum over ambulances k.. of min_j (t_ij - mu_fj c_i)
        per = np.min(self.t[None, :, :] - self.mus[:, None, :] * self.c[None, :, None], axis=2)
        self.suffix = np.zeros((len(self.mus), n + 1))
        self.suffix[:, :n] = np.cumsum(per[:, ::-1], axis=1)[:, ::-1]
        self.nodes = 0

    def _price_family(self) -> np.ndarray:
        m = self.m
        corners = np.array(list(itertools.product((0.0, 1.0), repeat=m)))
        return np.vstack([corners, self._subgradient_prices()])

    def _subgradient_prices(self, iterations: int = 200) -> np.ndarray:
        """Prices approximately maximising the root bound, plus the iterates' best few."""
        d = self.inst.casualties.astype(float)
        mu = np.full(self.m, 0.5)
        found = []
        step = 0.5
        for it in range(iterations):
            red = self.t - mu[None, :] * self.c[:, None]
            pick = np.argmin(red, axis=1)
            value = float(mu @ d + red[np.arange(self.n), pick].sum())
            found.append((value, mu.copy()))
            cover = np.bincount(pick, weights=self.c, minlength=self.m)
            grad = d - cover
            norm = float(grad @ grad)
            if norm == 0:
                break
            mu = np.clip(mu + step * grad / np.sqrt(norm) / (1 + it) ** 0.5, 0.0, 1.0)
        found.sort(key=lambda vm: -vm[0])
        return np.array([m for _, m in found[:8]])

    def bound(self, depth: int, deficit: np.ndarray) -> float:
        return float(np.max(self.mus @ np.maximum(deficit, 0.0) + self.suffix[:, depth]))

    def incumbent(self):
        """Greedy allocation polished by single-ambulance moves."""
        n, m = self.n, self.m
        deficit = self.inst.casualties.astype(float).copy()
        assign = np.empty(n, dtype=int)
        for k in range(n):
            gain = np.minimum(deficit, self.c[k])
            j = int(np.argmin(self.t[k] - gain))
            assign[k] = j
            deficit[j] -= self.c[k]
        cost = self.cost(assign)
        improved = True
        while improved:
            improved = False
            for k in range(n):
                for j in range(m):
                    if j == assign[k]:
                        continue
                    old = assign[k]
                    assign[k] = j
                    c = self.cost(assign)
                    if c < cost - 1e-15:
                        cost, improved = c, True
                    else:
                        assign[k] = old
        return assign.copy(), cost

    def cost(self, assign) -> float:
        cover = np.bincount(assign, weights=self.c, minlength=self.m)
        return float(self.t[np.arange(self.n), assign].sum()
                     + np.maximum(0.0, self.inst.casualties - cover).sum())

    def solve(self):
        best_assign, best_cost = self.incumbent()
        assign = np.empty(self.n, dtype=int)
        deficit = self.inst.casualties.astype(float).copy()
        n, m = self.n, self.m

        def dive(depth, travel):
            nonlocal best_assign, best_cost
            self.nodes += 1
            if depth == n:
                cost = travel + float(np.maximum(deficit, 0.0).sum())
                if cost < best_cost - PRUNE_TOL:
                    best_cost, best_assign = cost, assign.copy()
                return
            children = []
            ck = self.c[depth]
            for j in range(m):
                deficit[j] -= ck
                lb = travel + self.t[depth, j] + self.bound(depth + 1, deficit)
                deficit[j] += ck
                children.append((lb, j))
            children.sort()
            for lb, j in children:
                if lb >= best_cost - PRUNE_TOL:
                    break
                assign[depth] = j
                deficit[j] -= ck
                dive(depth + 1, travel + self.t[depth, j])
                deficit[j] += ck

        if self.bound(0, deficit) < best_cost - PRUNE_TOL:
            dive(0, 0.0)
        result = np.empty(n, dtype=int)
        result[self.order] = best_assign
        return tuple(int(a) for a in result)


def solve_exact(instance: DisasterInstance) -> AllocationSolution:
    """Certified optimal allocation by branch and bound."""
    if instance.num_incidents > MAX_EXACT_INCIDENTS or instance.num_ambulances > MAX_EXACT_AMBULANCES:
        raise InstanceTooLargeError(
            f"exact solver supports at most {MAX_EXACT_INCIDENTS} incidents "
            f"and {MAX_EXACT_AMBULANCES} ambulances"
        )
    if instance.num_ambulances < 1 or instance.num_incidents < 1:
        raise InputError("empty instance")
    assignment = _BranchAndBound(instance).solve()
    return AllocationSolution(assignment, disaster_global_utility(instance, assignment),
                              "bounded-search")
