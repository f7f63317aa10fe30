"""Experiment recipes for the three benchmarks and the disaster metrics.

Instance ``k`` of a multi-instance experiment is generated from the seed pair
``[seed, k]`` and negotiated with replication index ``k``, so every algorithm
sees the same instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .benchmarks import (DisasterGame, climbing_hill_game, generate_disaster, generate_vta,
                         VtaGame)
from .benchmarks.disaster import disaster_global_utility
from .engine import RunConfig, run_replications
from .errors import InputError
from .solver import AllocationSolution, solve_exact

CUT_POINTS = (50, 100, 150, 200)


def first_step_at_or_above(series: np.ndarray, threshold: float) -> Optional[int]:
    """1-based index of the first entry ``>= threshold``; ``None`` if never."""
    hits = np.flatnonzero(np.asarray(series) >= threshold)
    return int(hits[0]) + 1 if hits.size else None


def _median_steps(steps: Sequence[Optional[int]], horizon: int) -> float:
    # runs that never cross count as horizon + 1
    return float(np.median([horizon + 1 if s is None else s for s in steps]))


# climbing hill ---------------------------------------------------------------

@dataclass
class ClimbingResult:
    config: RunConfig
    mean_payoffs: np.ndarray
    equilibrium_first_steps: list

    @property
    def overall_mean(self) -> float:
        return float(np.mean(self.mean_payoffs))

    @property
    def std(self) -> float:
        return float(np.std(self.mean_payoffs, ddof=1)) if len(self.mean_payoffs) > 1 else 0.0

    def median_equilibrium_step(self) -> float:
        return _median_steps(self.equilibrium_first_steps, self.config.steps)

    def summary(self) -> dict:
        return {
            "algorithm": self.config.algorithm,
            "steps": self.config.steps,
            "replications": len(self.mean_payoffs),
            "overall_mean_payoff": self.overall_mean,
            "std_mean_payoff": self.std,
            "median_equilibrium_step": self.median_equilibrium_step(),
        }


def climbing_experiment(config: RunConfig, replications: int,
                        threshold: float = 0.9) -> ClimbingResult:
    """Replicated climbing-hill negotiation.

    ``equilibrium_first_steps`` holds, per replication, the first step at
    which the probability of the equilibrium joint action reached
    ``threshold``.
    """
    summary = run_replications(climbing_hill_game(), config, replications, keep_traces=True)
    firsts = [first_step_at_or_above(tr.equilibrium_probability, threshold)
              for tr in summary.traces]
    return ClimbingResult(config, summary.mean_payoffs, firsts)


# vehicle-target assignment ---------------------------------------------------

@dataclass
class VtaResult:
    configs: dict
    raw: dict            # algorithm -> (instances, steps) global utility
    normalized: dict     # algorithm -> (instances, steps)

    def final_mean(self, algorithm: str) -> float:
        return float(self.normalized[algorithm][:, -1].mean())

    def mean_curve(self, algorithm: str) -> np.ndarray:
        return self.normalized[algorithm].mean(axis=0)

    def reach_steps(self, algorithm: str, fraction: float = 0.95) -> list:
        """Per instance, first step reaching ``fraction`` of that run's final utility."""
        curves = self.normalized[algorithm]
        return [first_step_at_or_above(c, fraction * c[-1]) for c in curves]

    def median_reach(self, algorithm: str, fraction: float = 0.95) -> float:
        return _median_steps(self.reach_steps(algorithm, fraction), self.normalized[algorithm].shape[1])

    def summary(self) -> dict:
        return {
            alg: {"final_normalized_utility": self.final_mean(alg),
                  "median_reach_95": self.median_reach(alg)}
            for alg in self.normalized
        }


def normalize_by_instance_best(raw: dict) -> dict:
    """Divide each instance's series by the highest score seen for it by any algorithm."""
    best = np.max(np.stack([r.max(axis=1) for r in raw.values()]), axis=0)
    if np.any(best <= 0):
        raise InputError("cannot normalise an instance whose best observed score is not positive")
    return {alg: r / best[:, None] for alg, r in raw.items()}


def vta_experiment(configs: Sequence[RunConfig], instances: int = 30, vehicles: int = 30,
                   targets: int = 30, seed: int = 0) -> VtaResult:
    games = [VtaGame(generate_vta([seed, k], vehicles, targets)) for k in range(instances)]
    raw = {}
    for config in configs:
        summary = run_replications(lambda k: games[k], config, instances, keep_traces=True)
        raw[config.algorithm] = np.stack([tr.global_utility for tr in summary.traces])
    return VtaResult({c.algorithm: c.to_dict() for c in configs}, raw,
                     normalize_by_instance_best(raw))


# disaster management ---------------------------------------------------------

@dataclass
class DisasterMetrics:
    percent_complete: float
    percent_saved: float
    mean_ratio: Optional[float]

    def to_dict(self) -> dict:
        return {"percent_complete": self.percent_complete, "percent_saved": self.percent_saved,
                "mean_ratio": self.mean_ratio}


def disaster_metrics(instances, assignments, solutions=None) -> DisasterMetrics:
    """Aggregate outcome measures over trials.

    ``assignments[k]`` is trial ``k``'s joint action and ``solutions[k]`` its
    exact optimum. The ratio is ``u_g(assignment) / u_g(optimum)``; both are
    negative, so values above one mean worse than optimal. Pass
    ``solutions=None`` to skip the ratio.
    """
    if len(instances) != len(assignments) or len(instances) == 0:
        raise InputError("need one assignment per instance and at least one trial")
    complete = saved = total = 0.0
    ratios = []
    for k, (inst, joint) in enumerate(zip(instances, assignments)):
        short = inst.shortfall(joint)
        complete += float(short.sum() == 0)
        saved += float(inst.saved(joint).sum())
        total += float(inst.casualties.sum())
        if solutions is not None:
            sol = solutions[k]
            if sol is None:
                raise InputError(f"trial {k} has no exact solution")
            ratios.append(ratio(disaster_global_utility(inst, joint), sol.objective))
    return DisasterMetrics(
        100.0 * complete / len(instances),
        100.0 * saved / total if total > 0 else 100.0,
        float(np.mean(ratios)) if solutions is not None else None,
    )


def ratio(achieved: float, optimum: float) -> float:
    if optimum == 0.0:
        if achieved == 0.0:
            return 1.0
        raise InputError("ratio undefined for a zero optimum")
    return achieved / optimum


@dataclass
class DisasterResult:
    instances: list
    solutions: Optional[list]
    assignments: dict          # algorithm -> {cut: [joint per trial]}
    metrics: dict = field(default_factory=dict)   # algorithm -> {cut: DisasterMetrics}

    def summary(self) -> dict:
        return {alg: {str(cut): m.to_dict() for cut, m in by_cut.items()}
                for alg, by_cut in self.metrics.items()}


def disaster_experiment(configs: Sequence[RunConfig], trials: int = 50, ambulances: int = 10,
                        incidents: int = 3, seed: int = 0, cut_points=CUT_POINTS,
                        exact: bool = True) -> DisasterResult:
    """Negotiate each trial once per algorithm and score the joint action at each cut."""
    instances = [generate_disaster([seed, k], ambulances, incidents) for k in range(trials)]
    solutions = [solve_exact(inst) for inst in instances] if exact else None
    games = [DisasterGame(inst) for inst in instances]
    result = DisasterResult(instances, solutions, {})
    for config in configs:
        cuts = [c for c in cut_points if c <= config.steps]
        if not cuts:
            raise InputError("no cut point within the episode length")
        summary = run_replications(lambda k: games[k], config, trials, keep_traces=True)
        by_cut = {c: [tuple(int(a) for a in tr.joint_actions[c - 1]) for tr in summary.traces]
                  for c in cuts}
        result.assignments[config.algorithm] = by_cut
        result.metrics[config.algorithm] = {
            c: disaster_metrics(instances, joints, solutions) for c, joints in by_cut.items()
        }
    return result


__all__ = [
    "AllocationSolution", "CUT_POINTS", "ClimbingResult", "DisasterMetrics", "DisasterResult",
    "VtaResult", "climbing_experiment", "disaster_experiment", "disaster_metrics",
    "first_step_at_or_above", "normalize_by_instance_best", "ratio", "vta_experiment",
]
