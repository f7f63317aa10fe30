import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afffp.benchmarks import DisasterInstance, generate_disaster
from afffp.benchmarks.disaster import disaster_global_utility
from afffp.errors import InstanceTooLargeError
from afffp.solver import AllocationSolution, solve_bruteforce, solve_exact


def disaster(times, capacities, casualties):
    return DisasterInstance(np.asarray(times, float), np.asarray(capacities),
                            np.asarray(casualties))


def test_two_ambulance_example():
    inst = disaster([[0.2, 0.4], [0.3, 0.1]], [2, 2], [2, 2])
    for solve in (solve_bruteforce, solve_exact):
        sol = solve(inst)
        assert sol.assignment == (0, 1)
        assert sol.objective == pytest.approx(-0.15)
    assert solve_bruteforce(inst).proof == "exhaustive"
    assert solve_exact(inst).proof == "bounded-search"


def test_no_casualties_sends_each_to_its_nearest():
    inst = generate_disaster(3, 6, 3)
    inst = disaster(inst.times, inst.capacities, np.zeros(3, dtype=int))
    expected = tuple(int(a) for a in np.argmin(inst.times, axis=1))
    assert solve_bruteforce(inst).assignment == expected
    assert solve_exact(inst).assignment == expected


def test_single_incident():
    inst = disaster([[0.3], [0.5], [0.1]], [1, 2, 1], [6])
    sol = solve_exact(inst)
    assert sol.assignment == (0, 0, 0)
    assert sol.objective == pytest.approx(-0.3 - 2)


def test_constructed_zero_cost_partition():
    times = [[0.0, 0.9, 0.8], [0.7, 0.0, 0.6], [0.5, 0.4, 0.0], [0.0, 0.3, 0.2]]
    inst = disaster(times, [2, 3, 1, 2], [4, 3, 1])
    sol = solve_exact(inst)
    assert sol.assignment == (0, 1, 2, 0)
    assert sol.objective == 0.0


def test_bruteforce_breaks_ties_lexicographically():
    inst = disaster(np.zeros((3, 2)), [1, 1, 1], [0, 0])
    assert solve_bruteforce(inst).assignment == (0, 0, 0)


def test_size_limits():
    with pytest.raises(InstanceTooLargeError):
        solve_exact(generate_disaster(0, 10, 9))
    with pytest.raises(InstanceTooLargeError):
        solve_exact(generate_disaster(0, 41, 3))
    with pytest.raises(InstanceTooLargeError):
        solve_bruteforce(generate_disaster(0, 15, 3))


def test_solution_json_round_trip():
    sol = solve_exact(generate_disaster(4, 6, 3))
    assert AllocationSolution.from_dict(sol.to_dict()) == sol


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), amb=st.integers(1, 8), inc=st.integers(1, 3))
def test_exact_matches_bruteforce(seed, amb, inc):
    inst = generate_disaster(seed, amb, inc)
    exact, brute = solve_exact(inst), solve_bruteforce(inst)
    assert exact.objective == pytest.approx(brute.objective, abs=1e-12)
    assert exact.objective == disaster_global_utility(inst, exact.assignment)
    assert brute.objective == disaster_global_utility(inst, brute.assignment)


def test_larger_instance_is_consistent():
    inst = generate_disaster(1, 20, 5)
    sol = solve_exact(inst)
    assert sol.objective == disaster_global_utility(inst, sol.assignment)
    # no single-ambulance move improves a certified optimum
    for i in range(20):
        for j in range(5):
            joint = list(sol.assignment)
            joint[i] = j
            assert disaster_global_utility(inst, joint) <= sol.objective + 1e-12
