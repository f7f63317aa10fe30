import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afffp.benchmarks import CLIMBING_HILL, EQUILIBRIUM, climbing_hill_game
from afffp.benchmarks.climbing import parse_joint
from afffp.errors import InputError
from afffp.game import (MatrixGame, StrategicFormGame, WluGame, as_mixed_strategy,
                        check_potential_identity, evaluate_utility, expected_utility,
                        point_mass, potential_violation, wlu_payoff)


@pytest.fixture
def climbing():
    return climbing_hill_game()


@pytest.mark.parametrize("labels,value", [("UUD", 100), ("UMU", 0), ("UUM", -300)])
def test_climbing_payoffs(climbing, labels, value):
    for player in range(3):
        assert evaluate_utility(climbing, player, parse_joint(labels)) == value


def _pure_equilibria(strict):
    found = []
    for joint in itertools.product(range(3), repeat=3):
        def ok(i, a):
            dev = tuple(a if k == i else joint[k] for k in range(3))
            if strict:
                return a == joint[i] or CLIMBING_HILL[joint] > CLIMBING_HILL[dev]
            return CLIMBING_HILL[joint] >= CLIMBING_HILL[dev]
        if all(ok(i, a) for i in range(3) for a in range(3)):
            found.append(joint)
    return found


def test_climbing_unique_strict_equilibrium(climbing):
    assert _pure_equilibria(strict=True) == [EQUILIBRIUM]


def test_climbing_weak_equilibria_are_all_zero_payoff():
    weak = [j for j in _pure_equilibria(strict=False) if j != EQUILIBRIUM]
    assert weak and all(CLIMBING_HILL[j] == 0 for j in weak)


def test_out_of_range_joint_is_rejected(climbing):
    with pytest.raises(InputError):
        evaluate_utility(climbing, 0, (0, 0, 3))
    with pytest.raises(InputError):
        evaluate_utility(climbing, 3, (0, 0, 0))


def test_expected_utility_examples(climbing):
    coord = MatrixGame.common_payoff(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert expected_utility(coord, 0, 0, [np.array([0.5, 0.5])]) == pytest.approx(0.5)
    assert expected_utility(climbing, 0, 0, [point_mass(3, 0), point_mass(3, 2)]) == 100


def test_expected_utility_dimension_mismatch(climbing):
    with pytest.raises(InputError):
        expected_utility(climbing, 0, 0, [np.ones(2) / 2, point_mass(3, 0)])
    with pytest.raises(InputError):
        expected_utility(climbing, 0, 0, [point_mass(3, 0)])


def test_point_mass_expectation_matches_pure_payoff(climbing):
    for joint in itertools.product(range(3), repeat=3):
        for i in range(3):
            opp = [point_mass(3, joint[k]) for k in range(3) if k != i]
            assert expected_utility(climbing, i, joint[i], opp) == evaluate_utility(climbing, i, joint)


def test_as_mixed_strategy_validates():
    assert np.allclose(as_mixed_strategy([0.25, 0.75]), [0.25, 0.75])
    with pytest.raises(InputError):
        as_mixed_strategy([0.5, 0.6])
    with pytest.raises(InputError):
        as_mixed_strategy([-0.1, 1.1])


def test_wlu_two_player_example():
    ug = np.array([[3.0, 1.0], [2.0, 0.0]])
    wlu = WluGame((2, 2), lambda s: float(ug[s]), (1, 0))
    assert wlu_payoff(wlu, 0, (0, 0)) == 1.0
    # playing the reference action always pays zero
    for other in range(2):
        assert wlu_payoff(wlu, 0, (1, other)) == 0.0


def test_common_payoff_game_is_potential(climbing):
    assert potential_violation(climbing, lambda s: float(CLIMBING_HILL[s])) == 0.0
    passed, worst = check_potential_identity(climbing, lambda s: float(CLIMBING_HILL[s]), 200, 0)
    assert passed and worst == 0.0


def test_non_potential_game_is_detected():
    # matching pennies has no exact potential; u_1 is not a potential for it
    u1 = np.array([[1.0, -1.0], [-1.0, 1.0]])
    game = MatrixGame.from_payoffs(np.stack([u1, -u1]))
    assert potential_violation(game, lambda s: float(u1[s])) > 1.0


@st.composite
def random_tensor_game(draw):
    players = draw(st.integers(2, 4))
    counts = tuple(draw(st.lists(st.integers(1, 4), min_size=players, max_size=players)))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return MatrixGame.from_payoffs(rng.normal(size=(players,) + counts)), rng


@settings(max_examples=40, deadline=None)
@given(random_tensor_game())
def test_expected_payoffs_matches_enumeration(case):
    game, rng = case
    P, A = game.num_players, game.max_actions
    beliefs = np.zeros((2, P, P, A))
    for b in range(2):
        for i in range(P):
            for k in range(P):
                n = game.action_counts[k]
                beliefs[b, i, k, :n] = rng.dirichlet(np.ones(n))
    fast = game.expected_payoffs(beliefs)
    generic = StrategicFormGame.expected_payoffs(game, beliefs)
    for b in range(2):
        for i in range(P):
            opp = [beliefs[b, i, k, :game.action_counts[k]] for k in range(P) if k != i]
            for a in range(game.action_counts[i]):
                oracle = expected_utility(game, i, a, opp)
                assert fast[b, i, a] == pytest.approx(oracle, abs=1e-9)
                assert generic[b, i, a] == pytest.approx(oracle, abs=1e-9)
