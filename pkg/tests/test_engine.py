import numpy as np
import pytest

from afffp.beliefs import AfffpBelief, ClassicFpBelief, GeometricFpBelief
from afffp.benchmarks import climbing_hill_game, generate_vta, VtaGame
from afffp.engine import ALGORITHMS, BeliefBank, RunConfig, run_episode, run_replications
from afffp.errors import InputError, RunFailure
from afffp.game import MatrixGame


def dominant_game():
    # action 0 strictly dominates for both players
    u = np.array([[3.0, 2.0], [1.0, 0.0]])
    return MatrixGame.from_payoffs(np.stack([u, u.T]))


def test_dominant_strategy_classic():
    trace = run_episode(dominant_game(), RunConfig("classic", steps=30))
    assert np.all(trace.joint_actions == 0)
    assert trace.final_joint == (0, 0)


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_same_seed_same_trace(algorithm):
    game = climbing_hill_game()
    cfg = RunConfig(algorithm, steps=150, seed=42)
    a, b = run_episode(game, cfg, 3), run_episode(game, cfg, 3)
    assert np.array_equal(a.joint_actions, b.joint_actions)
    assert np.array_equal(a.global_utility, b.global_utility)
    if algorithm == "afffp":
        assert np.array_equal(a.lambdas, b.lambdas)


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_batch_equals_single_runs(algorithm):
    game = climbing_hill_game()
    cfg = RunConfig(algorithm, steps=120, seed=9)
    batch = run_replications(game, cfg, 6, keep_traces=True, record_lambdas=True).traces
    for r, tr in enumerate(batch):
        single = run_episode(game, cfg, r)
        assert np.array_equal(tr.joint_actions, single.joint_actions)
        assert np.array_equal(tr.global_utility, single.global_utility)


def test_replication_seed_changes_trace():
    game = climbing_hill_game()
    cfg = RunConfig("afffp", steps=80, seed=1)
    assert not np.array_equal(run_episode(game, cfg, 0).joint_actions,
                              run_episode(game, cfg, 1).joint_actions)


def test_trace_bookkeeping():
    cfg = RunConfig("afffp", steps=75, seed=2)
    tr = run_episode(climbing_hill_game(), cfg)
    assert tr.steps == 75 and tr.joint_actions.shape == (75, 3)
    assert tr.lambdas.shape == (75, 3, 3)
    assert tr.equilibrium_probability.shape == (75,)
    assert tr.mean_payoff == pytest.approx(tr.global_utility.mean(), abs=1e-9)
    game = climbing_hill_game()
    for t in range(75):
        assert tr.global_utility[t] == game.global_value(tuple(tr.joint_actions[t]))
    lo, hi = cfg.lambda_bounds
    off = ~np.eye(3, dtype=bool)
    assert np.all((tr.lambdas[:, off] >= lo) & (tr.lambdas[:, off] <= hi))


def test_single_replication_summary():
    cfg = RunConfig("geometric", steps=50, seed=4)
    summary = run_replications(climbing_hill_game(), cfg, 1, keep_traces=True)
    assert summary.overall_mean == summary.traces[0].mean_payoff
    assert summary.std == 0.0
    assert summary.to_records() == [{"replication": 0, "mean_payoff": summary.overall_mean}]


def test_trace_csv():
    tr = run_episode(climbing_hill_game(), RunConfig("afffp", steps=5))
    lines = tr.to_csv().split("\n")
    assert lines[0].startswith("step,action_0,action_1,action_2,global_utility")
    assert "lambda_0_1" in lines[0]
    assert len([l for l in lines if l]) == 6
    assert "\r" not in tr.to_csv()


@pytest.mark.parametrize("algorithm,make", [
    ("afffp", lambda: AfffpBelief(2, lambda0=0.8, gamma=1e-4)),
    ("geometric", lambda: GeometricFpBelief(2, z=0.1)),
    ("stochastic", lambda: ClassicFpBelief(2)),
])
def test_belief_depends_only_on_opponent_actions(algorithm, make):
    # replay player 2's recorded actions through a standalone belief
    u = np.array([[2.0, 0.0], [0.0, 1.0]])
    game = MatrixGame.from_payoffs(np.stack([u, u]))
    cfg = RunConfig(algorithm, steps=60, seed=5)
    tr = run_episode(game, cfg)
    standalone = make()
    bank = BeliefBank(cfg, game.action_counts, 1)
    for t in range(60):
        bank.update(tr.joint_actions[t][None, :])
        standalone.update(int(tr.joint_actions[t, 1]))
        assert np.array_equal(bank.strategies()[0, 0, 1], standalone.strategy())
        if algorithm == "afffp":
            assert tr.lambdas[t, 0, 1] == standalone.lam


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig("bogus")
    with pytest.raises(InputError):
        RunConfig(steps=0)
    with pytest.raises(InputError):
        RunConfig(xi=0.0)
    with pytest.raises(InputError):
        RunConfig("geometric", z=1.0)
    with pytest.raises(InputError):
        RunConfig(lambda_bounds=(0.9, 0.1))
    with pytest.raises(InputError):
        RunConfig(seed=-1)
    assert RunConfig("classic").decision_rule == "best-response"
    assert RunConfig("stochastic").decision_rule == "smooth-best-response"
    assert RunConfig().replace(steps=7).steps == 7


def test_replications_with_game_factory():
    games = [VtaGame(generate_vta(k, 4, 3)) for k in range(3)]
    cfg = RunConfig("afffp", steps=20, seed=0)
    summary = run_replications(lambda k: games[k], cfg, 3, keep_traces=True)
    for k, tr in enumerate(summary.traces):
        assert np.array_equal(tr.joint_actions, run_episode(games[k], cfg, k).joint_actions)


def test_weight_underflow_is_reported_with_step():
    # the other action is rare (about 1 in 1000) and the factor is tiny, so its
    # weight underflows to zero before it is seen again
    u = np.array([[7.0, 7.0], [0.0, 0.0]])
    game = MatrixGame.from_payoffs(np.stack([u, u.T]))
    cfg = RunConfig("afffp", steps=20_000, gamma=0.0, lambda0=0.001, seed=0)
    with pytest.raises(RunFailure) as info:
        run_episode(game, cfg, record_lambdas=False)
    assert info.value.step is not None and info.value.replication == 0
    assert "step" in str(info.value)


def test_master_seeds_give_distinct_replication_sets():
    from afffp.engine import replication_seed
    a = {replication_seed(1, r) for r in range(256)}
    b = {replication_seed(2, r) for r in range(256)}
    assert not a & b
    cfg = RunConfig("afffp", steps=40)
    m1 = run_replications(climbing_hill_game(), cfg.replace(seed=1), 20).overall_mean
    m2 = run_replications(climbing_hill_game(), cfg.replace(seed=2), 20).overall_mean
    assert m1 != m2


def test_prior_mass_spreads_weight_evenly():
    cfg = RunConfig("stochastic", steps=1, prior_mass=3.0)
    bank = BeliefBank(cfg, (3, 2), 1)
    assert np.allclose(bank.kappa[0, 0, 1], [1.5, 1.5, 0.0])
    assert np.allclose(bank.kappa[0, 1, 0], [1.0, 1.0, 1.0])
    with pytest.raises(InputError):
        RunConfig(prior_mass=0.0)
