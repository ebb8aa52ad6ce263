import itertools

import numpy as np
import pytest

from teamfp.dynamics import DynamicsConfig, initial_state, team_fp_step
from teamfp.game import MultiTeamGame, TeamStructure
from teamfp.gamegen import random_mg, random_zsptg
from teamfp.markov import (MarkovConfig, MarkovTeamGame, best_response_dp,
                           initial_mg_state, mg_tng, policy_value, run_episode,
                           run_mg)
from teamfp.metrics import tng


def zero_mg(team_actions=((2,), (2,)), num_states=2, horizon=3):
    struct = TeamStructure.of(team_actions)
    potentials = {
        (m, l): np.zeros((struct.team_size(m), struct.team_size(l)))
        for m in range(struct.num_teams) for l in range(struct.num_teams) if m != l
    }
    games = [MultiTeamGame(struct, dict(potentials)) for _ in range(num_states)]
    A = struct.total_size()
    kernel = np.full((num_states, A, num_states), 1.0 / num_states)
    p0 = np.full(num_states, 1.0 / num_states)
    return MarkovTeamGame(horizon, games, kernel, p0)


def single_state_mg(game, horizon=1):
    A = game.structure.total_size()
    kernel = np.ones((1, A, 1))
    return MarkovTeamGame(horizon, [game], kernel, np.array([1.0]))


def test_mg_validation_rejects_bad_kernel():
    mg = random_mg(seed=0)
    bad = mg.kernel.copy()
    bad[0, 0, 0] += 0.5
    with pytest.raises(ValueError):
        MarkovTeamGame(mg.horizon, mg.stage_games, bad, mg.p0)
    with pytest.raises(ValueError):
        MarkovTeamGame(0, mg.stage_games, mg.kernel, mg.p0)


def test_global_encode_decode_roundtrip():
    mg = random_mg([[2, 2], [3]], seed=1)
    for a in range(mg.num_joint_actions):
        assert mg.global_encode(mg.global_decode(a)) == a


def test_phi_dense_matches_pairwise():
    from teamfp.game import phi_m
    mg = random_mg([[2, 2], [2]], seed=2)
    for s, g in enumerate(mg.stage_games):
        for m in range(2):
            dense = mg.phi_dense(m)[s]
            for a in range(mg.num_joint_actions):
                joints = mg.global_decode(a)
                assert dense[a] == pytest.approx(phi_m(g, m, joints))


def test_q_groups_shared_under_identical_interest():
    mg = random_mg([[2, 2], [2, 2]], seed=3)
    keys, key_of = mg.q_groups()
    assert keys == [(0, 0), (1, 0)]
    assert key_of[(0, 1)] == (0, 0)
    mg2 = random_mg([[2, 2], [2, 2]], seed=3, dummy_payoffs=True)
    keys2, _ = mg2.q_groups()
    assert len(keys2) == 4


def test_zero_rewards_q_stays_zero():
    mg = zero_mg()
    for algorithm in ("model-based", "model-free"):
        config = MarkovConfig(algorithm=algorithm, episodes=20, seed=1)
        state = initial_mg_state(mg, config)
        for _ in range(20):
            run_episode(mg, state, config)
        for Q in state.q.values():
            assert np.all(Q == 0.0)


def test_visit_counter_identities():
    mg = random_mg([[2], [2]], num_states=2, horizon=4, seed=4)
    config = MarkovConfig(episodes=50, seed=2)
    state = initial_mg_state(mg, config)
    for _ in range(50):
        run_episode(mg, state, config)
    for h in range(mg.horizon):
        assert state.counts_sh[:, h].sum() == 50
        assert state.counts_sha[:, h, :].sum() == 50


def test_unvisited_entries_unchanged_bitwise():
    mg = random_mg([[2], [2]], num_states=3, horizon=2, seed=5)
    config = MarkovConfig(algorithm="model-free", episodes=1, seed=3)
    state = initial_mg_state(mg, config)
    q_before = {k: v.copy() for k, v in state.q.items()}
    beliefs_before = [b.copy() for b in state.beliefs]
    traj = run_episode(mg, state, config)
    visited_sh = {(s, h) for h, (s, _) in enumerate(traj)}
    visited_sha = {(s, h, a) for h, (s, a) in enumerate(traj)}
    for s in range(3):
        for h in range(2):
            if (s, h) not in visited_sh:
                for l in range(2):
                    assert np.array_equal(state.beliefs[l][s, h], beliefs_before[l][s, h])
            for key in state.q:
                for a in range(mg.num_joint_actions):
                    if (s, h, a) not in visited_sha:
                        assert state.q[key][s, h, a] == q_before[key][s, h, a]


def test_model_based_single_step_target():
    # deterministic 2-state cycle, H=2: after one episode the visited (s, 0)
    # row moves toward r(s, .) + kernel @ v(., 1) with step alpha_0 = 1
    g0 = random_zsptg([[2], [2]], seed=6)
    g1 = random_zsptg([[2], [2]], seed=7)
    A = 4
    kernel = np.zeros((2, A, 2))
    kernel[0, :, 1] = 1.0
    kernel[1, :, 0] = 1.0
    mg = MarkovTeamGame(2, [g0, g1], kernel, np.array([1.0, 0.0]))
    config = MarkovConfig(algorithm="model-based", episodes=1, seed=8)
    state = initial_mg_state(mg, config)
    pre_q = {k: v.copy() for k, v in state.q.items()}
    pre_last = state.last_joint.copy()
    pre_beliefs = [b.copy() for b in state.beliefs]
    traj = run_episode(mg, state, config)
    s0, _ = traj[0]
    key = (0, 0)
    # v at h=1 computed from pre-update Q (zeros) -> v = 0, target = reward row
    expected = mg.reward_dense(0, 0)[s0]
    assert np.allclose(state.q[key][s0, 0], expected)


def test_mf_target_equals_mb_on_deterministic_kernel():
    g = random_zsptg([[2], [2]], seed=9)
    A = 4
    kernel = np.zeros((1, A, 1))
    kernel[:, :, 0] = 1.0
    mg = MarkovTeamGame(2, [g], kernel, np.array([1.0]))
    mb_cfg = MarkovConfig(algorithm="model-based", episodes=1, seed=10)
    mf_cfg = MarkovConfig(algorithm="model-free", episodes=1, seed=10)
    mb = initial_mg_state(mg, mb_cfg)
    mf = initial_mg_state(mg, mf_cfg)
    traj_mb = run_episode(mg, mb, mb_cfg)
    traj_mf = run_episode(mg, mf, mf_cfg)
    assert traj_mb == traj_mf
    for h, (s, a) in enumerate(traj_mf):
        for key in mb.q:
            assert mf.q[key][s, h, a] == pytest.approx(mb.q[key][s, h, a])


def _enumerate_best_response(mg, opponents, m):
    """Brute force over deterministic (s, h)-Markov strategies of team m."""
    S, H = mg.num_states, mg.horizon
    size = mg.structure.team_size(m)
    best = -np.inf
    for assignment in itertools.product(range(size), repeat=S * H):
        strat = np.zeros((S, H, size))
        it = iter(assignment)
        for s in range(S):
            for h in range(H):
                strat[s, h, next(it)] = 1.0
        profile = [strat if l == m else opponents[l] for l in range(mg.num_teams)]
        best = max(best, policy_value(mg, profile, m))
    return best


def test_dp_equals_exhaustive_enumeration():
    rng = np.random.default_rng(0)
    for seed in range(5):
        mg = random_mg([[2], [2]], num_states=2, horizon=2, seed=seed)
        opponents = {}
        for l in range(2):
            size = mg.structure.team_size(l)
            opponents[l] = rng.dirichlet(np.ones(size), size=(2, 2))
        for m in range(2):
            dp_val, _ = best_response_dp(mg, opponents, m)
            brute = _enumerate_best_response(mg, opponents, m)
            assert dp_val == pytest.approx(brute, abs=1e-9)


def test_dp_beats_random_strategies():
    rng = np.random.default_rng(1)
    mg = random_mg([[2], [2, 2]], num_states=2, horizon=3, seed=11)
    opponents = {l: rng.dirichlet(np.ones(mg.structure.team_size(l)),
                                  size=(2, 3)) for l in range(2)}
    for m in range(2):
        dp_val, strat = best_response_dp(mg, opponents, m)
        size = mg.structure.team_size(m)
        for _ in range(200):
            rand = rng.dirichlet(np.ones(size), size=(2, 3))
            profile = [rand if l == m else opponents[l] for l in range(2)]
            assert dp_val + 1e-9 >= policy_value(mg, profile, m)
        det = np.zeros((2, 3, size))
        for s in range(2):
            for h in range(3):
                det[s, h, strat[s, h]] = 1.0
        profile = [det if l == m else opponents[l] for l in range(2)]
        assert dp_val == pytest.approx(policy_value(mg, profile, m))


def test_mg_tng_zero_game_and_nonnegative():
    mg = zero_mg()
    uniform = [np.full((2, 3, mg.structure.team_size(m)),
                       1.0 / mg.structure.team_size(m)) for m in range(2)]
    per_team, total = mg_tng(mg, uniform)
    assert np.allclose(per_team, 0.0)
    mg2 = random_mg(seed=12)
    rng = np.random.default_rng(2)
    profile = [rng.dirichlet(np.ones(mg2.structure.team_size(m)),
                             size=(2, 10)) for m in range(2)]
    per_team, total = mg_tng(mg2, profile)
    assert np.all(per_team >= -1e-9)


def test_mg_tng_reduces_to_stage_tng():
    g = random_zsptg([[2, 2], [2, 2]], seed=13)
    mg = single_state_mg(g)
    rng = np.random.default_rng(3)
    beliefs = [rng.dirichlet(np.ones(4)) for _ in range(2)]
    profile = [b.reshape(1, 1, 4) for b in beliefs]
    per_mg, total_mg = mg_tng(mg, profile)
    per_stage, total_stage = tng(g, beliefs)
    assert np.allclose(per_mg, per_stage, atol=1e-12)
    assert total_mg == pytest.approx(total_stage)


def test_reduction_to_repeated_game_trajectory():
    # |S|=1, H=1, Q initialized to the stage rewards: the agent stream and the
    # action sequence coincide with the repeated-game dynamic under one seed
    g = random_zsptg([[2, 2], [2, 2]], seed=14)
    mg = single_state_mg(g)
    seed = 21
    mg_cfg = MarkovConfig(episodes=0, seed=seed, q_init="rewards")
    dyn_cfg = DynamicsConfig(iterations=0, seed=seed)
    mstate = initial_mg_state(mg, mg_cfg)
    dstate = initial_state(g, dyn_cfg)
    assert list(mstate.last_joint[0, 0]) == dstate.last_joint
    for k in range(300):
        run_episode(mg, mstate, mg_cfg)
        team_fp_step(g, dstate, dyn_cfg)
        assert list(mstate.last_joint[0, 0]) == dstate.last_joint
        for m in range(2):
            assert np.allclose(mstate.beliefs[m][0, 0], dstate.beliefs[m],
                               atol=1e-12)


def test_run_mg_record_shape_and_trend_smoke():
    mg = random_mg(seed=15)
    config = MarkovConfig(episodes=200, stride=100, seed=4)
    rec = run_mg(mg, config)
    assert list(rec.episodes) == [0, 100, 200]
    assert rec.tng_teams.shape == (3, 2)
    assert np.all(rec.tng_total >= -1e-9)


def test_run_mg_determinism():
    mg = random_mg(seed=16)
    config = MarkovConfig(episodes=100, stride=50, seed=5)
    a = run_mg(mg, config)
    b = run_mg(mg, config)
    assert np.array_equal(a.tng_total, b.tng_total)
    c = run_mg(mg, config, trial=1)
    assert not np.array_equal(a.tng_total, c.tng_total)
