"""
Tests for best response, Q-learning and UCRL2 policy players.
"""

import numpy as np
import pytest

import sys
sys.path.insert(0, ".")

from src.errors import IncompatiblePlayers
from src.mdp import (
    Simulator,
    TabularMdp,
    enumerate_deterministic_policies,
    expected_reward,
    make_gridworld,
    make_random_mdp,
    make_symmetric_pair,
    validate_occupancy,
)
from src.models import MdpMode, ToleranceSchedule
from src.players import (
    BestResponsePlayer,
    ConfidenceSet,
    GreedyWatch,
    QLearningPlayer,
    Ucrl2Player,
    best_response,
    extended_value_iteration,
    greedy,
    optimal_reward,
    optimistic_transition,
    q_learning_best_response,
    tolerance,
)


@pytest.fixture
def small_mdp():
    return make_random_mdp(4, 2, 4, seed=5)


def brute_force_optimum(mdp, reward):
    return max(expected_reward(mdp, pi, reward) for pi in enumerate_deterministic_policies(mdp))


class TestBestResponse:
    """Exact best response by value iteration."""

    @pytest.mark.parametrize("mode", [MdpMode.AVERAGE, MdpMode.DISCOUNTED])
    def test_matches_enumeration(self, small_mdp, mode):
        mdp = small_mdp.with_mode(mode, 0.8)
        rng = np.random.default_rng(0)
        for _ in range(5):
            cost = rng.uniform(-1.0, 1.0, size=mdp.num_pairs)
            response = best_response(mdp, cost, tol=1e-10)
            assert response.policy.is_deterministic
            assert validate_occupancy(mdp, response.d) == []
            assert float(-cost @ response.d) == pytest.approx(brute_force_optimum(mdp, -cost), abs=1e-7)

    def test_optimal_reward(self, small_mdp):
        reward = np.linspace(-1.0, 1.0, small_mdp.num_pairs)
        assert optimal_reward(small_mdp, reward) == pytest.approx(
            brute_force_optimum(small_mdp, reward), abs=1e-8
        )

    def test_greedy_breaks_ties_towards_lowest_index(self):
        q = np.array([[1.0, 1.0 + 1e-12, 0.0], [0.0, 2.0, 2.0]])
        assert list(greedy(q)) == [0, 1]

    def test_average_mode_reports_gain(self, small_mdp):
        reward = np.ones(small_mdp.num_pairs)
        response = best_response(small_mdp, -reward)
        assert response.value.gain == pytest.approx(1.0, abs=1e-6)

    def test_player_uses_tolerance_schedule(self, small_mdp):
        player = BestResponsePlayer(small_mdp, ToleranceSchedule.INV_SQRT_K, 1e-4)
        response = player.respond(np.zeros(small_mdp.num_pairs), 4)
        assert response.samples == 0
        assert player.k == 4

    def test_tolerance_schedules(self):
        assert tolerance(ToleranceSchedule.CONST, 0.5, 9) == 0.5
        assert tolerance(ToleranceSchedule.INV_K, 0.5, 10) == pytest.approx(0.05)
        assert tolerance(ToleranceSchedule.INV_SQRT_K, 1.0, 16) == pytest.approx(0.25)

    @pytest.mark.parametrize("mode", [MdpMode.AVERAGE, MdpMode.DISCOUNTED])
    def test_invariant_to_positive_scaling(self, small_mdp, mode):
        mdp = small_mdp.with_mode(mode, 0.8)
        rng = np.random.default_rng(6)
        for scale in (0.5, 3.7, 250.0):
            cost = rng.uniform(-1.0, 1.0, size=mdp.num_pairs)
            base = best_response(mdp, cost, tol=1e-10)
            scaled = best_response(mdp, scale * cost, tol=1e-10 * scale)
            assert np.array_equal(base.policy.greedy_actions(), scaled.policy.greedy_actions())
            assert np.allclose(base.d, scaled.d, atol=1e-12)


class TestQLearning:
    """Sample-based approximate best response."""

    def test_learns_to_stay_on_symmetric_pair(self):
        mdp = make_symmetric_pair(MdpMode.DISCOUNTED, 0.9)
        cost = np.array([-1.0, 0.0, -1.0, 0.0])
        result = q_learning_best_response(mdp, Simulator(mdp, seed=0), cost, budget=20_000)
        assert list(result.policy.greedy_actions()) == [0, 0]
        assert result.samples == 20_000
        assert not result.budget_too_small

    def test_bandit_picks_the_rewarded_arm(self):
        bandit = TabularMdp(
            transition=np.ones((1, 2, 1)),
            mode=MdpMode.DISCOUNTED,
            initial_dist=np.array([1.0]),
            discount=0.9,
        )
        cost = np.array([-1.0, 0.0])
        wins = sum(
            int(q_learning_best_response(bandit, Simulator(bandit, seed=seed), cost, budget=1000)
                .policy.greedy_actions()[0] == 0)
            for seed in range(100)
        )
        assert wins >= 99

    def test_budget_follows_tolerance(self, small_mdp):
        player = QLearningPlayer(small_mdp, seed=0, q_budget=10, budget_cap=500)
        assert player.budget(1) == 10
        assert player.budget(7) == 70
        assert player.budget(1000) == 500

    def test_player_reports_samples(self, small_mdp):
        player = QLearningPlayer(small_mdp, seed=1, q_budget=20)
        response = player.respond(np.zeros(small_mdp.num_pairs), 2)
        assert response.samples == 40
        assert "budget_too_small" in response.flags
        assert player.q_table.shape == (4, 2)

    def test_rejects_empty_budget(self, small_mdp):
        with pytest.raises(ValueError):
            q_learning_best_response(small_mdp, Simulator(small_mdp), np.zeros(8), budget=0)


class TestGreedyWatch:
    """Late greedy changes flag a budget as too small."""

    def test_change_then_revert_stays_flagged(self):
        watch = GreedyWatch(np.array([0, 1]))
        watch.update(0, np.array([1.0, 0.0]))
        assert not watch.changed
        watch.update(0, np.array([0.0, 1.0]))
        assert watch.changed
        watch.update(0, np.array([1.0, 0.0]))
        assert watch.changed

    def test_settled_policy_is_not_flagged(self):
        watch = GreedyWatch(np.array([0, 1]))
        for _ in range(5):
            watch.update(0, np.array([2.0, 1.0]))
            watch.update(1, np.array([0.0, 0.5]))
        assert not watch.changed

    def test_ties_resolve_like_the_final_policy(self):
        watch = GreedyWatch(np.array([0]))
        watch.update(0, np.array([1.0, 1.0 + 1e-12]))
        assert not watch.changed


class TestUcrl2:
    """Optimistic exploration with extended value iteration."""

    def test_optimistic_transition_stays_on_simplex(self):
        p_hat = np.array([[[0.2, 0.5, 0.3]]])
        u = np.array([0.0, 1.0, 2.0])
        p = optimistic_transition(p_hat, np.array([[0.4]]), u)
        assert p.sum() == pytest.approx(1.0)
        assert np.all(p >= 0.0)
        assert np.allclose(p[0, 0], [0.0, 0.5, 0.5])
        assert float(p[0, 0] @ u) >= float(p_hat[0, 0] @ u)

    def test_confidence_radius_shrinks(self):
        conf = ConfidenceSet(3, 2, delta=0.05)
        assert np.all(conf.radius() == 2.0)
        for _ in range(10_000):
            conf.update(0, 0, 1)
        radius = conf.radius()
        assert radius[0, 0] < radius[1, 0] == 2.0
        assert np.allclose(conf.p_hat()[0, 0], [0.0, 1.0, 0.0])
        assert np.allclose(conf.p_hat()[2, 1], 1.0 / 3.0)

    def test_evi_is_optimistic(self, small_mdp):
        conf = ConfidenceSet(small_mdp.num_states, small_mdp.num_actions)
        reward = np.linspace(0.0, 1.0, small_mdp.num_pairs)
        value, policy, _ = extended_value_iteration(conf, reward, iters=200)
        # with no data every successor is reachable, so the best pair is optimistic
        assert value.gain == pytest.approx(reward.max(), abs=0.05)
        assert policy.is_deterministic

    def test_evi_with_zero_radius_is_value_iteration(self, small_mdp):
        conf = ConfidenceSet(small_mdp.num_states, small_mdp.num_actions, c_p=0.0)
        conf.transition_counts = np.array(small_mdp.transition) * 1000.0
        conf.t = 1000 * small_mdp.num_pairs
        assert np.all(conf.radius() == 0.0)
        reward = np.random.default_rng(2).uniform(0.0, 1.0, size=small_mdp.num_pairs)
        value, policy, p = extended_value_iteration(conf, reward, iters=10_000)
        assert np.allclose(p, small_mdp.transition)
        assert value.gain == pytest.approx(optimal_reward(small_mdp, reward), abs=0.01)
        assert expected_reward(small_mdp, policy, reward) == pytest.approx(
            optimal_reward(small_mdp, reward), abs=0.01
        )

    def test_evi_gain_grows_with_the_radius(self, small_mdp):
        reward = np.random.default_rng(2).uniform(0.0, 1.0, size=small_mdp.num_pairs)
        gains = []
        for c_p in (0.0, 0.01, 0.1, 1.0, 14.0):
            conf = ConfidenceSet(small_mdp.num_states, small_mdp.num_actions, c_p=c_p)
            conf.transition_counts = np.array(small_mdp.transition) * 200.0
            conf.t = 200 * small_mdp.num_pairs
            value, _, _ = extended_value_iteration(conf, reward, iters=10_000)
            gains.append(value.gain)
        assert all(b >= a - 0.01 for a, b in zip(gains, gains[1:]))
        assert gains[-1] >= gains[0]

    def test_requires_average_mode(self):
        with pytest.raises(IncompatiblePlayers):
            Ucrl2Player(make_gridworld(2, 2, mode=MdpMode.DISCOUNTED))

    def test_player_takes_one_step_per_iteration(self, small_mdp):
        player = Ucrl2Player(small_mdp, seed=3)
        cost = np.linspace(-1.0, 1.0, small_mdp.num_pairs)
        for k in range(1, 21):
            response = player.respond(cost, k)
            assert response.samples == 1
            assert validate_occupancy(small_mdp, response.d) == []
        assert player.state.confidence.t == 20
        assert player.evi_iters(7) == 7
