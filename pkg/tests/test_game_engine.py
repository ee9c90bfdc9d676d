"""
Tests for the game loop, Frank-Wolfe and fully-corrective Frank-Wolfe.
"""

import math

import numpy as np
import pytest
from scipy import stats

import sys
sys.path.insert(0, ".")

from src.engine import (
    GameOptions,
    duality_gap,
    fw_step_size,
    is_checkpoint,
    max_entropy_occupancy,
    run_frank_wolfe,
    run_fully_corrective_fw,
    run_game,
)
from src.errors import IterationBudgetZero
from src.handlers import fit_rate
from src.mdp import (
    Policy,
    TabularMdp,
    enumerate_deterministic_policies,
    make_gridworld,
    make_random_mdp,
    make_skill_product,
    make_symmetric_pair,
    occupancy_of_policy,
    validate_occupancy,
)
from src.models import Bregman, MdpMode, StepRule, ToleranceSchedule
from src.objectives import (
    DiaynObjective,
    L2ApprenticeshipObjective,
    LinearObjective,
    LinfApprenticeshipGame,
    NegEntropyObjective,
)
from src.players import (
    BestResponsePlayer,
    FtlCostPlayer,
    OmdCostPlayer,
    QLearningPlayer,
    Ucrl2Player,
    optimal_reward,
)

FAST = GameOptions(grid_size=8)


@pytest.fixture
def grid():
    return make_gridworld(3, 3, slip_prob=0.1, discount=0.9)


@pytest.fixture
def expert(grid):
    probs = np.random.default_rng(7).dirichlet(np.ones(4), size=grid.num_states)
    return occupancy_of_policy(grid, Policy(probs)).d


def assert_sandwich(trace):
    for record in trace.checkpoints():
        assert record.gap_lower <= record.gap_upper + 1e-8


class TestGameLoop:
    """Cost player against policy player."""

    def test_checkpoints(self):
        assert [k for k in range(1, 101) if is_checkpoint(k, 100)] == [1, 2, 4, 8, 16, 32, 64, 100]

    def test_zero_budget_rejected(self, grid):
        f = NegEntropyObjective(grid.num_pairs)
        with pytest.raises(IterationBudgetZero):
            run_game(grid, f, FtlCostPlayer(f), BestResponsePlayer(grid), 0)

    def test_linear_objective_is_standard_rl(self, grid):
        lam0 = np.random.default_rng(1).uniform(-1.0, 1.0, size=grid.num_pairs)
        f = LinearObjective(lam0)
        trace = run_game(grid, f, FtlCostPlayer(f), BestResponsePlayer(grid), 1, FAST)
        assert trace.f_bar == pytest.approx(-optimal_reward(grid, -lam0), abs=1e-7)

    def test_ftl_best_response_matches_expert(self, grid, expert):
        f = L2ApprenticeshipObjective(expert)
        trace = run_game(grid, f, FtlCostPlayer(f), BestResponsePlayer(grid), 256, FAST)
        assert trace.f_bar < 0.05
        assert trace.f_bar < trace.records[15].f_bar
        assert validate_occupancy(grid, trace.d_bar, tol=1e-6) == []
        assert_sandwich(trace)

    def test_trace_layout(self, grid, expert):
        f = L2ApprenticeshipObjective(expert)
        trace = run_game(grid, f, FtlCostPlayer(f), BestResponsePlayer(grid), 10, FAST)
        assert trace.K == 10
        assert [r.k for r in trace.checkpoints()] == [1, 2, 4, 8, 10]
        assert trace.records[2].gap_upper is None
        assert len(trace.lambdas) == len(trace.occupancies) == 10
        # best response never loses against itself
        assert trace.final.regret_pi == pytest.approx(0.0, abs=1e-12)
        assert trace.final.ms is None

    def test_wall_time_is_opt_in(self, grid, expert):
        f = L2ApprenticeshipObjective(expert)
        options = GameOptions(grid_size=4, record_wall_time=True)
        trace = run_game(grid, f, FtlCostPlayer(f), BestResponsePlayer(grid), 3, options)
        assert all(r.ms is not None and r.ms >= 0.0 for r in trace.records)

    def test_omd_neg_entropy_improves(self, grid):
        f = NegEntropyObjective(grid.num_pairs)
        trace = run_game(grid, f, OmdCostPlayer(f), BestResponsePlayer(grid), 128, FAST)
        assert trace.f_bar < trace.records[3].f_bar
        assert_sandwich(trace)

    def test_duality_gap_after_the_fact(self, grid, expert):
        f = L2ApprenticeshipObjective(expert)
        trace = run_game(grid, f, FtlCostPlayer(f), BestResponsePlayer(grid), 32, FAST)
        lower, upper = duality_gap(trace, f, grid)
        assert lower <= upper + 1e-8
        assert upper == pytest.approx(trace.f_bar)

    def test_linf_game_with_multiplicative_weights(self, grid, expert):
        game = LinfApprenticeshipGame(expert)
        player = OmdCostPlayer(game, Bregman.ENTROPY, lr_c=1.0)
        trace = run_game(grid, game, player, BestResponsePlayer(grid), 128, FAST)
        assert all(np.abs(lam).sum() <= 1.0 + 1e-9 for lam in trace.lambdas)
        assert trace.f_bar < trace.records[0].f_bar

    def test_q_learning_player_counts_samples(self, grid, expert):
        f = L2ApprenticeshipObjective(expert)
        player = QLearningPlayer(grid, seed=0, q_budget=20, budget_cap=200)
        trace = run_game(grid, f, FtlCostPlayer(f), player, 16, FAST)
        assert all(r.samples > 0 for r in trace.records)
        assert trace.final.regret_pi >= 0.0

    def test_ucrl2_player_in_average_mode(self):
        mdp = make_random_mdp(4, 2, 4, seed=2)
        probs = np.random.default_rng(3).dirichlet(np.ones(2), size=4)
        f = L2ApprenticeshipObjective(occupancy_of_policy(mdp, Policy(probs)).d)
        trace = run_game(mdp, f, FtlCostPlayer(f), Ucrl2Player(mdp, seed=0), 32, FAST)
        assert all(r.samples == 1 for r in trace.records)
        assert trace.final.regret_pi >= 0.0

    def test_nonconvex_objective_reports_bounds(self, grid):
        prior = np.full(2, 0.5)
        product = make_skill_product(grid, prior)
        f = DiaynObjective(prior, grid.num_states, grid.num_actions, negate=True)
        trace = run_game(product, f, FtlCostPlayer(f), BestResponsePlayer(product), 16, FAST)
        assert not trace.is_convex
        assert "nonconvex_bounds" in trace.extras
        # two skills carry at most one bit
        assert -np.log(2.0) - 1e-9 <= trace.f_bar <= 0.0


class TestFrankWolfe:
    """Plain and fully-corrective Frank-Wolfe."""

    def test_step_rules(self):
        assert fw_step_size(0, StepRule.STANDARD) == 1.0
        assert fw_step_size(2, StepRule.STANDARD) == pytest.approx(0.5)
        assert fw_step_size(3, StepRule.AVG) == pytest.approx(0.25)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("name", ["l2_al", "neg_entropy"])
    def test_averaging_rule_walks_the_ftl_path(self, seed, name):
        mdp = make_random_mdp(5, 3, 3, seed=seed, mode=MdpMode.DISCOUNTED)
        if name == "l2_al":
            probs = np.random.default_rng(seed).dirichlet(np.ones(3), size=5)
            f = L2ApprenticeshipObjective(occupancy_of_policy(mdp, Policy(probs)).d)
        else:
            f = NegEntropyObjective(mdp.num_pairs)
        game = run_game(mdp, f, FtlCostPlayer(f), BestResponsePlayer(mdp), 64, FAST)
        fw = run_frank_wolfe(mdp, f, 64, StepRule.AVG, options=FAST)
        assert np.allclose(game.f_bar_series(), fw.f_bar_series(), rtol=0.0, atol=1e-12)
        assert np.allclose(np.array(game.occupancies), np.array(fw.occupancies), rtol=0.0, atol=1e-12)
        assert np.allclose(game.d_bar, fw.d_bar, rtol=0.0, atol=1e-12)

    def test_standard_rule_converges(self, grid, expert):
        f = L2ApprenticeshipObjective(expert)
        trace = run_frank_wolfe(grid, f, 128, options=FAST)
        assert trace.f_bar < 0.05
        assert trace.extras["step_rule"] == "standard"
        assert_sandwich(trace)

    def test_fully_corrective_is_monotone_and_dominates(self, grid):
        f = NegEntropyObjective(grid.num_pairs)
        trace = run_fully_corrective_fw(grid, f, 24, inner_iters=100, options=FAST)
        series = trace.f_bar_series()
        assert np.all(np.diff(series) <= 1e-12)
        assert np.all(series <= np.array(trace.extras["fw_candidate"]) + 1e-12)
        assert sum(trace.extras["weights"]) == pytest.approx(1.0)
        assert trace.extras["num_vertices"] <= 24

    def test_fully_corrective_beats_plain(self, grid):
        f = NegEntropyObjective(grid.num_pairs)
        fcfw = run_fully_corrective_fw(grid, f, 24, inner_iters=100, options=FAST)
        fw = run_frank_wolfe(grid, f, 24, options=FAST)
        assert fcfw.f_bar <= fw.f_bar + 1e-9
        assert validate_occupancy(grid, fcfw.d_bar, tol=1e-6) == []

    @pytest.mark.parametrize("seed", range(5))
    def test_fully_corrective_dominates_at_every_iteration(self, seed):
        mdp = make_gridworld(4, 4, slip_prob=0.1, discount=0.9)
        probs = np.random.default_rng(seed).dirichlet(np.ones(4), size=mdp.num_states)
        f = L2ApprenticeshipObjective(occupancy_of_policy(mdp, Policy(probs)).d)
        fcfw = run_fully_corrective_fw(mdp, f, 40, inner_iters=200, seed=seed, options=FAST)
        fw = run_frank_wolfe(mdp, f, 40, options=FAST)
        assert np.all(fcfw.f_bar_series() <= fw.f_bar_series() + 1e-10)

        # geometric decrease: log f is close to affine in k
        ks = np.arange(5, 41)
        log_f = np.log(np.maximum(fcfw.f_bar_series()[ks - 1], 1e-300))
        assert stats.linregress(ks, log_f).rvalue ** 2 >= 0.9


def chain_mdp():
    """Four states in a row; "stay" pays 0.2 (1 at the end), "advance" pays
    nothing, and every action falls back to state 0 with probability 0.1."""
    P = np.zeros((4, 2, 4))
    for s in range(4):
        P[s, 0, s] += 0.9
        P[s, 1, min(s + 1, 3)] += 0.9
        P[s, :, 0] += 0.1
    reward = np.array([[0.2, 0.0], [0.2, 0.0], [0.2, 0.0], [1.0, 0.0]]).reshape(-1)
    return TabularMdp(transition=P, mode=MdpMode.AVERAGE, initial_dist=np.eye(4)[0], reward=reward)


class TestRates:
    """Convergence of f(d_bar) on real traces."""

    POWERS = 2 ** np.arange(4, 12)

    def _slope(self, trace, f_ref):
        gaps = trace.f_bar_series()[self.POWERS - 1] - f_ref
        return fit_rate(self.POWERS, gaps)

    @pytest.mark.parametrize("name, cost", [
        ("neg_entropy", "ogd"),
        ("l2_al", "ogd"),
        ("l2_al", "ftl"),
    ])
    def test_log_log_slope(self, grid, expert, name, cost):
        if name == "neg_entropy":
            f = NegEntropyObjective(grid.num_pairs)
            f_ref = max_entropy_occupancy(grid).dual_value
        else:
            f = L2ApprenticeshipObjective(expert)
            f_ref = 0.0
        player = OmdCostPlayer(f) if cost == "ogd" else FtlCostPlayer(f)
        trace = run_game(grid, f, player, BestResponsePlayer(grid), int(self.POWERS[-1]), FAST)
        assert np.all(trace.f_bar_series() >= f_ref - 1e-9)
        fit = self._slope(trace, f_ref)
        assert fit["slope"] <= -0.4
        assert not fit["flagged"]

    @pytest.mark.parametrize("seed", range(10))
    def test_l2_gap_keeps_shrinking(self, grid, seed):
        probs = np.random.default_rng(seed).dirichlet(np.ones(4), size=grid.num_states)
        f = L2ApprenticeshipObjective(occupancy_of_policy(grid, Policy(probs)).d)
        trace = run_game(grid, f, FtlCostPlayer(f), BestResponsePlayer(grid), 4096, FAST)
        assert trace.f_bar < trace.records[63].f_bar


class TestPolicyRegret:
    """Average regret of learning policy players inside the game."""

    def test_ucrl2_regret_shrinks(self):
        mdp = chain_mdp()
        f = LinearObjective(-mdp.reward)
        player = Ucrl2Player(mdp, seed=0, c_p=1.0)
        trace = run_game(mdp, f, FtlCostPlayer(f), player, 1000, FAST)
        regret = np.array(trace.optimal_rewards) - np.array(trace.realized_rewards)
        assert np.all(regret >= 0.0)
        running = np.cumsum(regret) / np.arange(1, regret.size + 1)
        assert running[99] > 0.0
        assert running[-1] <= 0.5 * running[99]
        assert trace.final.regret_pi == pytest.approx(running[-1])

    def test_q_learning_regret_follows_the_tolerance_schedule(self):
        pair = make_symmetric_pair(MdpMode.DISCOUNTED, 0.9)
        probs = np.random.default_rng(1).dirichlet(np.ones(2), size=2)
        f = L2ApprenticeshipObjective(occupancy_of_policy(pair, Policy(probs)).d)
        K = 256
        allowance = sum(1.0 / k for k in range(1, K + 1)) / K + 0.05
        passed = 0
        for seed in range(10):
            player = QLearningPlayer(pair, seed, ToleranceSchedule.INV_K, 1.0, q_budget=10, budget_cap=500)
            trace = run_game(pair, f, FtlCostPlayer(f), player, K, FAST)
            passed += int(trace.final.regret_pi <= allowance)
        assert passed >= 9


class TestStationaryRewards:
    """Convex objectives whose optimum no deterministic policy reaches."""

    def test_max_entropy_beats_every_deterministic_policy(self):
        pair = make_symmetric_pair(MdpMode.DISCOUNTED, 0.9)
        f = NegEntropyObjective(pair.num_pairs)
        best_deterministic = min(
            f.value(occupancy_of_policy(pair, policy).d) for policy in enumerate_deterministic_policies(pair)
        )
        assert best_deterministic == pytest.approx(-math.log(2.0))

        trace = run_game(pair, f, FtlCostPlayer(f), BestResponsePlayer(pair), 512, FAST)
        assert trace.f_bar <= best_deterministic - 0.1
        oracle = max_entropy_occupancy(pair)
        assert oracle.dual_value == pytest.approx(-math.log(4.0), abs=1e-8)
        assert oracle.dual_value <= trace.f_bar + 1e-12
