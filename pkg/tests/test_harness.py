"""
Tests for config validation, the trace store, the handlers and the CLI.
"""

import json

import numpy as np
import pandas as pd
import pytest
import yaml
from pydantic import ValidationError

import sys
sys.path.insert(0, ".")

from src.engine import build_objective, build_environment, seeded_cold_start, solve
from src.errors import InsufficientPoints
from src.handlers import (
    ExperimentHandlers,
    ReportHandlers,
    SuiteHandlers,
    ablation_ordering,
    aggregate_summaries,
    fit_rate,
    gap_series,
    run_seeds,
    solve_seed,
    table1_configs,
)
from src.main import run as cli
from src.models import ExperimentConfig
from src.store import TraceStore, trace_columns, trace_frame


GRID = {"type": "gridworld", "width": 3, "height": 3, "slip_prob": 0.1, "mode": "discounted", "discount": 0.9}


def l2_config(**overrides):
    doc = {
        "name": "l2",
        "environment": GRID,
        "objective": {"objective": "l2_al", "expert_policy_ref": "expert"},
        "experts": [{"name": "expert", "source": "random_policy", "seed": 7}],
        "K": 16,
        "grid_size": 4,
    }
    doc.update(overrides)
    return doc


class TestConfig:
    """Cross-field validation of experiment documents."""

    def test_valid_config(self):
        config = ExperimentConfig(**l2_config())
        assert config.cost.cost_player.value == "ftl"
        assert config.policy.policy_player.value == "best_response"
        assert config.seeds == [0]

    def test_unknown_expert_reference(self):
        doc = l2_config()
        doc["objective"]["expert_policy_ref"] = "missing"
        with pytest.raises(ValidationError):
            ExperimentConfig(**doc)

    def test_zero_iterations_rejected(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(**l2_config(K=0))

    def test_ucrl2_needs_average_mode(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(**l2_config(policy={"policy_player": "ucrl2"}))

    def test_linf_needs_mirror_descent(self):
        doc = l2_config()
        doc["objective"]["objective"] = "linf_al"
        with pytest.raises(ValidationError):
            ExperimentConfig(**doc)
        doc["cost"] = {"cost_player": "mw"}
        assert ExperimentConfig(**doc).cost.bregman.value == "entropy"

    def test_linear_objective_needs_ftl(self):
        doc = l2_config(objective={"objective": "linear", "lam0": [0.0] * 36}, cost={"cost_player": "ogd"})
        with pytest.raises(ValidationError):
            ExperimentConfig(**doc)

    def test_constraints_need_constrained_solver(self):
        doc = l2_config(constraints=[{"kind": "entropy", "min_entropy": 1.0}])
        with pytest.raises(ValidationError):
            ExperimentConfig(**doc)

    def test_environment_parameters_checked(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(**l2_config(environment={"type": "deep_sea"}))

    def test_table1_configs_validate(self):
        for name, doc in table1_configs().items():
            ExperimentConfig(name=name, **doc)


class TestFactory:
    """Building and solving from a config."""

    def test_diayn_runs_on_skill_product(self):
        config = ExperimentConfig(**l2_config(objective={"objective": "diayn", "num_skills": 3, "prior": "random"}))
        base = build_environment(config)
        objective, mdp = build_objective(config, base, seed=1)
        assert mdp.num_states == 3 * base.num_states
        assert objective.size == mdp.num_pairs
        assert not objective.is_convex

    @pytest.mark.parametrize("correction", ["full", "no_const", "none"])
    def test_diayn_discovers_distinct_skills(self, correction):
        doc = l2_config(
            environment={**GRID, "width": 4, "height": 4},
            objective={
                "objective": "diayn", "num_skills": 8, "prior": "random",
                "correction": correction, "negate": True,
            },
            experts=[],
            K=64,
        )
        # f_bar is minus the mutual information in nats
        assert solve(ExperimentConfig(**doc), seed=0).f_bar < -1e-3

    def test_cold_start_is_seeded(self):
        config = ExperimentConfig(**l2_config(objective={"objective": "diayn", "num_skills": 4, "prior": "random"}))
        _, mdp = build_objective(config, build_environment(config), seed=0)
        start = seeded_cold_start(mdp, 5)
        assert np.array_equal(start, seeded_cold_start(mdp, 5))
        assert not np.array_equal(start, seeded_cold_start(mdp, 6))
        assert start.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("solver", ["game", "frank_wolfe", "fully_corrective_fw"])
    def test_solvers_dispatch(self, solver):
        config = ExperimentConfig(**l2_config(solver=solver, inner_iters=20))
        trace = solve(config, seed=0)
        assert trace.solver == solver
        assert trace.K == 16

    def test_entropy_fraction_constraint(self):
        doc = l2_config(
            environment={"type": "deep_sea", "depth": 3, "mode": "average"},
            objective={"objective": "linear", "use_env_reward": True},
            experts=[],
            solver="constrained",
            constraints=[{"kind": "entropy", "entropy_fraction": 0.5}],
            K=32,
        )
        trace = solve(ExperimentConfig(**doc), seed=0)
        assert len(trace.final.residuals) == 1


class TestTraceStore:
    """CSV and JSON artifacts."""

    def test_trace_columns(self):
        assert trace_columns(2) == [
            "k", "f_bar", "gap_lower", "gap_upper", "regret_pi", "regret_lambda",
            "residual_1", "residual_2", "samples", "ms",
        ]

    def test_save_and_load(self, tmp_path):
        config = ExperimentConfig(**l2_config())
        trace = solve(config, seed=0)
        store = TraceStore(str(tmp_path))
        store.save_trace(0, trace)
        frame = store.load_trace(0)
        assert list(frame.columns) == trace_columns(0)
        assert len(frame) == 16
        assert frame["f_bar"].iloc[-1] == pytest.approx(trace.f_bar, rel=1e-10)
        assert frame["gap_upper"].isna().sum() == 16 - 5
        assert len(trace_frame(trace)) == 16


class TestHandlers:
    """Experiment runs and rate reports."""

    def test_solve_seed_returns_trace(self):
        seed, trace, error = solve_seed(ExperimentConfig(**l2_config()).model_dump(mode="json"), 3)
        assert seed == 3
        assert error is None
        assert trace.K == 16

    @pytest.mark.asyncio
    async def test_run_seeds_in_order(self):
        config = ExperimentConfig(**l2_config(K=4))
        results = await run_seeds(config, [0, 1], parallel=1)
        assert [seed for seed, _, _ in results] == [0, 1]

    def test_run_writes_artifacts(self, tmp_path):
        handlers = ExperimentHandlers()
        result = handlers.run({"config": l2_config(seeds=[0, 1]), "out": str(tmp_path)})
        assert result["exitCode"] == 0
        assert (tmp_path / "trace_seed0.csv").exists()
        assert (tmp_path / "trace_seed1.csv").exists()
        assert (tmp_path / "aggregate.json").exists()
        summary = TraceStore(str(tmp_path)).load_summary(1)
        assert summary.K == 16
        assert result["aggregate"]["num_seeds"] == 2

    def test_parallel_run_matches_sequential(self, tmp_path):
        doc = l2_config(seeds=[0, 1], K=8)
        ExperimentHandlers().run({"config": doc, "out": str(tmp_path / "seq")})
        ExperimentHandlers().run({"config": doc, "out": str(tmp_path / "par"), "parallel": 2})
        for seed in (0, 1):
            name = f"trace_seed{seed}.csv"
            assert (tmp_path / "seq" / name).read_bytes() == (tmp_path / "par" / name).read_bytes()

    def test_sampled_player_is_reproducible(self, tmp_path):
        doc = l2_config(
            seeds=[3],
            K=8,
            policy={"policy_player": "q_learning", "q_budget": 10, "q_budget_cap": 100},
        )
        ExperimentHandlers().run({"config": doc, "out": str(tmp_path / "first")})
        ExperimentHandlers().run({"config": doc, "out": str(tmp_path / "second")})
        first = (tmp_path / "first" / "trace_seed3.csv").read_bytes()
        assert first == (tmp_path / "second" / "trace_seed3.csv").read_bytes()

    def test_aggregate_summaries(self):
        agg = aggregate_summaries([{"seed": 0, "f_bar": 1.0}, {"seed": 1, "f_bar": 3.0}])
        assert agg["f_bar"]["mean"] == 2.0
        assert agg["f_bar"]["stderr"] == pytest.approx(1.0)
        assert "seed" not in agg

    def test_fit_rate_recovers_slope(self):
        ks = 2.0 ** np.arange(4, 12)
        fit = fit_rate(ks, 3.0 / np.sqrt(ks))
        assert fit["slope"] == pytest.approx(-0.5)
        assert fit["ci_low"] <= fit["slope"] <= fit["ci_high"]
        assert fit["r_squared"] == pytest.approx(1.0)
        assert not fit["flagged"]

    def test_slow_rate_is_flagged(self):
        ks = 2.0 ** np.arange(4, 12)
        assert fit_rate(ks, ks ** -0.2)["flagged"]

    def test_fit_rate_needs_points(self):
        with pytest.raises(InsufficientPoints):
            fit_rate([16, 32, 64], [0.1, 0.05, 0.02])

    def test_rate_report_over_trace_dir(self, tmp_path):
        run_dir = tmp_path / "decay"
        run_dir.mkdir()
        ks = np.arange(1, 1025)
        pd.DataFrame({"k": ks, "f_bar": 0.5 + 2.0 / ks}).to_csv(run_dir / "trace_seed0.csv", index=False)
        (run_dir / "reference.json").write_text(json.dumps({"f_ref": 0.5}))
        result = ReportHandlers().rates({"in": str(tmp_path)})
        assert result["report"]["decay"]["slope"] == pytest.approx(-1.0, abs=1e-6)
        assert result["flagged"] == []
        assert (tmp_path / "rates.json").exists()

    def test_gap_series_reports_dropped_points(self, tmp_path):
        run_dir = tmp_path / "exact"
        run_dir.mkdir()
        ks = np.arange(1, 1025)
        f_bar = 0.5 + 2.0 / ks
        f_bar[511] = 0.5
        pd.DataFrame({"k": ks, "f_bar": f_bar}).to_csv(run_dir / "trace_seed0.csv", index=False)
        series = gap_series(run_dir, 0.5)
        assert series.attrs["dropped_k"] == [512]
        assert 512 not in series["k"].tolist()
        (run_dir / "reference.json").write_text(json.dumps({"f_ref": 0.5}))
        report = ReportHandlers().rates({"in": str(tmp_path)})["report"]
        assert report["exact"]["dropped_k"] == [512]
        assert report["exact"]["slope"] == pytest.approx(-1.0, abs=1e-6)


class TestSuites:
    """Canned suites and their summary tables."""

    def test_ablation_ordering(self):
        assert ablation_ordering(1.00, 1.02, 0.90)
        assert not ablation_ordering(1.00, 1.20, 0.90)
        assert not ablation_ordering(1.00, 1.00, 1.00)

    def test_diayn_summary_is_per_seed(self, tmp_path):
        result = SuiteHandlers(str(tmp_path)).diayn({"num_skills": 2, "seeds": [0, 1], "K": 4})
        summary = result["summary"]
        assert summary["policy_player"] == "q_learning"
        assert set(summary["variants"]) == {"none", "no_const", "full"}
        assert all(len(v["mi_bits"]) == 2 for v in summary["variants"].values())
        assert len(summary["ordering_by_seed"]) == 2
        assert isinstance(summary["ordering_holds"], bool)
        assert (tmp_path / "diayn_ablation.json").exists()

    def test_deepsea_reports_the_oracle_reward(self, tmp_path):
        table = SuiteHandlers(str(tmp_path)).deepsea({"depth": 3, "K": 64})["table"]
        runs = {row["run"]: row for row in table["rows"]}
        assert runs["deepsea_entropy"]["oracle_reward"] == table["oracle_reward"]
        # the entropy floor can only cost extrinsic reward
        assert table["oracle_reward"] <= runs["deepsea_unconstrained"]["reward"] + 1e-9
        assert table["max_entropy"] > 0.0


class TestCli:
    """Command-line entry point."""

    def test_solve_command(self, tmp_path):
        config_path = tmp_path / "l2.yaml"
        config_path.write_text(yaml.safe_dump(l2_config(K=4)))
        out = tmp_path / "out"
        assert cli(["solve", "--config", str(config_path), "--seeds", "0", "2", "--out", str(out)]) == 0
        assert (out / "trace_seed2.csv").exists()

    def test_json_config(self, tmp_path):
        config_path = tmp_path / "l2.json"
        config_path.write_text(json.dumps(l2_config(K=2)))
        assert cli(["solve", "--config", str(config_path), "--out", str(tmp_path / "out")]) == 0

    def test_invalid_config_exit_code(self, tmp_path):
        config_path = tmp_path / "bad.yaml"
        config_path.write_text(yaml.safe_dump(l2_config(K=0)))
        assert cli(["solve", "--config", str(config_path), "--out", str(tmp_path)]) == 2

    def test_failed_seed_exit_code(self, tmp_path):
        doc = l2_config(
            environment={"type": "symmetric_pair", "mode": "discounted", "discount": 0.5},
            objective={"objective": "linear", "lam0": [0.0, 0.0, 0.0, 0.0]},
            experts=[],
            solver="constrained",
            constraints=[{"kind": "linear", "lam2": [1.0, 0.0, 1.0, 0.0], "c": -0.5}],
            mu_max=2.0,
            K=128,
        )
        config_path = tmp_path / "infeasible.yaml"
        config_path.write_text(yaml.safe_dump(doc))
        out = tmp_path / "out"
        assert cli(["solve", "--config", str(config_path), "--out", str(out)]) == 1
        # the trace of an infeasible run is kept
        assert (out / "trace_seed0.csv").exists()
