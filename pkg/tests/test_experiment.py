import csv
import json

import numpy as np
import pytest

from pogo_codesign.cli import main
from pogo_codesign.errors import ConfigError, FingerprintMismatch
from pogo_codesign.experiment import (ExperimentConfig, aggregate, compare_with_oracle,
                                      load_run, read_csv_table, read_header, report,
                                      run_experiment, target_error)
from pogo_codesign.sweep import DesignGrid, sweep
from pogo_codesign.td3 import LOG_FIELDS, TrainingLog

TINY = {"episodes": 24, "rollout": 8, "seeds": [0, 1, 2],
        "sim": {"dt": 1e-4, "t_f": 0.5},
        "td3": {"hidden": [8, 8], "batch_size": 8}}


def tiny_config(tmp_path, **overrides):
    data = {**TINY, "out_dir": str(tmp_path / "run"), **overrides}
    return ExperimentConfig.from_dict(data)


@pytest.fixture(scope="module")
def finished_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("exp")
    config = ExperimentConfig.from_dict({**TINY, "out_dir": str(out / "run")})
    stats = run_experiment(config)
    return config, stats, out / "run"


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert (cfg.space, cfg.reward, cfg.episodes, cfg.rollout) == ("narrow", "max_height",
                                                                     1000, 100)
        assert cfg.seeds == list(range(10))
        assert cfg.command["delta_t"] == 0.077

    @pytest.mark.parametrize("bad", [{"space": "wide"}, {"reward": "fast"}, {"x_s": 0.0},
                                     {"rollout": 20, "episodes": 10}, {"seeds": []},
                                     {"seeds": [1, 1]}, {"td3": {"momentum": 0.9}},
                                     {"command": {"delta_1": 0.02}}, {"colour": "red"},
                                     {"sim": {"dt": 1e-4, "t_f": 0.00015}},
                                     {"td3": {"learning_starts": 5}}])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)

    def test_round_trip(self, tmp_path):
        cfg = tiny_config(tmp_path, space="broad", reward="specified_height")
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        back = ExperimentConfig.load(path)
        assert back == cfg and back.config_hash() == cfg.config_hash()

    def test_hash_ignores_output_location(self, tmp_path):
        a = tiny_config(tmp_path)
        b = a.with_overrides(out_dir="elsewhere", workers=3)
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != a.with_overrides(seeds=[5]).config_hash()

    def test_reward_scale_follows_case(self, tmp_path):
        assert tiny_config(tmp_path).td3_config(0).reward_scale == 100.0
        target_cfg = tiny_config(tmp_path, reward="specified_height")
        assert target_cfg.td3_config(0).reward_scale == 1.0
        assert target_cfg.td3_config(3).learning_starts == 8


class TestAggregate:
    def test_single_seed_rollout_only(self, tmp_path):
        cfg = tiny_config(tmp_path, episodes=8, rollout=8, seeds=[4])
        stats = run_experiment(cfg, plots=False)
        log = TrainingLog.read_csv(tmp_path / "run" / "logs" / "seed_0004.csv")
        for ch in ("apex", "reward", "alpha", "zeta"):
            assert np.array_equal(stats.mean[ch], log.column(ch))
            assert np.all(stats.std[ch] == 0.0)

    def test_independent_recomputation(self, finished_run):
        _, _, run_dir = finished_run
        columns = {}
        for path in sorted((run_dir / "logs").glob("seed_*.csv")):
            with open(path) as fh:
                rows = list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))
            for ch in ("apex", "reward", "alpha", "zeta"):
                columns.setdefault(ch, []).append([float(r[ch]) for r in rows])
        table = read_csv_table(run_dir / "aggregate.csv")
        for ch, stack in columns.items():
            stack = np.array(stack)
            n = stack.shape[0]
            mean = stack.sum(axis=0) / n
            std = np.sqrt(((stack - mean) ** 2).sum(axis=0) / n)
            assert np.max(np.abs(table[f"{ch}_mean"] - mean)) <= 1e-12
            assert np.max(np.abs(table[f"{ch}_std"] - std)) <= 1e-12

    def test_std_non_negative_and_seed_count(self, finished_run):
        config, stats, _ = finished_run
        assert stats.seeds == config.seeds
        assert all(np.all(s >= 0) for s in stats.std.values())


class TestArtifacts:
    def test_files_and_headers(self, finished_run):
        config, _, run_dir = finished_run
        for name in ("aggregate.csv", "final_designs.csv", "summary.csv",
                     "logs/seed_0000.csv"):
            assert read_header(run_dir / name)["config_hash"] == config.config_hash()
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["complete"] and manifest["config_hash"] == config.config_hash()
        plots = sorted(p.name for p in (run_dir / "plots").glob("*.svg"))
        assert plots == ["alpha_vs_episode.svg", "apex_vs_episode.svg",
                         "reward_vs_episode.svg", "zeta_vs_episode.svg"]

    def test_seventeen_digit_output(self, finished_run):
        _, _, run_dir = finished_run
        config, logs, _ = load_run(run_dir)
        with open(run_dir / "logs" / "seed_0001.csv") as fh:
            rows = [r for r in csv.DictReader(ln for ln in fh if not ln.startswith("#"))]
        assert float(rows[5]["alpha"]) == logs[1].rows[5]["alpha"]
        assert list(rows[0]) == list(LOG_FIELDS)

    def test_rerun_is_byte_identical(self, finished_run, tmp_path):
        config, _, run_dir = finished_run
        again = config.with_overrides(out_dir=str(tmp_path / "again"))
        run_experiment(again)
        for rel in ("aggregate.csv", "final_designs.csv", "summary.csv", "logs/seed_0002.csv",
                    "plots/apex_vs_episode.svg"):
            assert (run_dir / rel).read_bytes() == (tmp_path / "again" / rel).read_bytes()

    def test_replot_is_idempotent(self, finished_run):
        from pogo_codesign.plotting import plot_run
        _, _, run_dir = finished_run
        before = {p.name: p.read_bytes() for p in (run_dir / "plots").glob("*.svg")}
        for p in (run_dir / "plots").glob("*.svg"):
            p.unlink()
        plot_run(run_dir)
        after = {p.name: p.read_bytes() for p in (run_dir / "plots").glob("*.svg")}
        assert before == after

    def test_parallel_seeds_match_serial(self, finished_run, tmp_path):
        config, _, run_dir = finished_run
        par = config.with_overrides(out_dir=str(tmp_path / "par"), workers=2)
        run_experiment(par, plots=False)
        assert (run_dir / "aggregate.csv").read_bytes() == \
            (tmp_path / "par" / "aggregate.csv").read_bytes()

    def test_failed_seed_marked_incomplete(self, tmp_path, monkeypatch):
        import pogo_codesign.experiment as ex
        real = ex.run_seed

        def flaky(config, seed):
            if seed == 1:
                raise RuntimeError("boom")
            return real(config, seed)

        monkeypatch.setattr(ex, "run_seed", flaky)
        cfg = tiny_config(tmp_path, episodes=8, rollout=8)
        stats = run_experiment(cfg, plots=False)
        manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
        assert not manifest["complete"]
        assert manifest["seeds"]["1"]["complete"] is False
        assert stats.seeds == [0, 2]


class TestReport:
    def test_target_error_arithmetic(self):
        err, rel = target_error(0.0102, 0.01)
        assert err == pytest.approx(2e-4, rel=1e-9)
        assert rel == pytest.approx(0.02, rel=1e-9)

    def test_ratio_one_at_oracle(self, tmp_path):
        cfg = tiny_config(tmp_path)
        grid = DesignGrid(3000.0, 6000.0, 3, 0.001, 0.019, 2)
        surf = sweep(grid, cfg.make_command(), cfg.sim_config())
        i, j = np.unravel_index(np.argmax(surf.heights), surf.heights.shape)
        logs = []
        for seed in (0, 1):
            row = {k: 0.0 for k in LOG_FIELDS}
            row.update(seed=seed, episode=0, alpha=grid.alphas[i], zeta=grid.zetas[j])
            logs.append(TrainingLog(seed, [row]))
        result = compare_with_oracle(cfg, aggregate(logs), surf)
        assert result["height_ratio"] == 1.0

    def test_report_and_mismatch(self, finished_run, tmp_path):
        config, _, run_dir = finished_run
        grid = DesignGrid.for_space(config.design_space, 3, 3)
        surf = sweep(grid, config.make_command(), config.sim_config())
        surf.write_csv(tmp_path / "surface.csv")
        rows = report([tmp_path / "surface.csv"], [run_dir])
        assert rows[0]["space"] == "narrow" and 0 < rows[0]["height_ratio"]

        other = ExperimentConfig.from_dict({**TINY, "sim": {"dt": 1e-4, "t_f": 0.4}})
        stale = sweep(grid, other.make_command(), other.sim_config())
        stale.write_csv(tmp_path / "stale.csv")
        with pytest.raises(FingerprintMismatch):
            report([tmp_path / "stale.csv"], [run_dir])


class TestCli:
    def write_config(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({**TINY, "out_dir": str(tmp_path / "cli")}))
        return path

    def test_simulate(self, tmp_path, capsys):
        out = tmp_path / "traj.csv"
        assert main(["simulate", "--config", str(self.write_config(tmp_path)),
                     "--alpha", "5000", "--out", str(out)]) == 0
        table = read_csv_table(out)
        assert len(table["t"]) == 5001
        assert "# event" in out.read_text()

    def test_tune_command(self, tmp_path, capsys):
        cfg_out = tmp_path / "tuned.json"
        assert main(["tune-command", "--config", str(self.write_config(tmp_path)),
                     "--start", "0.0", "--stop", "0.02", "--step", "0.01",
                     "--out", str(cfg_out)]) == 0
        tuned = ExperimentConfig.load(cfg_out)
        assert tuned.command["delta_t"] in (0.0, 0.01, 0.02)

    def test_sweep_train_report_plot(self, tmp_path, capsys):
        cfg = str(self.write_config(tmp_path))
        surf = tmp_path / "surf.csv"
        assert main(["sweep", "--config", cfg, "--n", "3", "--out", str(surf)]) == 0
        assert main(["train", "--config", cfg, "--seeds", "2", "--episodes", "12",
                     "--reward", "target", "--no-plots"]) == 0
        cfg_run, logs, _ = load_run(tmp_path / "cli")
        assert cfg_run.seeds == [0, 1] and cfg_run.reward == "specified_height"
        assert len(logs[0]) == 12
        assert main(["report", "--surfaces", str(surf), "--runs", str(tmp_path / "cli"),
                     "--out", str(tmp_path / "report.csv")]) == 0
        assert "target error" in capsys.readouterr().out
        assert main(["plot", "--run", str(tmp_path / "cli"), "--surface", str(surf)]) == 0
        assert (tmp_path / "cli" / "plots" / "apex_vs_episode.svg").exists()

    def test_errors_exit_nonzero(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"space": "wide"}))
        assert main(["train", "--config", str(path)]) == 2
        assert "error" in capsys.readouterr().err
