from dataclasses import replace

import numpy as np
import pytest
import yaml

from ambc_score import bench
from ambc_score.bench import (
    CSV_HEADER,
    aggregate,
    find,
    grid_search_beta,
    link_names,
    mean_ci,
    nmse,
    nmse_per_link,
    paired_difference,
    read_results,
    results_csv,
    run_sweep,
)
from ambc_score.cli import main
from ambc_score.config import ConfigError, load_config, make_config
from ambc_score.numerics import make_rng, sample_complex_gaussian
from ambc_score.score import init_models
from ambc_score.score.checkpoint import load as load_checkpoint

TINY_TRAIN = {"epochs": 0, "dataset_size": 64, "width": 16, "depth": 1,
              "disc_width": 8, "disc_depth": 1}


def small(**kw):
    base = {"trials": 200, "snr_db": [0.0, 10.0], "estimators": ["LS", "MMSE"]}
    base.update(kw)
    return make_config("desk", base)


class TestNmse:
    def test_examples(self):
        h = sample_complex_gaussian(6, 1, 1.0, make_rng(0))
        assert nmse(h, h) == 0.0
        assert nmse(h, np.zeros_like(h)) == pytest.approx(1.0)
        assert nmse(h, 2 * h) == pytest.approx(1.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            nmse(np.zeros(3), np.ones(3))
        with pytest.raises(ValueError):
            nmse(np.ones(3), np.ones(4))

    def test_per_link_agrees_with_scalar(self):
        rng = make_rng(1)
        H = sample_complex_gaussian(4, 3, 1.0, rng, batch=(5,))
        E = H + 0.3 * sample_complex_gaussian(4, 3, 1.0, rng, batch=(5,))
        per = nmse_per_link(H, E)
        assert per[2, 1] == pytest.approx(nmse(H[2, :, 1], E[2, :, 1]))

    def test_scale_invariance_of_cascaded_metric(self):
        rng = make_rng(2)
        h = sample_complex_gaussian(4, 1, 1.0, rng)
        e = sample_complex_gaussian(4, 1, 1.0, rng)
        assert nmse(np.sqrt(0.6) * h, np.sqrt(0.6) * e) == pytest.approx(nmse(h, e))

    def test_mean_ci(self):
        x = np.array([1.0, 2.0, 3.0, np.nan])
        m, h, n = mean_ci(x)
        assert (m, n) == (2.0, 3)
        assert h == pytest.approx(1.959963984540054 * 1.0 / np.sqrt(3))
        assert mean_ci([4.0])[1] == 0.0


class TestAggregation:
    def test_link_names(self):
        assert link_names(2) == ["direct", "cascaded_avg", "cascaded_1", "cascaded_2"]
        assert link_names(0) == ["direct"]

    def test_cascaded_average(self):
        per = make_rng(3).uniform(size=(50, 4))
        rows = {r.link: r for r in aggregate("LS", 0.0, per)}
        tags = np.mean([rows[f"cascaded_{k}"].nmse_mean for k in (1, 2, 3)])
        assert abs(rows["cascaded_avg"].nmse_mean - tags) < 1e-12

    def test_divergent_trials_counted(self):
        per = np.ones((10, 2))
        per[3] = np.nan
        rows = aggregate("ALS-analytic", 5.0, per)
        assert all(r.trials == 9 and r.diverged == 1 for r in rows)


@pytest.fixture(scope="module")
def rows():
    return run_sweep(small(trials=2000, snr_db=[-5.0, 0.0, 10.0, 20.0]), write=False)


class TestSweep:
    def test_schema(self, rows):
        text = results_csv(rows)
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        links = {r.link for r in rows}
        assert links == {"direct", "cascaded_avg", "cascaded_1", "cascaded_2", "cascaded_3"}

    def test_mmse_beats_ls_direct(self, rows):
        for snr in (-5.0, 0.0, 10.0, 20.0):
            d, h = paired_difference(find(rows, "MMSE", snr, "direct"),
                                     find(rows, "LS", snr, "direct"))
            assert d + h < 0

    def test_monotone_in_snr(self, rows):
        for est in ("LS", "MMSE"):
            for link in ("direct", "cascaded_avg"):
                seq = [find(rows, est, s, link) for s in (-5.0, 0.0, 10.0, 20.0)]
                for a, b in zip(seq, seq[1:]):
                    assert b.nmse_mean <= a.nmse_mean + a.nmse_ci95 + b.nmse_ci95

    def test_ls_direct_matches_closed_form(self, rows):
        # per-trial ratio mean for M = 8 is (n / r) M / (M - 1)
        r = find(rows, "LS", 0.0, "direct")
        assert abs(r.nmse_mean - 0.25 * 8 / 7) < r.nmse_ci95 * 1.5

    def test_table1_ls_matches_per_trial_oracle(self):
        cfg = make_config("table1", {"snr_db": [0.0], "estimators": ["LS"]})
        r = find(run_sweep(cfg, write=False), "LS", 0.0, "direct")
        assert abs(r.nmse_mean - 0.125 * 48 / 47) < r.nmse_ci95

    def test_one_trial_bytes_identical(self, tmp_path):
        cfg = small(trials=1, estimators=["LS", "MMSE", "ALS-analytic"])
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_sweep(replace(cfg, output=str(a)))
        run_sweep(replace(cfg, output=str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_estimator_independence(self):
        a = run_sweep(small(trials=50, estimators=["LS"]), write=False)
        b = run_sweep(small(trials=50, estimators=["MMSE", "LS"]), write=False)
        assert find(a, "LS", 10.0, "direct").nmse_mean == find(b, "LS", 10.0, "direct").nmse_mean
        c = run_sweep(small(trials=20, estimators=["ALS-analytic"]), write=False)
        d = run_sweep(small(trials=20, estimators=["LS", "MMSE", "ALS-analytic"]), write=False)
        assert results_csv(c) == results_csv([r for r in d if r.estimator == "ALS-analytic"])

    def test_trained_needs_checkpoint(self):
        with pytest.raises(ConfigError, match="checkpoint"):
            run_sweep(small(estimators=["ALS-trained"]), write=False)

    def test_read_back(self, rows, tmp_path):
        path = tmp_path / "r.csv"
        bench.write_results(path, rows)
        back = read_results(path)
        assert len(back) == len(rows)
        assert back[0].nmse_mean == pytest.approx(rows[0].nmse_mean, rel=1e-11)


class TestGridSearch:
    def test_singleton_unchanged(self):
        cfg = small(trials=20)
        res = grid_search_beta(cfg, [0.7], [3e-4])
        assert (res.beta0, res.zeta) == (0.7, 3e-4)
        assert len(res.table) == 1

    def test_divergent_cell_never_selected(self):
        cfg = small(trials=50)
        res = grid_search_beta(cfg, [1.0, 1e4], [1e-4])
        bad = [c for c in res.table if c.beta0 == 1e4][0]
        assert bad.diverged
        assert res.beta0 == 1.0

    def test_selection_reaches_mmse_on_gaussian_arm(self):
        cfg = small(trials=400, snr_db=[10.0], channel="gaussian",
                    estimators=["MMSE", "ALS-analytic"])
        res = grid_search_beta(cfg, [0.2, 1.0, 1.9], [1e-4])
        tuned = replace(cfg, als=replace(cfg.als, beta0=res.beta0, zeta=res.zeta))
        rows = run_sweep(tuned, write=False)
        als = find(rows, "ALS-analytic", 10.0, "direct").nmse_mean
        mm = find(rows, "MMSE", 10.0, "direct").nmse_mean
        assert abs(als / mm - 1) < 0.05

    def test_errors(self):
        with pytest.raises(ValueError):
            grid_search_beta(small(), [], [1e-4])
        with pytest.raises(ValueError):
            grid_search_beta(small(), [1.0], [1e-4], estimator="LS")


class TestConfig:
    def test_presets(self):
        t = make_config("table1")
        assert (t.fading.M, t.fading.K, t.tau) == (48, 7, 8)
        assert t.als.schedule.T == 2311 and t.als.beta0 == 3e-9
        d = make_config("desk")
        assert (d.fading.M, d.fading.K, d.tau, d.trials) == (8, 3, 4, 2000)
        assert d.train.seed == d.seed

    @pytest.mark.parametrize("override,path", [
        ({"trials": 0}, "trials"),
        ({"snr_db": [5.0, 0.0]}, "snr_db"),
        ({"snr_db": []}, "snr_db"),
        ({"snr_db": [0.0, "x"]}, "snr_db[1]"),
        ({"estimators": ["LS", "Kalman"]}, "estimators[1]"),
        ({"tau": 3}, "tau"),
        ({"fading": {"M": 2.5}}, "fading.M"),
        ({"fading": {"bogus": 1}}, "fading.bogus"),
        ({"als": {"schedule": {"T": 1}}}, "als.schedule"),
        ({"als": {"beta0_mode": "relative"}}, "als.beta0_mode"),
        ({"train": {"lam": -1.0}}, "train"),
        ({"train": "fast"}, "train"),
        ({"channel": "rician"}, "channel"),
        ({"sigma2": 0.0}, "sigma2"),
    ])
    def test_errors_name_field(self, override, path):
        with pytest.raises(ConfigError) as info:
            make_config("desk", override)
        assert str(info.value).startswith(path)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="preset"):
            make_config("huge")

    def test_yaml_file(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(yaml.safe_dump({"preset": "table1", "trials": 10, "snr_db": [0]}))
        cfg = load_config(path, seed=9)
        assert cfg.fading.M == 48 and cfg.trials == 10 and cfg.seed == 9

    def test_yaml_errors(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("trials: [1, 2\n")
        with pytest.raises(ConfigError):
            load_config(bad)
        lst = tmp_path / "list.yaml"
        lst.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="<root>"):
            load_config(lst)


class TestCommands:
    def test_ls_only_needs_no_checkpoint(self):
        rows = bench.estimate_command(small(trials=10, estimators=["LS"]))
        assert rows

    def test_zero_epoch_checkpoint_is_init(self, tmp_path):
        cfg = small(train=TINY_TRAIN)
        ck, hist = bench.train_command(cfg, tmp_path / "m.ckpt", tmp_path / "log.csv")
        assert hist == []
        m0, d0 = init_models(8, 4, cfg.train)
        back = load_checkpoint(tmp_path / "m.ckpt")
        np.testing.assert_array_equal(back.model.flat(), m0.flat())
        np.testing.assert_array_equal(back.disc.flat(), d0.flat())
        assert (tmp_path / "log.csv").read_text().startswith("epoch,dsm_loss")

    def test_load_model_errors(self, tmp_path):
        with pytest.raises(ConfigError, match="checkpoint"):
            bench.load_model(small(), tmp_path / "missing.ckpt")
        bench.train_command(small(train=TINY_TRAIN), tmp_path / "m.ckpt")
        other = small(fading={"K": 1}, tau=2)
        with pytest.raises(ConfigError, match="checkpoint"):
            bench.load_model(other, tmp_path / "m.ckpt")


class TestCli:
    def test_sweep_to_file(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(yaml.safe_dump({"trials": 20, "snr_db": [0, 10], "estimators": ["LS"]}))
        out = tmp_path / "r.csv"
        assert main(["sweep", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == 0
        rows = read_results(out)
        assert {r.snr_db for r in rows} == {0.0, 10.0}

    def test_sweep_stdout(self, tmp_path, capsys):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(yaml.safe_dump({"trials": 5, "snr_db": [0], "estimators": ["MMSE"]}))
        assert main(["sweep", "--config", str(cfg)]) == 0
        assert capsys.readouterr().out.startswith(",".join(CSV_HEADER))

    def test_train_then_trained_sweep(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(yaml.safe_dump({
            "trials": 5, "snr_db": [10], "estimators": ["LS", "ALS-trained"],
            "train": dict(TINY_TRAIN, epochs=1)}))
        ck, log = tmp_path / "m.ckpt", tmp_path / "log.csv"
        assert main(["train", "--config", str(cfg), "--checkpoint", str(ck), "--out", str(log)]) == 0
        assert len(log.read_text().splitlines()) == 2
        out = tmp_path / "r.csv"
        assert main(["sweep", "--config", str(cfg), "--checkpoint", str(ck),
                     "--out", str(out)]) == 0
        assert any(r.estimator == "ALS-trained" for r in read_results(out))

    def test_grid_search(self, tmp_path, capsys):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(yaml.safe_dump({"trials": 10, "snr_db": [10]}))
        assert main(["grid-search", "--config", str(cfg), "--beta0", "0.5,1.0",
                     "--zeta", "1e-4"]) == 0
        captured = capsys.readouterr()
        assert captured.out.splitlines()[0] == "beta0,zeta,score_db,diverged,selected"
        assert "selected beta0=" in captured.err

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "c.yaml"
        cfg.write_text(yaml.safe_dump({"trials": -3}))
        assert main(["sweep", "--config", str(cfg)]) == 2
        assert "trials" in capsys.readouterr().err

    def test_bad_checkpoint_exit_code(self, tmp_path, capsys):
        junk = tmp_path / "junk.ckpt"
        junk.write_bytes(b"garbage-bytes")
        cfg = tmp_path / "c.yaml"
        cfg.write_text(yaml.safe_dump({"trials": 3, "estimators": ["ALS-trained"]}))
        assert main(["sweep", "--config", str(cfg), "--checkpoint", str(junk)]) == 2
        assert "magic" in capsys.readouterr().err

    def test_unknown_preset_rejected(self):
        with pytest.raises(SystemExit):
            main(["sweep", "--preset", "huge"])
