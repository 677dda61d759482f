import csv
import io
import json

import numpy as np
import pytest

from pplearn.cli import main, schedule_rows
from pplearn.config import (
    ConfigError,
    build_data,
    build_train_config,
    dump_config,
    parse_config,
    requested_method,
    resolve,
)
from pplearn.experiments import parse_axis, run_experiment, run_grid

TINY = [
    "data.c=3", "data.dim=4", "data.nmax=40", "data.if=10", "data.val_per_class=10",
    "train.epochs=6", "train.milestones=4", "train.batch=16", "phase.e0=1", "phase.e1=4",
]


class TestConfig:
    def test_parse_comments_and_types(self):
        vals = parse_config("# c\ntrain.lr = 0.05  # note\ntrain.milestones = 3, 5\ntrain.renorm = off\nloss.s = none\n")
        assert vals == {"train.lr": 0.05, "train.milestones": (3, 5), "train.renorm": False, "loss.s": None}

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="x.cfg:2"):
            parse_config("train.lr = 1\ntrain.speed = 3\n", source="x.cfg")

    @pytest.mark.parametrize("text", ["train.epochs = ten", "train.renorm = maybe", "train.lr = nan", "justtext"])
    def test_bad_values(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_round_trip(self):
        cfg = resolve({"train.lr": 0.03}, ["method=cri+ppw+ppmix", "loss.gamma=2", "data.seed=4"])
        back = resolve(parse_config(dump_config(cfg, header="h1\nh2")))
        assert back == cfg

    def test_defaults_round_trip(self):
        assert resolve(parse_config(dump_config(resolve()))) == resolve()

    def test_method_preset_then_override(self):
        cfg = resolve({}, ["method=cri+ppw", "weight.mode=drw"])
        assert (cfg["loss.family"], cfg["weight.mode"], cfg["method"]) == ("cri", "drw", "custom")
        assert requested_method({}, ["method=cri+ppw"]) == "cri+ppw"

    def test_bad_method(self):
        with pytest.raises(ConfigError):
            resolve({}, ["method=ce+bogus"])

    def test_build_train_config(self):
        tc = build_train_config(resolve({}, ["method=ldam+pps", "phase.kind=log", "phase.rho=2"]))
        assert tc.loss.family == "ldam" and tc.sampler_mode == "pps" and tc.phase.kind.variant == "log"
        with pytest.raises(ConfigError):
            build_train_config(resolve({}, ["train.milestones=300"]))

    def test_data_seed_follows_train_seed(self):
        a = build_data(resolve({}, TINY + ["train.seed=3"]))[0]
        b = build_data(resolve({}, TINY + ["data.seed=3"]))[0]
        np.testing.assert_array_equal(a.features, b.features)

    def test_file_data(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x,y,label\n0,1,0\n1,0,1\n2,2,1\n")
        train, val = build_data(resolve({}, ["data.kind=file", f"data.path={p}", "data.header=true"]))
        assert train.n_samples == 3 and val is train
        with pytest.raises(ConfigError):
            build_data(resolve({}, ["data.kind=file"]))

    def test_qr(self):
        train, _ = build_data(resolve({}, TINY + ["data.qr=0.5"]))
        np.testing.assert_array_equal(train.class_counts, [20, 7, 2])  # from [40, 13, 4]

    def test_parse_axis(self):
        assert parse_axis("train.seed=0..3") == ("train.seed", ["0", "1", "2", "3"])
        assert parse_axis("method = ce, drw") == ("method", ["ce", "drw"])
        with pytest.raises(ValueError):
            parse_axis("nokey")


class TestExperiments:
    def test_seed_override_equivalent(self):
        a = run_experiment({"train.seed": 5}, TINY)
        b = run_experiment({}, TINY + ["train.seed=5"])
        assert a.record.to_csv() == b.record.to_csv()

    def test_single_cell_grid_equals_train(self):
        single = run_experiment({}, TINY + ["method=drw", "train.seed=2"])
        cells, _, agg = run_grid({}, TINY, [("method", ["drw"]), ("train.seed", ["2"])])
        assert cells[0].summary == single.record.summary()
        row = next(csv.DictReader(io.StringIO(agg)))
        assert float(row["final_acc_mean"]) == single.record.final.val_acc
        assert float(row["final_acc_std"]) == 0.0

    def test_grid_deterministic_and_grouped(self):
        axes = [("method", ["ce", "ppw"]), ("train.seed", ["0", "1", "2"])]
        first = run_grid({}, TINY, axes)
        second = run_grid({}, TINY, axes)
        assert first[1] == second[1] and first[2] == second[2]
        rows = list(csv.DictReader(io.StringIO(first[2])))
        assert [r["method"] for r in rows] == ["ce", "ppw"]
        assert all(r["n_runs"] == "3" for r in rows)

    def test_grid_jobs_match_serial(self):
        axes = [("train.seed", ["0", "1"])]
        assert run_grid({}, TINY, axes, jobs=2)[2] == run_grid({}, TINY, axes)[2]

    def test_grid_validates_before_running(self):
        with pytest.raises(ConfigError):
            run_grid({}, TINY, [("train.sed", ["0"])])

    def test_failed_cell_is_recorded(self):
        cells, cells_text, _ = run_grid({}, TINY, [("data.if", ["10", "100"])])
        assert cells[0].error == "" and "empty class" in cells[1].error
        assert "empty class" in cells_text


class TestCLI:
    def test_schedule_dump(self, capsys):
        assert main(["schedule-dump", "--set", "phase.rho=1"]) == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        assert rows[0] == ["epoch", "f", "alpha", "q", "lambda0", "lambda1"]
        assert len(rows) == 201
        mid = [float(v) for v in rows[131][1:]]
        assert mid == pytest.approx([0.5, 0.5, 0.5, 0.25, 0.75])

    def test_schedule_dump_file(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["schedule-dump", "--last", "9", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 11

    def test_schedule_rows_invariants(self):
        for e, f, alpha, q, lam0, lam1 in schedule_rows(resolve(), 0.3):
            assert q == 1 - alpha
            assert lam1 - lam0 == pytest.approx(f, abs=1e-15)
            assert lam0 <= 0.3 <= lam1

    def test_unknown_key_exits_1(self, capsys):
        assert main(["schedule-dump", "--set", "phase.e9=3"]) == 1
        assert "unknown config key" in capsys.readouterr().err

    def test_bad_flag_exits_1(self):
        with pytest.raises(SystemExit) as info:
            main(["train"])
        assert info.value.code == 1

    def test_loss_check_passes(self, capsys):
        assert main(["loss-check", "--all", "--cases", "150"]) == 0
        assert capsys.readouterr().out.count("pass") == 7

    def test_loss_check_corrupt_fails(self, capsys):
        assert main(["loss-check", "--cases", "20", "--corrupt"]) == 2
        assert "FAIL" in capsys.readouterr().out

    def test_train_then_eval(self, tmp_path, capsys):
        run = tmp_path / "run"
        assert main(["train", "--out", str(run), "--seed", "1", *sum([["--set", s] for s in TINY], [])]) == 0
        for name in ("config.txt", "epochs.csv", "summary.json", "params.npz"):
            assert (run / name).exists()
        summary = json.loads((run / "summary.json").read_text())
        assert summary["seed"] == 1 and summary["method"] == "custom"
        capsys.readouterr()
        assert main(["eval", "--run", str(run)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["overall"] == pytest.approx(summary["final_acc"])
        assert np.array(doc["confusion"]).sum() == 30

    def test_config_file_matches_set(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("\n".join(s.replace("=", " = ") for s in TINY) + "\n")
        main(["train", "--config", str(cfg), "--out", str(tmp_path / "a")])
        main(["train", "--out", str(tmp_path / "b"), *sum([["--set", s] for s in TINY], [])])
        assert (tmp_path / "a/epochs.csv").read_text() == (tmp_path / "b/epochs.csv").read_text()

    def test_grid_cli(self, tmp_path, capsys):
        args = ["grid", "--axis", "method=ce,drw", "--seeds", "2", "--out", str(tmp_path)]
        assert main(args + sum([["--set", s] for s in TINY], [])) == 0
        assert (tmp_path / "aggregate.csv").exists() and (tmp_path / "cells/cell0003/summary.json").exists()

    def test_grid_cli_needs_axis(self, tmp_path):
        assert main(["grid", "--out", str(tmp_path)]) == 1

    def test_grid_cli_failure_exit_2(self, tmp_path, capsys):
        assert main(["grid", "--axis", "data.if=1000", "--out", str(tmp_path), *sum([["--set", s] for s in TINY], [])]) == 2
