import json
import os

import numpy as np
import pytest

from adcg.bench.data import load_frames
from adcg.bench.generate import generate_lowrank, generate_lti, generate_twosource
from adcg.cli import main


def test_generate_twosource_round_trips(tmp_path):
    paths = generate_twosource(tmp_path, seed=3, n_frames=2, grid=16)
    stack = load_frames(paths["frames"], paths["truth"])
    assert len(stack) == 2
    assert stack.grid_w == stack.grid_h == 16
    assert all(t.shape == (2, 3) for t in stack.truths)
    cfg = json.load(open(paths["config"]))
    assert cfg["problem"] == "superres"


def test_generate_is_deterministic(tmp_path):
    a = generate_lti(tmp_path / "a", seed=9)
    b = generate_lti(tmp_path / "b", seed=9)
    assert open(a["io"]).read() == open(b["io"]).read()


def test_cli_generate_solve_score_superres(tmp_path, capsys):
    out = tmp_path / "data"
    rc = main(["generate", "--kind", "twosource", "--out", str(out), "--seed", "1",
               "--frames", "2"])
    assert rc == 0
    capsys.readouterr()

    # shrink the problem for test speed: regenerate frames at 16 px
    generate_twosource(out, seed=1, n_frames=2, grid=16)
    rc = main(["solve", "--config", str(out / "config.json")])
    assert rc == 0
    results = out / "results"
    assert (results / "summary.json").exists()
    assert (results / "metrics.csv").exists()
    assert (results / "solve_frame_0000.json").exists()
    summary = json.load(open(results / "summary.json"))
    assert summary["problem"] == "superres"
    assert summary["metrics"][-1]["f1"] > 0.0

    # score the produced localizations against the truth file
    loc = tmp_path / "loc.csv"
    rows = ["frame,x_nm,y_nm,weight"]
    for i in range(2):
        res = json.load(open(results / f"solve_frame_{i:04d}.json"))
        for atom in res["measure"]["atoms"]:
            rows.append(f"{i},{atom['theta'][0]},{atom['theta'][1]},{atom['w']}")
    loc.write_text("\n".join(rows) + "\n")
    rc = main(["score", "--kind", "f1", "--est", str(loc),
               "--truth", str(out / "truth.csv"), "--radius", "100"])
    assert rc == 0
    scored = json.loads(capsys.readouterr().out.strip())
    assert 0.0 <= scored["f1"] <= 1.0


def test_cli_solve_matcomp_and_sysid(tmp_path):
    mc = tmp_path / "mc"
    generate_lowrank(mc, seed=2, n_rows=12, n_cols=10, rank=2)
    cfg = json.load(open(mc / "config.json"))
    cfg["solver"]["max_outer_iters"] = 6
    json.dump(cfg, open(mc / "config.json", "w"))
    assert main(["solve", "--config", str(mc / "config.json")]) == 0
    summary = json.load(open(mc / "results" / "summary.json"))
    assert summary["final_test_rmse"] < 0.5

    lti = tmp_path / "lti"
    generate_lti(lti, seed=2, T=80, train_split=60)
    cfg = json.load(open(lti / "config.json"))
    cfg["solver"]["max_outer_iters"] = 4
    json.dump(cfg, open(lti / "config.json", "w"))
    assert main(["solve", "--config", str(lti / "config.json")]) == 0
    lines = (lti / "results" / "metrics.csv").read_text().strip().splitlines()
    assert lines[0] == "iteration,objective,gap,holdout_score"
    assert len(lines) >= 2


def test_cli_missing_input_exit_2(tmp_path, capsys):
    cfg = {
        "problem": "superres",
        "model": {"sigma": 100.0},
        "solver": {"variant": "adcg", "tau": 1.0},
        "inputs": {"frames": "missing.csv"},
        "output_dir": "results",
    }
    p = tmp_path / "config.json"
    json.dump(cfg, open(p, "w"))
    rc = main(["solve", "--config", str(p)])
    assert rc == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert "missing.csv" in err["message"]


def test_cli_bad_config_exit_2(tmp_path, capsys):
    p = tmp_path / "config.json"
    p.write_text("{not json")
    assert main(["solve", "--config", str(p)]) == 2
    assert "error" in json.loads(capsys.readouterr().err.strip())


def test_cli_score_sysid(tmp_path, capsys):
    a = tmp_path / "pred.csv"
    b = tmp_path / "truth.csv"
    a.write_text("y\n" + "\n".join(str(v) for v in [1.0, 2.0, 3.0]) + "\n")
    b.write_text("y\n" + "\n".join(str(v) for v in [1.0, 2.0, 3.0]) + "\n")
    assert main(["score", "--kind", "sysid", "--est", str(a), "--truth", str(b)]) == 0
    assert json.loads(capsys.readouterr().out)["score"] == pytest.approx(100.0)


def test_toml_config_accepted(tmp_path):
    lti = tmp_path / "lti"
    generate_lti(lti, seed=5, T=60, train_split=40)
    toml = lti / "config.toml"
    toml.write_text(
        'problem = "sysid"\noutput_dir = "results_toml"\n\n'
        "[model]\nr_grid = 20\nalpha_grid = 20\n\n"
        "[solver]\nvariant = \"adcg\"\ntau = 4.0\nmax_outer_iters = 3\n\n"
        '[inputs]\nio = "io.csv"\ntrain_split = 40\n'
    )
    assert main(["solve", "--config", str(toml)]) == 0
    assert (lti / "results_toml" / "summary.json").exists()


def test_workers_env_override(tmp_path, monkeypatch):
    out = tmp_path / "data"
    generate_twosource(out, seed=4, n_frames=2, grid=16)
    cfg = json.load(open(out / "config.json"))
    cfg["workers"] = 2
    json.dump(cfg, open(out / "config.json", "w"))
    monkeypatch.setenv("ADCG_WORKERS", "1")
    assert main(["solve", "--config", str(out / "config.json")]) == 0
    assert (out / "results" / "summary.json").exists()
