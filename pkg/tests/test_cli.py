import json

import numpy as np
import pytest

from unibranch import cli, mcbvp
from unibranch._linalg import det_sign
from unibranch.config import RunConfig, parse_config
from unibranch.errors import ConfigError
from unibranch.report import read_states


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def run(argv):
    return cli.main(argv)


def test_list_builtins(capsys):
    assert run(["list-builtins"]) == 0
    out = capsys.readouterr().out
    for name in ("mcbvp", "builtin:circle", "builtin:fold", "builtin:pitchfork", "builtin:line"):
        assert name in out


def test_parse_config_strict():
    cfg = parse_config("problem = builtin:fold\nside = minus  # comment\nh_init = 0.01\n")
    assert cfg.problem == "builtin:fold" and cfg.side == "minus" and cfg.h_init == 0.01
    for bad in ("colour = red\n", "side = left\n", "mu = abc\n", "problem = builtin:nope\n",
                "m = 2.5\n", "h_init = 1\nh_max = 0.1\n", "lambda_min = 1\nlambda_max = 0\n",
                "verify = maybe\n", "mu = nan\n"):
        with pytest.raises(ConfigError):
            parse_config(bad)


def test_config_defaults_match_mesh():
    cfg = RunConfig()
    mesh = cfg.mesh()
    assert (mesh.m, mesh.mu, mesh.q_exp, mesh.delta) == (200, 12.0, 2.0, 0.1)
    assert cfg.sides == ["plus", "minus"]


def test_run_fold(tmp_path):
    out = tmp_path / "fold"
    cfg = write(tmp_path, "problem = builtin:fold\nbase_lambda = 1\nside = minus\n")
    assert run(["run", cfg, "--out", str(out)]) == 0
    cls = json.loads((out / "classification.json").read_text())
    assert cls["minus"]["classification"] == "BASE_RETURN"
    bal = json.loads((out / "balance.json").read_text())
    assert bal["index_sum"] == 0 and bal["balanced"]
    events = json.loads((out / "events.json").read_text())
    assert [e["kind"] for e in events["minus"]] == ["FOLD", "BASE_RETURN"]
    lines = (out / "branch_minus.jsonl").read_text().splitlines()
    recs = [json.loads(x) for x in lines]
    assert [r["step"] for r in recs] == list(range(len(recs)))
    assert set(recs[0]) >= {"step", "lambda", "u_inf_norm", "det_sign", "margin",
                            "residual_norm", "event"}
    assert recs[-1]["event"] == ["BASE_RETURN"]
    header = (out / "summary.csv").read_text().splitlines()[0]
    assert header.startswith("side,step,lambda,u_inf_norm")
    assert not (out / "errors.json").exists()


def test_records_recomputable_from_sidecar(tmp_path):
    out = tmp_path / "mc"
    cfg = write(tmp_path, "problem = mcbvp\nm = 60\nside = both\n")
    assert run(["run", cfg, "--out", str(out)]) == 0
    cfg_obj = RunConfig(m=60)
    system, _, mesh = cfg_obj.build()
    for side in ("plus", "minus"):
        pts = read_states(out / f"states_{side}.txt")
        recs = [json.loads(x) for x in (out / f"branch_{side}.jsonl").read_text().splitlines()]
        assert len(pts) == len(recs)
        for p, r in zip(pts, recs):
            assert p.lam == r["lambda"]
            assert det_sign(system.Fu(p)) == r["det_sign"]
            assert system.domain.margin(p.lam, p.u) == r["margin"]
            assert mcbvp.grad_sup(mesh, p.u) == r["grad_inf_norm"]


def test_run_mcbvp_defaults(tmp_path):
    out = tmp_path / "mc"
    cfg = write(tmp_path, "problem = mcbvp\nside = both\n")
    assert run(["run", cfg, "--out", str(out), "--figures"]) == 0
    assert (out / "branch_plus.jsonl").exists() and (out / "branch_minus.jsonl").exists()
    cls = json.loads((out / "classification.json").read_text())
    assert cls["plus"]["classification"] in ("BOUNDARY", "WINDOW_EXHAUSTED")
    assert cls["minus"]["classification"] in ("UNBOUNDED", "WINDOW_EXHAUSTED")
    if cls["minus"]["classification"] == "UNBOUNDED":
        assert cls["minus"]["evidence"]["final_size"] > 1e3
    assert (out / "branch_diagram.png").stat().st_size > 0


def test_run_invalid_q(tmp_path):
    out = tmp_path / "bad"
    cfg = write(tmp_path, "problem = mcbvp\nq = 0.5\n")
    assert run(["run", cfg, "--out", str(out)]) == 3
    err = json.loads((out / "errors.json").read_text())
    assert err["exit_code"] == 3 and err["type"] == "ConfigError"


def test_corrupted_config(tmp_path):
    cfg = write(tmp_path, "\x00\x01 ]]] [[[ not a config")
    assert run(["verify", cfg, "--out", str(tmp_path / "o")]) == 3
    assert run(["run", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "o")]) == 3


def test_run_stalled(tmp_path):
    cfg = write(tmp_path, "problem = builtin:fold\nside = minus\nnewton_max_iter = 0\n")
    assert run(["run", cfg, "--out", str(tmp_path / "o")]) == 2


def test_max_steps_override(tmp_path):
    out = tmp_path / "o"
    cfg = write(tmp_path, "problem = builtin:fold\nside = plus\n")
    assert run(["run", cfg, "--out", str(out), "--max-steps", "3"]) == 0
    assert len((out / "branch_plus.jsonl").read_text().splitlines()) == 4


def test_verify_circle(tmp_path):
    out = tmp_path / "v"
    cfg = write(tmp_path, "problem = builtin:circle\n")
    assert run(["verify", cfg, "--out", str(out), "--seed", "3"]) == 0
    rep = json.loads((out / "verify.json").read_text())
    checks = {c["name"]: c for c in rep["checks"]}
    assert checks["base_slice_degree"]["passed"]
    assert checks["base_slice_degree"]["measured"]["newton"] == 0
    assert rep["passed"] and rep["seed"] == 3


def test_verify_mcbvp(tmp_path):
    out = tmp_path / "v"
    cfg = write(tmp_path, "problem = mcbvp\n")
    assert run(["verify", cfg, "--out", str(out)]) == 0
    rep = json.loads((out / "verify.json").read_text())
    checks = {c["name"]: c for c in rep["checks"]}
    assert checks["fd_jacobian"]["measured"]["max_error_u"] <= 1e-6
    assert checks["shooting_lambda0"]["measured"]["sup_error"] <= 5e-4
    assert all(c["passed"] for c in rep["checks"])


def test_oracle_failure_exit(tmp_path, monkeypatch):
    from unibranch import verification

    failing = verification.Check("forced", False)
    monkeypatch.setattr(cli, "run_checks", lambda *a, **k: [failing])
    cfg = write(tmp_path, "problem = builtin:fold\nside = minus\nverify = true\n")
    assert run(["run", cfg, "--out", str(tmp_path / "o")]) == 4
    assert run(["verify", cfg, "--out", str(tmp_path / "o")]) == 4


def test_deterministic_outputs(tmp_path):
    cfg = write(tmp_path, "problem = builtin:circle\nside = both\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["run", cfg, "--out", str(a)]) == 0
    assert run(["run", cfg, "--out", str(b)]) == 0
    for name in ("summary.csv", "classification.json", "events.json", "balance.json",
                 "branch_plus.jsonl", "states_minus.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    bal = json.loads((a / "balance.json").read_text())
    assert bal["index_sum"] == 0 and len(bal["crossings"]) == 2
    assert sorted(np.round([c["u"][0] for c in bal["crossings"]], 6)) == [-1.0, 1.0]
