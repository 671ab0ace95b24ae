import csv
import json
import subprocess
import sys

import pytest

from gdstab import cli

SMALL = """
[network]
m = 8
d = 3
[data]
n = 10
noise_std = 0.05
[train]
t_max = 15
[run]
seeds = [0, 1]
n_mc = 200
coercivity = true
[verify]
checks = ["gradients", "hessians"]
n_grad_configs = 2
n_hess_configs = 1
[sweep]
n = [8, 12]
m = [4, 8]
c = [0.5, 1.0]
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "small.toml"
    p.write_text(SMALL)
    return p


def _run(args, out):
    return cli.main(args + ["--out-dir", str(out), "--workers", "1"])


def _data_rows(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.reader(lines))


def test_missing_config_is_usage_error(tmp_path):
    out = tmp_path / "out"
    assert _run(["train", "--config", str(tmp_path / "nope.toml")], out) == 2
    assert not out.exists() or not any(out.iterdir())


def test_unknown_key_and_bad_values(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[network]\nwidth = 3\n")
    assert _run(["train", "--config", str(bad)], tmp_path / "o") == 2
    bad.write_text("[network]\narch = 'three_layer'\nc = 0.5\n")
    assert _run(["verify", "--config", str(bad)], tmp_path / "o") == 2
    bad.write_text("[network]\nactivation = 'relu'\n")
    assert _run(["train", "--config", str(bad)], tmp_path / "o") == 2
    bad.write_text("[network\n")
    assert _run(["train", "--config", str(bad)], tmp_path / "o") == 2
    assert _run(["train", "--seeds", "1,1"], tmp_path / "o") == 2


def test_strict_rejects_large_eta(tmp_path):
    bad = tmp_path / "eta.toml"
    bad.write_text("[train]\neta = 100.0\nt_max = 5\n")
    assert _run(["train", "--config", str(bad)], tmp_path / "o") == 2


def test_parse_seeds():
    assert cli.parse_seeds("0-3") == [0, 1, 2, 3]
    assert cli.parse_seeds("4,2") == [4, 2]
    with pytest.raises(ValueError):
        cli.parse_seeds("x")


def test_train_outputs_and_auto_eta(cfg_file, tmp_path):
    out = tmp_path / "t"
    assert _run(["train", "--config", str(cfg_file)], out) == 0
    info = json.loads((out / "train.json").read_text())
    assert info["config"]["train"]["eta"] == "auto"
    etas = {r["eta"] for r in info["runs"]}
    assert len(etas) == 1 and next(iter(etas)) > 0
    rows = _data_rows(out / "train_seed0.csv")
    assert len(rows) == 1 + 16
    assert (out / "train_seed0.csv").read_text().startswith("# schema: gdstab.trajectory/1")


def test_byte_identical_reruns_and_worker_independence(cfg_file, tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for cmd in (["stability"], ["train"]):
        assert _run(cmd + ["--config", str(cfg_file)], a) == 0
        assert _run(cmd + ["--config", str(cfg_file)], b) == 0
        assert cli.main(cmd + ["--config", str(cfg_file), "--out-dir", str(c),
                               "--workers", "2"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir()) == sorted(p.name for p in c.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes() == (c / name).read_bytes()


def test_verify_command(cfg_file, tmp_path):
    out = tmp_path / "v"
    assert _run(["verify", "--config", str(cfg_file)], out) == 0
    res = json.loads((out / "verify.json").read_text())
    assert all(r["passed"] for r in res["results"])


def test_sweep_rows_and_summary(cfg_file, tmp_path):
    out = tmp_path / "s"
    assert _run(["sweep", "--config", str(cfg_file), "--seeds", "0-2"], out) == 0
    rows = _data_rows(out / "sweep.csv")
    assert rows[0] == cli.SWEEP_HEADER
    assert len(rows) - 1 == 24
    assert [int(r[0]) for r in rows[1:]] == list(range(24))
    summ = json.loads((out / "sweep_summary.json").read_text())
    assert len(summ["points"]) == 8


def test_sweep_budget_refusal(cfg_file, tmp_path):
    out = tmp_path / "s"
    big = tmp_path / "big.toml"
    big.write_text(SMALL.replace("c = [0.5, 1.0]", "c = [0.5, 1.0]\nmax_runs = 3"))
    assert _run(["sweep", "--config", str(big)], out) == 2
    assert not (out / "sweep.csv").exists()
    big.write_text(SMALL.replace("c = [0.5, 1.0]", "c = [0.5, 1.0]\nmax_cost = 10.0"))
    assert _run(["sweep", "--config", str(big)], out) == 2


def test_sweep_partial_results_survive_crash(cfg_file, tmp_path, monkeypatch):
    real = cli.sweep_job
    calls = {"n": 0}

    def flaky(cfg, point, seed):
        calls["n"] += 1
        if calls["n"] > 5:
            raise RuntimeError("simulated crash")
        return real(cfg, point, seed)

    monkeypatch.setattr(cli, "sweep_job", flaky)
    out = tmp_path / "s"
    with pytest.raises(RuntimeError):
        _run(["sweep", "--config", str(cfg_file)], out)
    rows = _data_rows(out / "sweep.csv")
    assert rows[0] == cli.SWEEP_HEADER and len(rows) - 1 == 5


def test_region_grid_and_points(tmp_path):
    out = tmp_path / "r"
    assert _run(["region"], out) == 0
    assert len(_data_rows(out / "region_two_layer.csv")) - 1 == 441
    assert _run(["region", "--arch", "two_layer", "--point", "1.0,0.75"], out) == 0
    assert _data_rows(out / "region_two_layer.csv")[1][3] == "blue_dotted_under_sufficient"
    assert _run(["region", "--arch", "three_layer", "--point", "0.6,0.4"], out) == 0
    assert _data_rows(out / "region_three_layer.csv")[1][3] == "pink_infeasible"
    assert _run(["region", "--grid", "1x5"], out) == 2
    assert _run(["region", "--point", "abc"], out) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gdstab", "region", "--point", "0.5,0.5",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "gdstab", "bogus"], capture_output=True)
    assert proc.returncode == 2
