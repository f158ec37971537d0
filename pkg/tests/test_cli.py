import json
import math
import os
import subprocess
import sys

import pytest

from hsnewton.cli import ConfigError, parse_config, run_command

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT = os.path.join(ROOT, "configs", "default.json")

FAST = {
    "problem": {"K": 64},
    "solver": {"schedule": {"kind": "reciprocal_integers", "k": "linear"}},
    "experiment": {"deltas": [1e-2, 1e-3], "seeds": [0, 1]},
    "check": {"families": [{"kind": "exponential"}], "schedules": [{"kind": "constant", "alpha": 1.0}],
              "n_max": 5},
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_problems_lists_catalog(capsys):
    assert run_command(["problems"]) == 0
    assert capsys.readouterr().out.split() == ["diagonal-linear", "quadratic-rank1"]


@pytest.mark.parametrize("argv", [["bogus"], [], ["solve"]])
def test_usage_errors_exit_one(argv, capsys):
    assert run_command(argv) == 1
    assert "usage:" in capsys.readouterr().err


def test_defaults_filled():
    cfg = parse_config(DEFAULT)
    assert cfg.solver["s"] == 0.0 and cfg.solver["tau"] == 2.0
    assert cfg.solver["filter"]["kind"] == "tikhonov" and cfg.solver["filter"]["order"] == 1
    assert cfg.solver["schedule"] == {"kind": "constant", "alpha": 1.0}
    assert cfg.problem["K"] == 256 and cfg.problem["a"] == 1.0
    assert cfg.r_list() == [0.0, -1.0]


def test_shipped_configs_parse():
    for name in os.listdir(os.path.join(ROOT, "configs")):
        parse_config(os.path.join(ROOT, "configs", name))


def test_tau_rejected(tmp_path, capsys):
    path = _write(tmp_path, {"solver": {"tau": 1.0}})
    with pytest.raises(ConfigError) as exc:
        parse_config(path)
    assert any("tau must exceed 1 (discrepancy principle)" in e for e in exc.value.errors)
    assert run_command(["solve", path]) == 1
    assert "discrepancy principle" in capsys.readouterr().err


def test_mu_window_rejected(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config(_write(tmp_path, {"source": {"mu": 1.5}}))
    assert "smoothness condition" in exc.value.errors[0]


def test_all_violations_reported(tmp_path):
    bad = {"problem": {"name": "quadratic-rank1", "K": 0, "gamma": 2.0},
           "solver": {"tau": 0.5, "s": -3.0, "filter": {"kind": "lardy"},
                      "schedule": {"kind": "constant", "alpha": 0.3}, "filter_mode": "x"},
           "source": {"mu": 5.0}, "experiment": {"deltas": [1e-2], "r": [3.0]}, "extra": {}}
    with pytest.raises(ConfigError) as exc:
        parse_config(_write(tmp_path, bad))
    errs = exc.value.errors
    for fragment in ["unknown section", "K must be", "frame condition", "discrepancy principle",
                     "scaling condition", "filter_mode", "admissible alpha", "deltas"]:
        assert any(fragment in e for e in errs), fragment
    # every message names the field and the condition it enforces
    assert all(":" in e for e in errs)


def test_comments_ignored_and_bad_json(tmp_path):
    parse_config(_write(tmp_path, {"_note": 1, "solver": {"_why": "x", "tau": 3.0}}))
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert run_command(["solve", str(p)]) == 1
    assert run_command(["solve", str(tmp_path / "missing.json")]) == 1


def test_solve_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert run_command(["solve", _write(tmp_path, FAST), "--out", str(out), "--seed", "3"]) == 0
    payload = json.loads((out / "solve.json").read_text())
    assert payload["result"]["stop_reason"] == "discrepancy" and payload["seed"] == 3
    header = (out / "solve_history.csv").read_text().splitlines()[0]
    assert header == "n,alpha_n,s_n,residual,err_mu,err_0,err_minus_a"


def test_solve_without_discrepancy_stop_exits_two(tmp_path):
    cfg = json.loads(json.dumps(FAST))
    cfg["solver"]["max_iter"] = 1
    assert run_command(["solve", _write(tmp_path, cfg), "--out", str(tmp_path)]) == 2


def test_rates_on_default_config(tmp_path):
    assert run_command(["rates", DEFAULT, "--out", str(tmp_path)]) == 0
    for r in ("+0", "-1"):
        assert (tmp_path / f"rates_r{r}.csv").exists()
        rep = json.loads((tmp_path / f"rates_r{r}.json").read_text())
        assert rep["valid"] and abs(rep["fitted_slope"] - rep["theory_slope"]) <= 0.1
        assert len(rep["rows"]) == 35


def test_rates_format_flag_and_env(tmp_path, monkeypatch):
    monkeypatch.setenv("HSNEWTON_OUT", str(tmp_path / "env"))
    assert run_command(["rates", _write(tmp_path, FAST), "--format", "json"]) == 0
    files = sorted(os.listdir(tmp_path / "env"))
    assert files == ["rates_r+0.json", "rates_r-1.json"]


def test_reports_are_byte_identical(tmp_path):
    path = _write(tmp_path, FAST)
    for sub in ("a", "b"):
        assert run_command(["rates", path, "--out", str(tmp_path / sub)]) == 0
        assert run_command(["solve", path, "--out", str(tmp_path / sub)]) == 0
    for name in ("rates_r+0.json", "rates_r-1.json", "solve.json", "rates_r+0.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_check_filters(tmp_path, capsys):
    assert run_command(["check-filters", _write(tmp_path, FAST), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "certification.json").read_text())
    assert rep["passed"] and rep["cells"][0]["family"] == "exponential"
    assert capsys.readouterr().out.strip().endswith("PASS")


def test_quadratic_config_builds(tmp_path):
    cfg = parse_config(os.path.join(ROOT, "configs", "quadratic.json"))
    problem, scfg, src = cfg.build()
    assert problem.name == "quadratic-rank1" and scfg.filter.kind == "exponential"
    assert math.isclose(src.omega_norm, 1.0)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "hsnewton", "problems"], capture_output=True, text=True)
    assert out.returncode == 0 and "quadratic-rank1" in out.stdout
